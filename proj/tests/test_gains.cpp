#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "isslab/gains.hpp"

using namespace isslab;
using namespace isslab::gains;

TEST_CASE("evaluation of the parametric families matches hand values") {
    CHECK(eval(identity_gain(), 3.5) == doctest::Approx(3.5).epsilon(1e-15));
    CHECK(eval(zero_gain(), 7.0) == 0.0);
    CHECK(eval(power_gain(1.0, 2.0), 2.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(eval(power_gain(3.0, 0.5), 4.0) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(eval(saturation_gain(1.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(eval(saturation_gain(2.0), 3.0) == doctest::Approx(1.5).epsilon(1e-15));
}

TEST_CASE("evaluation rejects negative and out-of-range arguments") {
    CHECK_THROWS_AS(eval(identity_gain(), -1.0), DomainError);
    auto f = power_gain(1.0, 2.0);
    CHECK_THROWS_AS(eval(f, f.domain_hint * 2.0), DomainError);
}

TEST_CASE("inverse solves the parametric families to stated tolerance") {
    CHECK(inverse(power_gain(1.0, 2.0), 4.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(inverse(power_gain(2.0, 2.0), 8.0) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(inverse(identity_gain(), 0.0) == 0.0);
    CHECK(inverse(power_gain(5.0, 1.0), 10.0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("inverse round-trips through evaluation within twice the tolerance") {
    Rng rng(20240811);
    const double tol = 1e-9;
    for (int i = 0; i < 1000; ++i) {
        Rng r = rng.fork(i);
        double c = r.uniform(0.1, 10.0);
        double p = r.uniform(0.5, 3.0);
        double s = r.uniform(1e-3, 50.0);
        auto f = power_gain(c, p);
        double back = inverse(f, eval(f, s), tol);
        CHECK(std::abs(back - s) <= 2.0 * tol * std::max(1.0, s) + 1e-12);
    }
}

TEST_CASE("inverse reports a missing bracket for bounded gains") {
    CHECK_THROWS_AS(inverse(saturation_gain(1.0), 2.0), BracketError);
}

TEST_CASE("class verification accepts the families under their declared kind") {
    std::vector<double> grid{0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
    CHECK(verify_class(power_gain(1.0, 2.0), grid).pass);
    CHECK(verify_class(identity_gain(), grid).pass);
    CHECK(verify_class(saturation_gain(1.0), grid).pass);  // declared class K only
    auto decaying = custom_gain(Kind::L, [](double s) { return std::exp(-s); }, 1e300, "exp-decay");
    std::vector<double> lgrid{0.0, 0.5, 1.0, 2.0, 4.0};
    CHECK(verify_class(decaying, lgrid).pass);
}

TEST_CASE("class verification rejects wrong declarations with a reason") {
    std::vector<double> grid{0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};

    auto bounded_as_kinf = saturation_gain(1.0);
    bounded_as_kinf.kind = Kind::KInfinity;
    auto v1 = verify_class(bounded_as_kinf, grid);
    CHECK_FALSE(v1.pass);
    CHECK(v1.reason.find("bounded") != std::string::npos);

    auto decreasing_as_k = custom_gain(Kind::K, [](double s) { return 1.0 / (1.0 + s); });
    auto v2 = verify_class(decreasing_as_k, grid);
    CHECK_FALSE(v2.pass);

    auto offset = custom_gain(Kind::K, [](double s) { return s + 1.0; });
    auto v3 = verify_class(offset, grid);
    CHECK_FALSE(v3.pass);
    CHECK(v3.reason.find("zero") != std::string::npos);

    auto jumpy = custom_gain(Kind::K, [](double s) { return s < 1.0 ? s : s + 1.0; });
    auto v4 = verify_class(jumpy, grid);
    CHECK_FALSE(v4.pass);
    CHECK(v4.reason.find("jump") != std::string::npos);
}

TEST_CASE("split lower bound holds across random class-K samples") {
    CHECK(split_lower_bound_check(power_gain(1.0, 2.0), 1.0, 1.0));
    CHECK(split_lower_bound_check(saturation_gain(1.0), 0.0, 0.0));
    CHECK(split_lower_bound_check(identity_gain(), 3.0, 4.0));
    Rng rng(777);
    for (int i = 0; i < 1000; ++i) {
        Rng r = rng.fork(i);
        gains::ScalarGainFunction f;
        switch (r.uniform_int(0, 2)) {
            case 0: f = power_gain(r.uniform(0.1, 5.0), r.uniform(0.3, 3.0)); break;
            case 1: f = saturation_gain(r.uniform(0.1, 5.0)); break;
            default:
                f = custom_gain(Kind::K, [](double s) { return std::log1p(s); }, 1e300, "log1p");
        }
        CHECK(split_lower_bound_check(f, r.uniform(0.0, 100.0), r.uniform(0.0, 100.0)));
    }
}

TEST_CASE("gain parsing and formatting round-trip") {
    CHECK(eval(parse_gain("pow(2, 3)"), 2.0) == doctest::Approx(16.0));
    CHECK(eval(parse_gain("sat(1)"), 1.0) == doctest::Approx(0.5));
    CHECK(parse_gain("id").label == "id");
    CHECK(parse_gain("zero").is_zero());
    auto f = parse_gain(format_gain(power_gain(2.5, 1.5)));
    CHECK(eval(f, 2.0) == doctest::Approx(eval(power_gain(2.5, 1.5), 2.0)));
    CHECK_THROWS_AS(parse_gain("what(3)"), ParseError);
}

TEST_CASE("two-argument envelope fit dominates its samples and stays a valid envelope") {
    std::vector<KLSample> samples{{1.0, 0.0, 0.5}, {2.0, 1.0, 0.25}, {0.5, 3.0, 0.1}};
    auto beta = kl_envelope_fit(samples);
    for (const auto& s : samples) CHECK(beta(s.r, s.t) >= s.value);

    std::vector<double> r_grid, t_grid;
    for (int i = 0; i <= 19; ++i) {
        r_grid.push_back(0.25 * i);
        t_grid.push_back(0.3 * i);
    }
    auto verdict = verify_kl_grid(beta, r_grid, t_grid);
    INFO(verdict.reason);
    CHECK(verdict.pass);
    CHECK(beta(0.0, 0.7) == 0.0);
}

TEST_CASE("envelope fit of exact exponential decay stays within a factor two of it") {
    std::vector<KLSample> samples;
    for (int i = 0; i < 100; ++i) {
        double r = 0.1 + 0.05 * i;
        double t = 0.07 * i;
        samples.push_back({r, t, r * std::exp(-t)});
    }
    auto beta = kl_envelope_fit(samples);
    for (const auto& s : samples) {
        CHECK(beta(s.r, s.t) >= s.value);
        CHECK(beta(s.r, s.t) <= 2.0 * s.r * std::exp(-s.t) + 1e-12);
    }
}

TEST_CASE("envelope fit rejects degenerate samples") {
    CHECK_THROWS_AS(kl_envelope_fit({{0.0, 1.0, 0.5}}), DegenerateSampleError);
    CHECK_THROWS_AS(kl_envelope_fit({{0.0, 0.0, 0.0}, {0.0, 2.0, 0.0}}), DegenerateSampleError);
}
