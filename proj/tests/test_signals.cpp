#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "isslab/signals.hpp"

using namespace isslab;
using namespace isslab::signals;

TEST_CASE("piecewise-constant evaluation is right-continuous") {
    auto u = step_signal({{0.0, 1.0}, {2.0, -3.0}, {5.0, 0.5}}, 10.0);
    CHECK(scalar_at(u, 0.0) == 1.0);
    CHECK(scalar_at(u, 1.999) == 1.0);
    CHECK(scalar_at(u, 2.0) == -3.0);
    CHECK(scalar_at(u, 4.999) == -3.0);
    CHECK(scalar_at(u, 5.0) == 0.5);
    CHECK(scalar_at(u, 9.0) == 0.5);
}

TEST_CASE("sup norm is the max over segment values") {
    auto u = step_signal({{0.0, 1.0}, {2.0, -3.0}, {5.0, 0.5}}, 10.0);
    CHECK(sup_norm(u) == 3.0);
    CHECK(sup_norm(constant_signal(-2.5)) == 2.5);
    CHECK(sup_norm(zero_signal()) == 0.0);
}

TEST_CASE("shift agrees with pointwise evaluation on a random grid") {
    auto u = step_signal({{0.0, 1.0}, {1.0, 2.0}, {3.0, -1.0}, {7.0, 4.0}}, 20.0);
    for (double tau : {0.0, 0.5, 1.0, 2.5, 3.0, 6.9, 8.0}) {
        auto v = shift(u, tau);
        Rng rng(42);
        for (int i = 0; i < 200; ++i) {
            double t = rng.uniform(0.0, 12.0);
            CHECK(scalar_at(v, t) == scalar_at(u, t + tau));
        }
        CHECK(v.horizon == doctest::Approx(std::max(0.0, u.horizon - tau)));
    }
}

TEST_CASE("concatenation keeps the head before the switch and the tail after") {
    auto head = constant_signal(1.0, 10.0);
    auto tail = step_signal({{0.0, 5.0}, {2.0, 6.0}}, 10.0);
    auto u = concat(head, tail, 3.0);
    CHECK(scalar_at(u, 0.0) == 1.0);
    CHECK(scalar_at(u, 2.999) == 1.0);
    CHECK(scalar_at(u, 3.0) == 5.0);  // the tail owns the switch time
    CHECK(scalar_at(u, 4.999) == 5.0);
    CHECK(scalar_at(u, 5.0) == 6.0);
    CHECK(u.horizon == doctest::Approx(13.0));

    auto w = concat(step_signal({{0.0, 9.0}, {3.0, 8.0}}, 5.0), tail, 3.0);
    CHECK(scalar_at(w, 3.0) == 5.0);  // head segment at exactly the switch is dropped
}

TEST_CASE("restriction keeps only history before the endpoint") {
    auto u = step_signal({{0.0, 1.0}, {2.0, 2.0}, {5.0, 3.0}}, 10.0);
    auto v = restrict_to(u, 4.0);
    CHECK(v.segments.size() == 2);
    CHECK(v.horizon == 4.0);
    CHECK(scalar_at(v, 3.0) == 2.0);
    // concat of restriction with the shifted remainder reproduces the signal
    auto rebuilt = concat(restrict_to(u, 4.0), shift(u, 4.0), 4.0);
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        double t = rng.uniform(0.0, 9.5);
        CHECK(scalar_at(rebuilt, t) == scalar_at(u, t));
    }
}

TEST_CASE("breakpoints cover segment starts inside the window plus both ends") {
    auto u = step_signal({{0.0, 1.0}, {2.0, 2.0}, {5.0, 3.0}}, 10.0);
    auto bp = breakpoints(u, 6.0);
    CHECK(bp == std::vector<double>{0.0, 2.0, 5.0, 6.0});
    CHECK(breakpoints(u, 1.5) == std::vector<double>{0.0, 1.5});
    CHECK(breakpoints(u, 2.0) == std::vector<double>{0.0, 2.0});
}

TEST_CASE("signal text forms parse and format") {
    auto c = parse_signal("const(2.5)");
    CHECK(scalar_at(c, 100.0) == 2.5);
    auto s = parse_signal("steps[(0,1),(2,-3.5)]");
    CHECK(scalar_at(s, 1.0) == 1.0);
    CHECK(scalar_at(s, 2.0) == -3.5);
    CHECK(format_signal(c) == "const(2.5)");
    auto round = parse_signal(format_signal(s));
    CHECK(scalar_at(round, 2.5) == -3.5);
    CHECK_THROWS_AS(parse_signal("ramp(1)"), ParseError);
    CHECK_THROWS_AS(parse_signal("steps[(1,1)]"), ParseError);  // must start at 0
}

TEST_CASE("validation rejects malformed signals") {
    InputSignal bad;
    bad.horizon = 1.0;
    CHECK_THROWS_AS(validate(bad), ParseError);
    bad.segments.push_back({0.5, {1.0}});
    CHECK_THROWS_AS(validate(bad), ParseError);
    InputSignal dec;
    dec.horizon = 1.0;
    dec.segments.push_back({0.0, {1.0}});
    dec.segments.push_back({0.0, {2.0}});
    CHECK_THROWS_AS(validate(dec), ParseError);
}
