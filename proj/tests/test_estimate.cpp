#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "isslab/estimate.hpp"

using namespace isslab;
using namespace isslab::estimate;
using systems::catalog;
using systems::StateVector;
using systems::TruncatedModeSystem;

namespace {

const double kLn10 = std::log(10.0);

EstimationBudget deterministic_budget() {
    EstimationBudget b;
    b.random_states = 0;
    b.random_signals = 0;
    return b;
}

// Input-free system frozen in place: every trajectory is constant.
TruncatedModeSystem frozen_system(int n) {
    TruncatedModeSystem sys;
    sys.catalog_id = "frozen";
    sys.mode_dim = 1;
    sys.n_modes = n;
    sys.input_free = true;
    sys.mode_witness = {1.0};
    sys.rhs = [](int, const double*, double, double* dz) { dz[0] = 0.0; };
    return sys;
}

}  // namespace

TEST_CASE("attainment time matches the closed-form mode decay rate") {
    auto sys = catalog("Example1", 12);
    auto u = signals::constant_signal(2.0);
    for (int k : {1, 4, 8, 12}) {
        auto t = attainment_time(sys, sys.witness_state(k), u, 0.1, gains::zero_gain(), 1e4);
        REQUIRE(t.has_value());
        double expect = (1.0 + std::pow(2.0, k)) * kLn10;
        CHECK(*t == doctest::Approx(expect).epsilon(1e-3));
    }
    // already inside the band: time zero
    auto t0 = attainment_time(sys, sys.zero_state(), u, 0.1, gains::zero_gain(), 1.0);
    REQUIRE(t0.has_value());
    CHECK(*t0 == 0.0);
    // never attained within the window
    auto tn = attainment_time(sys, sys.witness_state(12), u, 0.1, gains::zero_gain(), 1.0);
    CHECK(!tn.has_value());
    CHECK_THROWS_AS(
        attainment_time(sys, sys.witness_state(1), u, 0.0, gains::zero_gain(), 1.0),
        DomainError);
}

TEST_CASE("uniform limit check falsifies the slow-mode family and the witness replays") {
    auto budget = deterministic_budget();
    budget.truncations = {12};
    budget.eps_grid = {0.1};
    budget.r_grid = {1.0};
    budget.horizon = 1e4;
    budget.input_levels = {0.0, 2.0};
    budget.random_states = 2;

    auto sys = catalog("Example1", 12);
    auto rep = check_limit(sys, LimitUniformity::ULIM, gains::zero_gain(), budget);
    CHECK(rep.verdict == Verdict::Falsified);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->kind == WitnessKind::AttainmentTime);

    REQUIRE(rep.mode_table.size() == 12);
    for (std::size_t i = 0; i < rep.mode_table.size(); ++i) {
        int k = static_cast<int>(rep.mode_table[i][0]);
        CHECK(k == static_cast<int>(i) + 1);
        double expect = (1.0 + std::pow(2.0, k)) * kLn10;
        CHECK(rep.mode_table[i][1] == doctest::Approx(expect).epsilon(1e-3));
        if (k >= 6) {
            double ratio = rep.mode_table[i][1] / rep.mode_table[i - 1][1];
            CHECK(ratio >= 1.9);
            CHECK(ratio <= 2.1);
        }
    }

    auto replay = replay_witness(sys, *rep.witness);
    CHECK(replay.ok);
}

TEST_CASE("the same family is uniformly globally stable with zero input gain") {
    auto budget = deterministic_budget();
    budget.truncations = {12};
    budget.r_grid = {1.0};
    budget.horizon = 20.0;
    budget.input_levels = {0.0, 2.0};
    budget.random_states = 2;

    auto rep = check_stability(catalog("Example1", 12), StabilityVariant::UGS, budget);
    CHECK(rep.verdict == Verdict::NoViolationFound);
    REQUIRE(!rep.gamma_table.empty());
    for (const auto& row : rep.gamma_table) CHECK(row[1] <= 1e-6);
    // peaks from radius r never exceed r for this family
    for (const auto& row : rep.sigma_table) CHECK(row[1] <= row[0] * (1.0 + 1e-9));
}

TEST_CASE("local stability on the contracting scalar system finds delta = eps") {
    auto budget = deterministic_budget();
    budget.eps_grid = {0.5, 0.1};
    budget.horizon = 20.0;
    budget.random_states = 2;
    budget.random_signals = 2;

    auto rep = check_stability(catalog("ScalarISS", 1), StabilityVariant::ULS, budget);
    CHECK(rep.verdict == Verdict::NoViolationFound);
    CHECK(rep.delta_hat == doctest::Approx(0.5));
    REQUIRE(rep.sigma_table.size() == 2);
    CHECK(rep.sigma_table[0][1] == doctest::Approx(0.5));
    CHECK(rep.sigma_table[1][1] == doctest::Approx(0.1));
}

TEST_CASE("reachability sup diverges across truncations on the escaping family") {
    auto budget = deterministic_budget();
    budget.max_witness_modes = 4;
    double C = std::hypot(systems::mode_escape_threshold(), std::exp(1.0));

    auto sys = catalog("S1", 8);
    auto rep = check_brs(sys, C, 1.0, budget);
    CHECK(rep.verdict == Verdict::Falsified);
    REQUIRE(rep.sup_by_truncation.size() >= 4);
    for (const auto& row : rep.sup_by_truncation) {
        CHECK(row[1] >= row[0] * (1.0 - 1e-6));  // sup at truncation N reaches N
    }
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->kind == WitnessKind::PeakNorm);
    auto replay = replay_witness(sys.with_truncation(rep.witness->truncation), *rep.witness);
    CHECK(replay.ok);
}

TEST_CASE("the rescaled family keeps a truncation-independent reachability sup") {
    auto budget = deterministic_budget();
    double C = std::hypot(systems::mode_escape_threshold(), std::exp(1.0));

    auto rep = check_brs(catalog("S1tilde", 8), C, 1.0, budget);
    CHECK(rep.verdict == Verdict::NoViolationFound);
    REQUIRE(rep.sup_by_truncation.size() == 4);
    for (const auto& row : rep.sup_by_truncation)
        CHECK(row[1] == doctest::Approx(31.701707071).epsilon(1e-6));
}

TEST_CASE("uniform attraction time doubles with truncation on the slow linear family") {
    auto budget = deterministic_budget();
    budget.eps_grid = {0.01};
    budget.r_grid = {1.0};
    budget.horizon = 350.0;

    auto sys = catalog("LinDiagStrong", 8);
    auto rep = check_ag(sys, AgUniformity::UAG, gains::zero_gain(), budget);
    CHECK(rep.verdict == Verdict::Falsified);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->kind == WitnessKind::AttainmentTime);

    REQUIRE(rep.sup_by_truncation.size() == 4);
    for (std::size_t i = 0; i < rep.sup_by_truncation.size(); ++i) {
        double N = rep.sup_by_truncation[i][0];
        double tau = rep.sup_by_truncation[i][1];
        CHECK(tau >= N * std::log(100.0) * (1.0 - 1e-6));  // slowest mode sets the clock
        CHECK(tau <= N * std::log(100.0) * 1.1);
        if (i > 0) {
            double ratio = tau / rep.sup_by_truncation[i - 1][1];
            CHECK(ratio >= 1.7);
            CHECK(ratio <= 2.3);
        }
    }

    auto replay = replay_witness(sys.with_truncation(rep.witness->truncation), *rep.witness);
    CHECK(replay.ok);
}

TEST_CASE("a frozen system falsifies the limit property with a no-decay witness") {
    auto budget = deterministic_budget();
    budget.truncations = {4};
    budget.r_grid = {1.0};
    budget.eps_grid = {0.1};
    budget.horizon = 10.0;
    budget.max_witness_modes = 4;

    auto sys = frozen_system(4);
    auto rep = check_limit(sys, LimitUniformity::LIM, gains::zero_gain(), budget);
    CHECK(rep.verdict == Verdict::Falsified);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->kind == WitnessKind::NormAtTime);
    CHECK(rep.witness->measured == doctest::Approx(1.0).epsilon(1e-9));

    auto replay = replay_witness(sys.with_truncation(rep.witness->truncation), *rep.witness);
    CHECK(replay.ok);
}

TEST_CASE("a frozen system admits no decay envelope") {
    auto budget = deterministic_budget();
    budget.truncations = {2, 4};
    // small radius anchors the zero-input gain estimate; the reference radius
    // then exposes the non-decaying residual
    budget.r_grid = {0.01, 1.0};
    budget.horizon = 10.0;
    budget.max_witness_modes = 4;

    auto rep = fit_iss_bound(frozen_system(4), budget);
    CHECK(rep.verdict == Verdict::Falsified);
    CHECK(!rep.has_envelope);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->kind == WitnessKind::NormAtTime);
}

TEST_CASE("equilibrium continuity on a frozen system accepts the largest sampled delta") {
    auto budget = deterministic_budget();
    budget.truncations = {4};
    budget.random_states = 2;

    auto rep = check_cep(frozen_system(4), 0.25, 5.0, budget);
    CHECK(rep.verdict == Verdict::NoViolationFound);
    CHECK(rep.delta_hat == doctest::Approx(0.25));
    CHECK_THROWS_AS(check_cep(frozen_system(4), 0.0, 5.0, budget), DomainError);
}

TEST_CASE("flow expansion factor of a frozen system is exactly one") {
    auto budget = deterministic_budget();
    budget.truncations = {4};
    budget.random_states = 2;

    GronwallParams gw;
    gw.M = 1.0;
    gw.lambda = 0.0;
    gw.L_f = 0.0;
    auto rep = estimate_flow_lipschitz(frozen_system(4), 1.0, 2.0, budget, {}, gw);
    CHECK(rep.L_hat == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.notes.find("respected") != std::string::npos);
    CHECK_THROWS_AS(estimate_flow_lipschitz(frozen_system(4), 0.0, 2.0, budget), DomainError);
}

TEST_CASE("decay envelope fit on the contracting scalar system") {
    auto budget = deterministic_budget();
    budget.r_grid = {0.1, 1.0};
    budget.horizon = 20.0;
    budget.random_states = 2;

    auto rep = fit_iss_bound(catalog("ScalarISS", 1), budget);
    CHECK(rep.verdict == Verdict::NoViolationFound);
    REQUIRE(rep.has_envelope);

    // fitted input gain near the static gain u -> u of the scalar system
    double g1 = 0.0;
    for (const auto& row : rep.gamma_table)
        if (row[0] == doctest::Approx(1.0)) g1 = row[1];
    CHECK(g1 == doctest::Approx(1.0).epsilon(0.05));

    auto verdict = gains::verify_kl_grid(rep.envelope, {0.05, 0.1, 0.5, 1.0},
                                         {0.0, 0.5, 1.0, 5.0, 20.0});
    CHECK(verdict.pass);
    // envelope dominance at t = 0 for the sampled radii
    CHECK(rep.envelope(1.0, 0.0) >= 1.0 - 1e-9);
}

TEST_CASE("adversarial search returns a replayable reachability witness") {
    auto budget = deterministic_budget();
    budget.max_witness_modes = 4;
    budget.truncations = {8, 16, 32, 64};

    auto sys = catalog("S1", 8);
    auto w = adversarial_search(sys, SearchObjective::BRS, budget);
    REQUIRE(w.has_value());
    CHECK(w->kind == WitnessKind::PeakNorm);
    auto replay = replay_witness(sys.with_truncation(w->truncation), *w);
    CHECK(replay.ok);
    CHECK(replay.measured >= w->bound);
}
