// Acceptance harness: end-to-end checks of the laboratory's headline
// behaviors. Each criterion prints exactly one [PASS]/[FAIL] line; the exit
// code is nonzero when any selected criterion fails. Run with no arguments
// for all criteria, or pass criterion numbers to run a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "isslab/estimate.hpp"
#include "isslab/experiment.hpp"
#include "isslab/gains.hpp"
#include "isslab/integrate.hpp"
#include "isslab/lattice.hpp"
#include "isslab/lyapunov.hpp"
#include "isslab/signals.hpp"
#include "isslab/systems.hpp"

using namespace isslab;
using systems::catalog;
using systems::StateVector;

namespace {

struct CriterionResult {
    bool pass = true;
    std::string detail;
};

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

estimate::EstimationBudget frozen_budget() {
    estimate::EstimationBudget b;
    b.random_states = 0;
    b.random_signals = 0;
    return b;
}

// ---- criterion 1: per-mode threshold crossings of the escaping family ----

CriterionResult criterion1() {
    Timer timer;
    const int n = 20;
    auto sys = catalog("S1", n);
    auto x0 = sys.zero_state();
    for (int k = 1; k <= n; ++k)
        for (int c = 0; c < sys.mode_dim; ++c) x0.mode(k)[c] = sys.mode_witness[c];

    integrate::IntegratorConfig cfg;
    cfg.event_threshold = 1.0;  // mode k is watched at level k
    cfg.event_threshold_scales_with_mode = true;
    auto traj = integrate::trajectory(sys, 1.05, x0, signals::zero_signal(), cfg);

    std::vector<int> missing;
    double t_min = 2.0, t_max = 0.0;
    for (int k = 1; k <= n; ++k) {
        bool found = false;
        for (const auto& e : traj.events) {
            if (e.mode == k && e.time > 0.0 && e.time < 1.0) {
                found = true;
                t_min = std::min(t_min, e.time);
                t_max = std::max(t_max, e.time);
                break;
            }
        }
        if (!found) missing.push_back(k);
    }
    double elapsed = timer.seconds();

    CriterionResult res;
    std::ostringstream out;
    if (missing.empty()) {
        out << "all 20 modes cross their level inside (0,1), times in [" << fmt(t_min) << ", "
            << fmt(t_max) << "]";
    } else {
        res.pass = false;
        out << "no (0,1) crossing for mode";
        for (int k : missing) out << " " << k;
        // diagnose: where does the first missing mode actually cross?
        auto diag = integrate::trajectory(sys, 3.0, x0, signals::zero_signal(), cfg);
        for (const auto& e : diag.events)
            if (e.mode == missing.front()) {
                out << " (starts at " << fmt(x0.mode(missing.front())[0])
                    << ", already above level " << fmt(e.level)
                    << "; first crossing only at t=" << fmt(e.time) << ")";
                break;
            }
        out << "; remaining " << (n - missing.size()) << " modes cross in [" << fmt(t_min)
            << ", " << fmt(t_max) << "]";
    }
    if (elapsed >= 10.0) {
        res.pass = false;
        out << "; runtime " << fmt(elapsed) << "s exceeds 10s";
    } else {
        out << "; runtime " << fmt(elapsed) << "s";
    }
    res.detail = out.str();
    return res;
}

// ---- criterion 2: reach-set sup diverges with the truncation ----

CriterionResult criterion2() {
    auto budget = frozen_budget();
    budget.max_witness_modes = 4;
    double C = std::hypot(systems::mode_escape_threshold(), std::exp(1.0));
    auto rep = estimate::check_brs(catalog("S1", 8), C, 1.0, budget);

    CriterionResult res;
    std::ostringstream out;
    if (rep.verdict != estimate::Verdict::Falsified) {
        res.pass = false;
        out << "expected Falsified, got NoViolationFound";
    } else if (rep.sup_by_truncation.size() != 4) {
        res.pass = false;
        out << "expected 4 truncation rows, got " << rep.sup_by_truncation.size();
    } else {
        out << "Falsified; sup(N):";
        for (const auto& row : rep.sup_by_truncation) {
            out << " " << static_cast<int>(row[0]) << "->" << fmt(row[1]);
            if (row[1] < row[0] * (1.0 - 1e-6)) {
                res.pass = false;
                out << " (below N)";
            }
        }
    }
    res.detail = out.str();
    return res;
}

// ---- criterion 3: slow-mode reach times and global stability of Example1 ----

CriterionResult criterion3() {
    CriterionResult res;
    std::ostringstream out;
    const double ln10 = std::log(10.0);

    auto sys = catalog("Example1", 12);
    auto u2 = signals::constant_signal(2.0);
    double worst_rel = 0.0;
    for (int k = 1; k <= 12; ++k) {
        auto t = estimate::attainment_time(sys, sys.witness_state(k), u2, 0.1,
                                           gains::zero_gain(), 1e4);
        double expect = (1.0 + std::pow(2.0, k)) * ln10;
        if (!t) {
            res.pass = false;
            out << "mode " << k << " never reached the band; ";
            continue;
        }
        worst_rel = std::max(worst_rel, std::abs(*t - expect) / expect);
    }
    if (worst_rel > 0.01) res.pass = false;
    out << "reach times match (1+2^k)ln10, worst relative error " << fmt(worst_rel);

    auto budget = frozen_budget();
    budget.truncations = {12};
    budget.eps_grid = {0.1};
    budget.r_grid = {1.0};
    budget.horizon = 1e4;
    budget.input_levels = {0.0, 2.0};
    budget.random_states = 2;

    auto ulim = estimate::check_limit(sys, estimate::LimitUniformity::ULIM,
                                      gains::zero_gain(), budget);
    if (ulim.verdict != estimate::Verdict::Falsified || ulim.mode_table.size() < 12) {
        res.pass = false;
        out << "; uniform limit check did not falsify over the mode family";
    } else {
        double rmin = 10.0, rmax = 0.0;
        for (std::size_t i = 5; i < ulim.mode_table.size(); ++i) {
            double ratio = ulim.mode_table[i][1] / ulim.mode_table[i - 1][1];
            rmin = std::min(rmin, ratio);
            rmax = std::max(rmax, ratio);
        }
        if (rmin < 1.9 || rmax > 2.1) res.pass = false;
        out << "; time ratios across slow modes in [" << fmt(rmin) << ", " << fmt(rmax) << "]";
    }

    auto ugs_budget = budget;
    ugs_budget.horizon = 20.0;
    auto ugs = estimate::check_stability(sys, estimate::StabilityVariant::UGS, ugs_budget);
    double gmax = 0.0;
    for (const auto& row : ugs.gamma_table) gmax = std::max(gmax, row[1]);
    if (ugs.verdict != estimate::Verdict::NoViolationFound || ugs.gamma_table.empty() ||
        gmax > 1e-6) {
        res.pass = false;
        out << "; global stability check failed (gain estimate " << fmt(gmax) << ")";
    } else {
        out << "; globally stable with zero input response (gain <= " << fmt(gmax) << ")";
    }
    res.detail = out.str();
    return res;
}

// ---- criterion 4: bounded reach sets after rescaling; unbounded zero-input peaks ----

CriterionResult criterion4() {
    Timer timer;
    CriterionResult res;
    std::ostringstream out;
    double C = std::hypot(systems::mode_escape_threshold(), std::exp(1.0));

    auto brs_budget = frozen_budget();
    auto brs = estimate::check_brs(catalog("S1tilde", 8), C, 1.0, brs_budget);
    if (brs.verdict != estimate::Verdict::NoViolationFound ||
        brs.sup_by_truncation.size() != 4) {
        res.pass = false;
        out << "rescaled family unexpectedly diverged";
    } else {
        double s32 = brs.sup_by_truncation[2][1];
        double s64 = brs.sup_by_truncation[3][1];
        if (std::abs(s64 - s32) > 0.05 * s32) res.pass = false;
        out << "rescaled reach sup stable: N=32 -> " << fmt(s32) << ", N=64 -> " << fmt(s64);
    }

    auto ugs_budget = frozen_budget();
    ugs_budget.r_grid = {C};
    ugs_budget.horizon = 25.0;
    auto zs = estimate::check_stability(catalog("S3", 8), estimate::StabilityVariant::ZeroUGS,
                                        ugs_budget);
    if (zs.verdict != estimate::Verdict::Falsified || zs.mode_table.empty()) {
        res.pass = false;
        out << "; cutoff family was not falsified";
    } else {
        bool all_grow = true;
        for (const auto& row : zs.mode_table)
            if (row[1] < row[0] * (1.0 - 1e-9)) all_grow = false;
        if (!all_grow) {
            res.pass = false;
            out << "; some mode peak stayed below its index";
        } else {
            out << "; zero-input peaks exceed every mode index (mode 12 peak "
                << fmt(zs.mode_table[11][1]) << ")";
        }
    }

    double elapsed = timer.seconds();
    if (elapsed >= 60.0) {
        res.pass = false;
        out << "; runtime " << fmt(elapsed) << "s exceeds 60s";
    } else {
        out << "; runtime " << fmt(elapsed) << "s";
    }
    res.detail = out.str();
    return res;
}

// ---- criterion 5: quadratic decrease on the small ball ----

CriterionResult criterion5() {
    auto sys = catalog("S1", 8);
    auto lf = lyap::make_norm_sq_lf();
    Rng base(20240601);
    int violations = 0;
    double worst_margin = -1e300;
    for (int i = 0; i < 200; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        auto x = sys.zero_state();
        for (int k = 1; k <= sys.n_modes; ++k)
            for (int c = 0; c < sys.mode_dim; ++c) x.mode(k)[c] = rng.uniform(-1.0, 1.0);
        double want = rng.uniform(0.02, 0.5);
        double n0 = systems::norm(x);
        for (double& v : x.data) v *= want / n0;

        auto est = lyap::dini_derivative(sys, lf, x, signals::zero_signal());
        double v = lf.V(x);
        double margin = est.value - (-1.425 * v);  // must stay <= 0
        worst_margin = std::max(worst_margin, margin);
        if (margin > 1e-9) ++violations;
    }
    CriterionResult res;
    res.pass = violations == 0;
    res.detail = "200 sampled states in the half-ball, worst decrease margin " +
                 fmt(worst_margin) + (violations ? " with violations" : ", none violating");
    return res;
}

// ---- criterion 6: constructive reach bound from the quadratic certificate ----

CriterionResult criterion6() {
    CriterionResult res;
    std::ostringstream out;
    auto sys = catalog("ScalarISS", 1);
    auto lf = lyap::make_norm_sq_lf();

    auto bound = lyap::nclf_ulim_bound(lf);
    double tau = bound.tau(2.0, 0.5);
    if (std::abs(tau - 40.0) > 1e-12) {
        res.pass = false;
        out << "tau(2, 0.5) = " << fmt(tau) << " != 40";
    } else {
        out << "tau(2, 0.5) = 40 exactly";
    }

    Rng base(31337);
    int integral_ok = 0;
    for (int i = 0; i < 100; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        auto x = sys.zero_state();
        x.mode(1)[0] = rng.uniform(-2.0, 2.0);
        auto u = signals::constant_signal(rng.uniform(-1.0, 1.0));
        double t = rng.uniform(0.1, 5.0);
        if (lyap::verify_integral_inequality(sys, lf, x, u, t).ok) ++integral_ok;
    }
    if (integral_ok != 100) res.pass = false;
    out << "; integral inequality held on " << integral_ok << "/100 sampled runs";

    auto budget = frozen_budget();
    budget.r_grid = {0.5, 1.0, 2.0};
    budget.eps_grid = {0.1, 0.5};
    budget.input_levels = {0.0, 0.5, 1.0};
    budget.random_states = 2;
    auto ver = lyap::verify_ulim_from_nclf(sys, lf, budget);
    if (!ver.ok) {
        res.pass = false;
        out << "; reach-time verification failed: " << ver.note;
    } else {
        bool zero_ok = true;
        for (const auto& c : ver.cases)
            if (c[2] == 0.0 && c[3] > std::log(c[0] / c[1]) + 1e-3) zero_ok = false;
        if (!zero_ok) {
            res.pass = false;
            out << "; an undisturbed case exceeded the direct decay time";
        } else {
            out << "; " << ver.checked
                << " cases within the bound, undisturbed ones within ln(r/eps)+1e-3";
        }
    }
    res.detail = out.str();
    return res;
}

// ---- criterion 7: deductive closure reproduces the reference diagrams ----

struct Arrow {
    std::string label;
    std::vector<std::string> premises;
    std::vector<std::string> conclusions;
};

CriterionResult criterion7() {
    Timer timer;
    CriterionResult res;
    std::ostringstream out;
    const auto& kb = lattice::builtin_kb();

    auto check_arrows = [&](const std::vector<Arrow>& arrows, const lattice::ContextSet& ctx,
                            bool add_standing, std::vector<std::string>& failures) {
        for (const auto& a : arrows) {
            std::set<std::string> facts(a.premises.begin(), a.premises.end());
            if (add_standing) {
                facts.insert("BRS");
                facts.insert("CEP");
            }
            for (const auto& goal : a.conclusions) {
                auto q = lattice::query(kb, facts, goal, ctx);
                if (q.status != lattice::QueryStatus::DerivedYes) {
                    failures.push_back(a.label + " -> " + goal + " (not derived)");
                } else if (!lattice::replay_trace(kb, facts, *q.derivation)) {
                    failures.push_back(a.label + " -> " + goal + " (trace replay failed)");
                }
            }
        }
    };

    // disturbed general diagram, blanket boundedness and continuity assumed
    std::vector<Arrow> general = {
        {"ISS=>UAG", {"ISS"}, {"UAG"}},
        {"UAG=>ISS", {"UAG"}, {"ISS"}},
        {"ULIM&UGS=>UAG", {"ULIM", "UGS"}, {"UAG"}},
        {"UAG=>ULIM&UGS", {"UAG"}, {"ULIM", "UGS"}},
        {"ULIM&ULS=>ULIM&UGS", {"ULIM", "ULS"}, {"ULIM", "UGS"}},
        {"ULIM&UGS=>ULIM&ULS", {"ULIM", "UGS"}, {"ULIM", "ULS"}},
        {"sISS=>sAG&UGS", {"sISS"}, {"sAG", "UGS"}},
        {"sAG&UGS=>sISS", {"sAG", "UGS"}, {"sISS"}},
        {"sLIM&UGS=>sAG&UGS", {"sLIM", "UGS"}, {"sAG", "UGS"}},
        {"sAG&UGS=>sLIM&UGS", {"sAG", "UGS"}, {"sLIM", "UGS"}},
        {"ISS=>sISS", {"ISS"}, {"sISS"}},
        {"sAG&UGS=>AG&UGS", {"sAG", "UGS"}, {"AG", "UGS"}},
        {"AG&UGS=>AG&ULS", {"AG", "UGS"}, {"AG", "ULS"}},
        {"AG&UGS=>LIM&UGS", {"AG", "UGS"}, {"LIM", "UGS"}},
        {"LIM&UGS=>AG&UGS", {"LIM", "UGS"}, {"AG", "UGS"}},
        {"ISS=>AG&0-UGAS", {"ISS"}, {"AG", "0-UGAS"}},
        {"AG&0-UGAS=>AG&0-UAS", {"AG", "0-UGAS"}, {"AG", "0-UAS"}},
        {"AG&0-UAS=>AG&0-ULS", {"AG", "0-UAS"}, {"AG", "0-ULS"}},
        {"AG&0-ULS=>AG&0-GAS", {"AG", "0-ULS"}, {"AG", "0-GAS"}},
        {"AG&0-GAS=>AG&0-ULS", {"AG", "0-GAS"}, {"AG", "0-ULS"}},
        {"AG&ULS=>AG&0-ULS", {"AG", "ULS"}, {"AG", "0-ULS"}},
    };

    // finite-dimensional collapse diagram
    std::vector<Arrow> finite = {
        {"LIM&0-ULS=>LIM&ULS", {"LIM", "0-ULS"}, {"LIM", "ULS"}},
        {"UAG=>AG&0-UGAS", {"UAG"}, {"AG", "0-UGAS"}},
        {"AG&0-UGAS=>AG&LISS", {"AG", "0-UGAS"}, {"AG", "LISS"}},
        {"AG&LISS=>AG&ULS", {"AG", "LISS"}, {"AG", "ULS"}},
        {"AG&ULS=>LIM&0-ULS", {"AG", "ULS"}, {"LIM", "0-ULS"}},
        {"ISS=>UAG", {"ISS"}, {"UAG"}},
        {"LIM&UGS=>AG&UGS", {"LIM", "UGS"}, {"AG", "UGS"}},
        {"LIM&ULS=>LIM&UGS", {"LIM", "ULS"}, {"LIM", "UGS"}},
        {"AG&UGS=>ISS_LF", {"AG", "UGS"}, {"ISS_LF"}},
        {"ISS_LF=>ISS", {"ISS_LF"}, {"ISS"}},
    };

    // undisturbed diagram, blanket boundedness and continuity assumed
    std::vector<Arrow> undisturbed = {
        {"0-UGAS=>0-GATT&0-UAS", {"0-UGAS"}, {"0-GATT", "0-UAS"}},
        {"0-GATT&0-UAS=>0-GATT&0-ULS", {"0-GATT", "0-UAS"}, {"0-GATT", "0-ULS"}},
        {"0-UGATT=>0-GATT&0-UGS", {"0-UGATT"}, {"0-GATT", "0-UGS"}},
        {"0-GATT&0-UGS=>0-GAS", {"0-GATT", "0-UGS"}, {"0-GAS"}},
        {"0-ULIM&0-ULS=>0-UGATT", {"0-ULIM", "0-ULS"}, {"0-UGATT"}},
        {"0-UGATT=>0-ULIM&0-ULS", {"0-UGATT"}, {"0-ULIM", "0-ULS"}},
        {"0-UGAS=>0-UGATT", {"0-UGAS"}, {"0-UGATT"}},
        {"0-UGATT=>0-UGAS", {"0-UGATT"}, {"0-UGAS"}},
        {"LF_coercive=>LF_noncoercive", {"LF_coercive"}, {"LF_noncoercive"}},
        {"LF_noncoercive=>LF_coercive", {"LF_noncoercive"}, {"LF_coercive"}},
        {"0-UGAS=>LF_coercive", {"0-UGAS"}, {"LF_coercive"}},
        {"LF_coercive=>0-UGAS", {"LF_coercive"}, {"0-UGAS"}},
        {"0-GATT&0-UGS=>0-LIM&0-UGS", {"0-GATT", "0-UGS"}, {"0-LIM", "0-UGS"}},
        {"0-LIM&0-UGS=>0-GATT&0-UGS", {"0-LIM", "0-UGS"}, {"0-GATT", "0-UGS"}},
        {"0-GAS=>0-GATT&0-ULS", {"0-GAS"}, {"0-GATT", "0-ULS"}},
        {"0-GATT&0-ULS=>0-GAS", {"0-GATT", "0-ULS"}, {"0-GAS"}},
        {"0-GAS=>0-LIM&0-ULS", {"0-GAS"}, {"0-LIM", "0-ULS"}},
        {"0-LIM&0-ULS=>0-GAS", {"0-LIM", "0-ULS"}, {"0-GAS"}},
    };

    std::vector<std::string> failures;
    check_arrows(general, {lattice::ContextFlag::General}, true, failures);
    check_arrows(finite, {lattice::ContextFlag::FiniteDim}, false, failures);
    check_arrows(undisturbed, {lattice::ContextFlag::NoInput}, true, failures);
    std::size_t arrow_count = general.size() + finite.size() + undisturbed.size();

    // every seeded counterexample must block its non-implication...
    int blocked = 0;
    for (const auto& ni : kb.non_implications) {
        std::set<std::string> facts = ni.premises;
        auto q = lattice::query(kb, facts, ni.non_conclusion, {lattice::ContextFlag::General});
        if (q.status == lattice::QueryStatus::BlockedNo) {
            ++blocked;
        } else {
            failures.push_back("non-implication for witness " + ni.witness + " not blocked");
        }
        // ...and must be consistent with the closure of its own premises
        auto conflicts = lattice::consistency_check(kb, facts, {ni.non_conclusion},
                                                    {lattice::ContextFlag::General});
        if (!conflicts.empty())
            failures.push_back("witness " + ni.witness + " conflicts with the rule base");
    }
    if (blocked < 6) failures.push_back("fewer than 6 blocked non-implications");

    // open questions must stay open
    for (const auto& open : std::vector<std::pair<std::set<std::string>, std::string>>{
             {{"AG", "UGS"}, "sAG"}, {{"AG", "0-ULS"}, "ULS"}}) {
        auto q = lattice::query(kb, open.first, open.second, {lattice::ContextFlag::General});
        if (q.status != lattice::QueryStatus::Unknown)
            failures.push_back("open question " + open.second + " did not stay Unknown");
    }

    // the known counterexample profile produces no conflicts
    auto clean = lattice::consistency_check(kb, {"0-UGAS", "sAG", "AG", "UGS", "LISS"},
                                            {"ISS", "ULIM"}, {lattice::ContextFlag::General});
    if (!clean.empty()) failures.push_back("counterexample profile raised a conflict");

    double elapsed = timer.seconds();
    res.pass = failures.empty() && elapsed < 1.0;
    if (failures.empty()) {
        out << arrow_count << " diagram arrows derived with replayable traces, " << blocked
            << " non-implications blocked, open questions stay Unknown";
    } else {
        out << failures.size() << " failures:";
        for (std::size_t i = 0; i < failures.size() && i < 4; ++i) out << " [" << failures[i] << "]";
    }
    out << "; runtime " << fmt(elapsed) << "s";
    res.detail = out.str();
    return res;
}

// ---- criterion 8: semigroup axioms hold numerically across the catalog ----

CriterionResult criterion8() {
    CriterionResult res;
    std::ostringstream out;
    double worst = 0.0;
    std::string worst_id;
    for (const auto& id : systems::catalog_ids()) {
        auto sys = catalog(id, 6);
        auto samples = integrate::make_axiom_samples(sys, 100, 20240601);
        for (const auto& s : samples) {
            auto d = integrate::check_axioms(sys, s);
            double local = std::max({d.identity, d.cocycle, d.causality});
            if (local > worst) {
                worst = local;
                worst_id = id;
            }
        }
    }
    res.pass = worst <= 1e-8;
    out << "100 samples per catalog system, worst axiom defect " << fmt(worst) << " ("
        << worst_id << ")" << (res.pass ? " within 1e-8" : " exceeds 1e-8");
    res.detail = out.str();
    return res;
}

// ---- criterion 9: comparison-function toolbox invariants ----

CriterionResult criterion9() {
    CriterionResult res;
    std::ostringstream out;
    Rng base(555000111);

    int split_ok = 0;
    for (int i = 0; i < 1000; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        gains::ScalarGainFunction alpha;
        switch (i % 3) {
            case 0: alpha = gains::power_gain(rng.uniform(0.1, 3.0), rng.uniform(0.5, 3.0)); break;
            case 1: alpha = gains::saturation_gain(rng.uniform(0.1, 5.0)); break;
            default: alpha = gains::power_gain(rng.uniform(0.5, 2.0), 1.0); break;
        }
        double a = rng.uniform(0.0, 50.0);
        double b = rng.uniform(0.0, 50.0);
        if (gains::split_lower_bound_check(alpha, a, b)) ++split_ok;
    }
    if (split_ok != 1000) res.pass = false;
    out << "split inequality held on " << split_ok << "/1000 samples";

    int inverse_ok = 0;
    const double tol = 1e-9;
    for (int i = 0; i < 200; ++i) {
        Rng rng = base.fork(777000 + static_cast<std::uint64_t>(i));
        auto f = (i % 2 == 0) ? gains::power_gain(rng.uniform(0.2, 2.0), rng.uniform(0.5, 3.0))
                              : gains::saturation_gain(rng.uniform(0.5, 5.0));
        double s = rng.uniform(0.0, 100.0);
        double y = gains::eval(f, s);
        if (y <= 0.0) {
            ++inverse_ok;  // zero maps to zero; nothing to invert
            continue;
        }
        double si = gains::inverse(f, y, tol);
        if (std::abs(gains::eval(f, si) - y) <= 2.0 * tol * std::max(1.0, y)) ++inverse_ok;
    }
    if (inverse_ok != 200) res.pass = false;
    out << "; inverse round-trip held on " << inverse_ok << "/200 samples";

    std::vector<double> r_grid, t_grid;
    for (int i = 0; i < 20; ++i) {
        r_grid.push_back(0.01 * std::pow(10.0 / 0.01, i / 19.0));
        t_grid.push_back(20.0 * i / 19.0);
    }
    std::vector<gains::KLSample> samples;
    for (double r : r_grid)
        for (double t : t_grid) samples.push_back({r, t, r * std::exp(-t)});
    auto beta = gains::kl_envelope_fit(samples);
    auto verdict = gains::verify_kl_grid(beta, r_grid, t_grid);
    bool dominated = true;
    for (const auto& s : samples)
        if (beta(s.r, s.t) < s.value - 1e-12) dominated = false;
    if (!verdict.pass || !dominated) res.pass = false;
    out << "; fitted envelope " << (verdict.pass ? "passes" : "fails")
        << " the 20x20 class check and " << (dominated ? "dominates" : "misses")
        << " all samples";
    res.detail = out.str();
    return res;
}

}  // namespace

int main(int argc, char** argv) {
    std::map<int, std::function<CriterionResult()>> criteria = {
        {1, criterion1}, {2, criterion2}, {3, criterion3},
        {4, criterion4}, {5, criterion5}, {6, criterion6},
        {7, criterion7}, {8, criterion8}, {9, criterion9},
    };

    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        int n = std::atoi(argv[i]);
        if (!criteria.count(n)) {
            std::fprintf(stderr, "unknown criterion '%s'\n", argv[i]);
            return 2;
        }
        selected.push_back(n);
    }
    if (selected.empty())
        for (const auto& [n, fn] : criteria) selected.push_back(n);

    bool all_pass = true;
    for (int n : selected) {
        auto res = criteria.at(n)();
        std::printf("[%s] criterion %d: %s\n", res.pass ? "PASS" : "FAIL", n,
                    res.detail.c_str());
        std::fflush(stdout);
        if (!res.pass) all_pass = false;
    }
    return all_pass ? 0 : 1;
}
