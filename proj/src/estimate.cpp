#include "isslab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace isslab::estimate {

using integrate::IntegratorConfig;
using integrate::Trajectory;
using signals::InputSignal;
using systems::StateVector;
using systems::TruncatedModeSystem;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

StateVector scaled_to(const StateVector& x, double r) {
    double n = systems::norm(x);
    StateVector out = x;
    if (n <= 0.0) return out;
    for (double& v : out.data) v *= r / n;
    return out;
}

// Mode indices probed by witness families: a prefix plus the final mode.
std::vector<int> mode_scan(const TruncatedModeSystem& sys, int cap) {
    std::vector<int> ks;
    int upto = std::min(sys.n_modes, cap);
    for (int k = 1; k <= upto; ++k) ks.push_back(k);
    if (sys.n_modes > upto) ks.push_back(sys.n_modes);
    return ks;
}

struct Sample {
    StateVector x0;
    std::string x0_spec;
};

std::vector<Sample> state_family(const TruncatedModeSystem& sys, double r,
                                 const EstimationBudget& budget, std::uint64_t salt) {
    std::vector<Sample> out;
    if (r <= 0.0) return out;
    for (int k : mode_scan(sys, budget.max_witness_modes)) {
        StateVector x = scaled_to(sys.witness_state(k), r);
        out.push_back({x, systems::format_state(x)});
    }
    Rng base(budget.seed ^ (0xABCD1234u + salt));
    for (int i = 0; i < budget.random_states; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        StateVector x = sys.zero_state();
        bool dense = (i % 2 == 1);
        int active = dense ? sys.n_modes : std::min(sys.n_modes, rng.uniform_int(1, 3));
        for (int a = 0; a < active; ++a) {
            int k = dense ? a + 1 : rng.uniform_int(1, sys.n_modes);
            for (int c = 0; c < sys.mode_dim; ++c) x.mode(k)[c] = rng.uniform(-1.0, 1.0);
        }
        if (systems::norm(x) <= 0.0) x.mode(1)[0] = 1.0;
        x = scaled_to(x, r);
        out.push_back({x, systems::format_state(x)});
    }
    return out;
}

struct InputChoice {
    InputSignal u;
    std::string u_spec;
};

std::vector<InputChoice> input_family(const TruncatedModeSystem& sys,
                                      const EstimationBudget& budget, double level_cap,
                                      std::uint64_t salt) {
    std::vector<InputChoice> out;
    if (sys.input_free) {
        auto z = signals::zero_signal();
        out.push_back({z, signals::format_signal(z)});
        return out;
    }
    bool has_zero = false;
    for (double v : budget.input_levels) {
        if (std::abs(v) > level_cap + 1e-15) continue;
        if (v == 0.0) has_zero = true;
        auto u = signals::constant_signal(v);
        out.push_back({u, signals::format_signal(u)});
    }
    if (!has_zero) {
        auto z = signals::zero_signal();
        out.push_back({z, signals::format_signal(z)});
    }
    Rng base(budget.seed ^ (0x5151AAAAu + salt));
    double cap = std::min(budget.input_cap, level_cap);
    for (int i = 0; i < budget.random_signals && cap > 0.0; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        int switches = rng.uniform_int(1, std::max(1, budget.max_switches));
        std::vector<std::pair<double, double>> steps{{0.0, rng.uniform(-cap, cap)}};
        double t = 0.0;
        for (int s = 0; s < switches; ++s) {
            t += rng.uniform(0.05, std::max(0.1, budget.horizon / 4.0));
            steps.emplace_back(t, rng.uniform(-cap, cap));
        }
        auto u = signals::step_signal(steps, 4.0 * budget.horizon + t);
        out.push_back({u, signals::format_signal(u)});
    }
    return out;
}

// All successive ratios >= 1.5 over at least four entries.
bool diverging_across_truncations(const std::vector<double>& vals) {
    if (vals.size() < 4) return false;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        if (vals[i] <= 0.0) return false;
        if (vals[i + 1] / vals[i] < 1.5) return false;
    }
    return true;
}

// The last four successive ratios all >= 1.5 (mode-indexed families).
bool diverging_mode_tail(const std::vector<double>& vals) {
    if (vals.size() < 5) return false;
    for (std::size_t i = vals.size() - 5; i + 1 < vals.size(); ++i) {
        if (vals[i] <= 0.0) return false;
        if (vals[i + 1] / vals[i] < 1.5) return false;
    }
    return true;
}

struct PeakInfo {
    double value = 0.0;
    double time = 0.0;
};

PeakInfo peak_with_time(const Trajectory& traj) {
    PeakInfo p;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        double n = systems::norm(traj.states[i]);
        if (n > p.value) {
            p.value = n;
            p.time = traj.times[i];
        }
    }
    return p;
}

double target_level(double eps, const gains::ScalarGainFunction& gamma, const InputSignal& u) {
    double g = gamma.is_zero() ? 0.0 : gains::eval(gamma, signals::sup_norm(u));
    return eps + g;
}

// First time from which the whole stored tail stays at or below the target.
std::optional<double> tail_attainment(const Trajectory& traj, double target) {
    if (traj.size() == 0) return std::nullopt;
    std::vector<double> sufmax(traj.size());
    double m = 0.0;
    for (std::size_t i = traj.size(); i-- > 0;) {
        m = std::max(m, systems::norm(traj.states[i]));
        sufmax[i] = m;
    }
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (sufmax[i] <= target) return traj.times[i];
    return std::nullopt;
}

// Norm floor over the stored window [a, b].
double min_norm_in(const Trajectory& traj, double a, double b, double* argmin = nullptr) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.size(); ++i) {
        if (traj.times[i] < a || traj.times[i] > b) continue;
        double n = systems::norm(traj.states[i]);
        if (n < m) {
            m = n;
            if (argmin) *argmin = traj.times[i];
        }
    }
    return m;
}

Witness make_witness(const TruncatedModeSystem& sys, const Sample& s, const InputChoice& u,
                     double time, double measured, double bound, WitnessKind kind,
                     const std::string& note) {
    Witness w;
    w.system_id = sys.catalog_id;
    w.truncation = sys.n_modes;
    w.x0_spec = s.x0_spec;
    w.u_spec = u.u_spec;
    w.time = time;
    w.measured = measured;
    w.bound = bound;
    w.kind = kind;
    w.note = note;
    return w;
}

std::vector<int> usable_truncations(const TruncatedModeSystem& sys,
                                    const EstimationBudget& budget) {
    if (sys.catalog_id == "ScalarISS") return {1};
    std::vector<int> ns = budget.truncations;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.empty()) ns.push_back(std::max(1, sys.n_modes));
    return ns;
}

}  // namespace

std::optional<double> attainment_time(const TruncatedModeSystem& sys, const StateVector& x0,
                                      const InputSignal& u, double eps,
                                      const gains::ScalarGainFunction& gamma, double T,
                                      const IntegratorConfig& cfg) {
    if (eps <= 0.0) throw DomainError("attainment tolerance must be positive");
    double target = target_level(eps, gamma, u);
    if (systems::norm(x0) <= target) return 0.0;
    auto traj = integrate::trajectory(sys, T, x0, u, cfg);
    return integrate::first_norm_attainment(traj, target);
}

EstimationReport check_brs(const TruncatedModeSystem& sys, double C, double tau,
                           const EstimationBudget& budget, const IntegratorConfig& cfg) {
    if (C <= 0.0 || tau <= 0.0) throw DomainError("reach-set check needs C, tau > 0");
    EstimationReport rep;
    rep.property = "BRS";
    rep.budget = budget;

    struct Best {
        double sup = 0.0;
        double time = 0.0;
        Sample s;
        InputChoice u;
    };
    std::vector<double> sups;
    Best last_best;
    bool escaped = false;

    for (int N : usable_truncations(sys, budget)) {
        auto sysN = sys.with_truncation(N);
        auto states = state_family(sysN, C, budget, 11);
        auto inputs = input_family(sysN, budget, C, 11);
        Best best;
        for (const auto& s : states) {
            for (const auto& in : inputs) {
                try {
                    auto traj = integrate::trajectory(sysN, tau, s.x0, in.u, cfg);
                    auto p = peak_with_time(traj);
                    if (p.value > best.sup) best = {p.value, p.time, s, in};
                } catch (const BlowUpError& e) {
                    escaped = true;
                    if (cfg.hard_state_cap > best.sup)
                        best = {cfg.hard_state_cap, e.time, s, in};
                }
            }
        }
        sups.push_back(best.sup);
        rep.sup_by_truncation.push_back({static_cast<double>(N), best.sup});
        last_best = best;
    }
    if (escaped)
        rep.notes += "inconclusive: numerical escape hit the hard state cap on some samples; ";

    if (diverging_across_truncations(sups)) {
        rep.verdict = Verdict::Falsified;
        double prev = sups[sups.size() - 2];
        auto sysN = sys.with_truncation(static_cast<int>(rep.sup_by_truncation.back()[0]));
        rep.witness = make_witness(
            sysN, last_best.s, last_best.u, last_best.time, last_best.sup, prev,
            WitnessKind::PeakNorm,
            "sup over the C-ball grew by >= 1.5x per truncation doubling (C=" + num(C) + ")");
        rep.notes += "reach-set sup diverges along the truncation family";
    } else {
        rep.notes += "sup stable across sampled truncations (budget-relative)";
    }
    return rep;
}

EstimationReport check_stability(const TruncatedModeSystem& sys, StabilityVariant variant,
                                 const EstimationBudget& budget, const IntegratorConfig& cfg) {
    EstimationReport rep;
    rep.budget = budget;
    bool zero_input = sys.input_free || variant == StabilityVariant::ZeroULS ||
                      variant == StabilityVariant::ZeroUGS;
    switch (variant) {
        case StabilityVariant::ULS: rep.property = "ULS"; break;
        case StabilityVariant::UGS: rep.property = "UGS"; break;
        case StabilityVariant::UGB: rep.property = "UGB"; break;
        case StabilityVariant::ZeroULS: rep.property = "0-ULS"; break;
        case StabilityVariant::ZeroUGS: rep.property = "0-UGS"; break;
    }

    auto ns = usable_truncations(sys, budget);

    if (variant == StabilityVariant::ULS || variant == StabilityVariant::ZeroULS) {
        auto sysN = sys.with_truncation(ns.back());
        bool first = true;
        for (double eps : budget.eps_grid) {
            double found = -1.0;
            std::optional<Witness> smallest_violation;
            for (int j = 0; j <= 8; ++j) {
                double delta = eps / std::pow(2.0, j);
                bool ok = true;
                for (double rr : {delta, delta / 2.0}) {
                    auto states = state_family(sysN, rr, budget, 23 + j);
                    auto inputs = zero_input
                                      ? input_family(sysN, budget, 0.0, 23)
                                      : input_family(sysN, budget, delta, 23 + j);
                    for (const auto& s : states) {
                        for (const auto& in : inputs) {
                            auto traj =
                                integrate::trajectory(sysN, budget.horizon, s.x0, in.u, cfg);
                            auto p = peak_with_time(traj);
                            if (p.value > eps * (1.0 + 1e-9)) {
                                ok = false;
                                smallest_violation = make_witness(
                                    sysN, s, in, p.time, p.value, eps, WitnessKind::PeakNorm,
                                    "left the eps-ball from delta=" + num(delta));
                            }
                            if (!ok) break;
                        }
                        if (!ok) break;
                    }
                    if (!ok) break;
                }
                if (ok) {
                    found = delta;
                    break;
                }
            }
            rep.sigma_table.push_back({eps, std::max(found, 0.0)});
            if (first) {
                rep.delta_hat = std::max(found, 0.0);
                first = false;
            }
            if (found < 0.0) {
                rep.verdict = Verdict::Falsified;
                rep.witness = smallest_violation;
                rep.notes = "no sampled delta kept trajectories inside eps=" + num(eps);
                return rep;
            }
        }
        rep.notes = "eps-delta table sampled on a geometric delta grid (budget-relative)";
        return rep;
    }

    // global variants: fit sigma over radii per truncation and ratio-test columns
    std::vector<double> radii = budget.r_grid;
    double natural = systems::norm(sys.witness_state(1));
    radii.push_back(natural);
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

    struct Cell {
        double sup = 0.0;
        double time = 0.0;
        Sample s;
        InputChoice u;
    };
    std::vector<std::vector<Cell>> table(ns.size());  // [trunc][radius]
    bool escaped = false;
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        auto sysN = sys.with_truncation(ns[ni]);
        auto inputs = input_family(sysN, budget, 0.0, 31);  // u = 0 family for sigma
        for (double r : radii) {
            Cell cell;
            auto states = state_family(sysN, r, budget, 31);
            for (const auto& s : states) {
                for (const auto& in : inputs) {
                    try {
                        auto traj = integrate::trajectory(sysN, budget.horizon, s.x0, in.u, cfg);
                        auto p = peak_with_time(traj);
                        if (p.value > cell.sup) cell = {p.value, p.time, s, in};
                    } catch (const BlowUpError& e) {
                        escaped = true;
                        if (cfg.hard_state_cap > cell.sup)
                            cell = {cfg.hard_state_cap, e.time, s, in};
                    }
                }
            }
            table[ni].push_back(cell);
        }
    }
    if (escaped) rep.notes += "inconclusive: numerical escape on some samples; ";

    // gamma response at the origin for input variants
    if (!zero_input) {
        auto sysN = sys.with_truncation(ns.back());
        double gmax = 0.0;
        for (double level : budget.input_levels) {
            if (std::abs(level) > budget.input_cap + 1e-15) continue;
            auto u = signals::constant_signal(level);
            auto traj = integrate::trajectory(sysN, budget.horizon, sysN.zero_state(), u, cfg);
            gmax = std::max(gmax, peak_with_time(traj).value);
            rep.gamma_table.push_back({std::abs(level), gmax});
        }
    }

    // monotone sigma from the largest truncation
    double run = 0.0;
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        run = std::max(run, table.back()[ri].sup);
        rep.sigma_table.push_back({radii[ri], run});
    }
    for (std::size_t ni = 0; ni < ns.size(); ++ni) {
        double worst = 0.0;
        for (const auto& c : table[ni]) worst = std::max(worst, c.sup);
        rep.sup_by_truncation.push_back({static_cast<double>(ns[ni]), worst});
    }

    // per-mode measured peaks at the witness radius, largest truncation
    {
        auto sysN = sys.with_truncation(ns.back());
        auto inputs = input_family(sysN, budget, 0.0, 31);
        for (int k : mode_scan(sysN, budget.max_witness_modes)) {
            StateVector x = sysN.witness_state(k);
            double best = 0.0;
            for (const auto& in : inputs) {
                try {
                    auto traj = integrate::trajectory(sysN, budget.horizon, x, in.u, cfg);
                    best = std::max(best, peak_with_time(traj).value);
                } catch (const BlowUpError&) {
                    escaped = true;
                    best = std::max(best, cfg.hard_state_cap);
                }
            }
            rep.mode_table.push_back({static_cast<double>(k), best});
        }
    }

    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
        std::vector<double> col;
        for (std::size_t ni = 0; ni < ns.size(); ++ni) col.push_back(table[ni][ri].sup);
        if (diverging_across_truncations(col)) {
            rep.verdict = Verdict::Falsified;
            const Cell& c = table.back()[ri];
            auto sysN = sys.with_truncation(ns.back());
            rep.witness = make_witness(
                sysN, c.s, c.u, c.time, c.sup, col[col.size() - 2], WitnessKind::PeakNorm,
                "zero-input sup at radius " + num(radii[ri]) +
                    " grew by >= 1.5x per truncation doubling");
            rep.notes += "stability envelope diverges along the truncation family";
            return rep;
        }
    }
    rep.notes += "fitted envelopes stable across sampled truncations (budget-relative)";
    return rep;
}

namespace {

struct FamilyMeasurement {
    std::vector<double> values;  // per-mode measured quantity (attained prefix)
    std::vector<int> modes;
    Sample last_sample;
    InputChoice last_input;
    double last_target = 0.0;
};

}  // namespace

EstimationReport check_limit(const TruncatedModeSystem& sys, LimitUniformity uniformity,
                             const gains::ScalarGainFunction& gamma,
                             const EstimationBudget& budget, const IntegratorConfig& cfg) {
    EstimationReport rep;
    rep.budget = budget;
    rep.property = uniformity == LimitUniformity::LIM    ? "LIM"
                   : uniformity == LimitUniformity::sLIM ? "sLIM"
                                                         : "ULIM";
    auto ns = usable_truncations(sys, budget);
    double eps_ref = *std::min_element(budget.eps_grid.begin(), budget.eps_grid.end());
    double r_ref = budget.r_grid.front();
    for (double r : budget.r_grid)
        if (std::abs(r - 1.0) < std::abs(r_ref - 1.0)) r_ref = r;

    auto sysL = sys.with_truncation(ns.back());
    auto inputs = input_family(sysL, budget, budget.input_cap, 41);

    bool unattained_decaying = false;

    auto measure = [&](const TruncatedModeSystem& sysN, const Sample& s, const InputChoice& in,
                       double eps) -> std::pair<std::optional<double>, double> {
        double target = target_level(eps, gamma, in.u);
        if (systems::norm(s.x0) <= target) return {0.0, target};
        auto traj = integrate::trajectory(sysN, budget.horizon, s.x0, in.u, cfg);
        auto t = integrate::first_norm_attainment(traj, target);
        if (!t) {
            // distinguish "no approach" from "not yet": compare norm floors
            double early = min_norm_in(traj, 0.0, budget.horizon / 2.0);
            double t_arg = budget.horizon;
            double late = min_norm_in(traj, budget.horizon / 2.0, budget.horizon, &t_arg);
            if (late > target && late >= 0.99 * early) {
                rep.verdict = Verdict::Falsified;
                rep.witness = make_witness(sysN, s, in, t_arg, late, target,
                                           WitnessKind::NormAtTime,
                                           "norm floor never approaches the target band");
            } else {
                unattained_decaying = true;
            }
        }
        return {t, target};
    };

    if (uniformity == LimitUniformity::sLIM) {
        // fixed state, uniformity over inputs only
        for (int k : mode_scan(sysL, budget.max_witness_modes)) {
            Sample s{scaled_to(sysL.witness_state(k), r_ref),
                     systems::format_state(scaled_to(sysL.witness_state(k), r_ref))};
            for (double eps : budget.eps_grid) {
                double worst = 0.0;
                for (const auto& in : inputs) {
                    auto [t, target] = measure(sysL, s, in, eps);
                    if (rep.verdict == Verdict::Falsified) return rep;
                    if (t) worst = std::max(worst, *t);
                }
                rep.tau_table.push_back({eps, systems::norm(s.x0), worst});
            }
        }
        rep.notes = "per-state input-uniform times; input magnitudes capped by budget at " +
                    num(budget.input_cap);
        return rep;
    }

    if (uniformity == LimitUniformity::LIM) {
        for (double r : budget.r_grid) {
            auto states = state_family(sysL, r, budget, 43);
            for (double eps : budget.eps_grid) {
                double worst = 0.0;
                for (const auto& s : states) {
                    for (const auto& in : inputs) {
                        auto [t, target] = measure(sysL, s, in, eps);
                        if (rep.verdict == Verdict::Falsified) return rep;
                        if (t) worst = std::max(worst, *t);
                    }
                }
                rep.tau_table.push_back({eps, r, worst});
            }
        }
        rep.notes = unattained_decaying
                        ? "some samples still decaying at the horizon; no growth evidence "
                          "(budget-relative)"
                        : "every sampled pair attained its band (budget-relative)";
        return rep;
    }

    // ULIM: uniform over states and inputs; two divergence scans
    for (double r : budget.r_grid) {
        auto states = state_family(sysL, r, budget, 47);
        for (double eps : budget.eps_grid) {
            double worst = 0.0;
            for (const auto& s : states) {
                for (const auto& in : inputs) {
                    auto [t, target] = measure(sysL, s, in, eps);
                    if (rep.verdict == Verdict::Falsified) return rep;
                    if (t) worst = std::max(worst, *t);
                }
            }
            rep.tau_table.push_back({eps, r, worst});
        }
    }
    // monotone in r (nested balls)
    for (double eps : budget.eps_grid) {
        double run = 0.0;
        for (auto& row : rep.tau_table)
            if (row[0] == eps) {
                run = std::max(run, row[2]);
                row[2] = run;
            }
    }

    // mode-indexed witness family at the reference cell
    FamilyMeasurement fam;
    for (int k : mode_scan(sysL, budget.max_witness_modes)) {
        Sample s{scaled_to(sysL.witness_state(k), r_ref),
                 systems::format_state(scaled_to(sysL.witness_state(k), r_ref))};
        double worst = -1.0;
        InputChoice worst_in;
        for (const auto& in : inputs) {
            auto [t, target] = measure(sysL, s, in, eps_ref);
            if (rep.verdict == Verdict::Falsified) return rep;
            if (t && *t > worst) {
                worst = *t;
                worst_in = in;
                fam.last_target = target;
            }
        }
        if (worst < 0.0) break;  // family unattained from here on
        fam.values.push_back(worst);
        fam.modes.push_back(k);
        fam.last_sample = s;
        fam.last_input = worst_in;
        rep.mode_table.push_back({static_cast<double>(k), worst});
    }
    if (diverging_mode_tail(fam.values)) {
        rep.verdict = Verdict::Falsified;
        auto& t_last = fam.values.back();
        rep.witness = make_witness(
            sysL, fam.last_sample, fam.last_input, t_last, t_last, fam.last_target,
            WitnessKind::AttainmentTime,
            "attainment times along the mode family keep growing by >= 1.5x per mode");
        rep.notes = "time-to-band diverges along the mode-indexed witness family";
        return rep;
    }

    // truncation-indexed scan at the reference cell
    std::vector<double> tau_by_n;
    Sample trunc_sample;
    InputChoice trunc_input;
    double trunc_target = 0.0;
    bool trunc_complete = true;
    for (int N : ns) {
        auto sysN = sys.with_truncation(N);
        auto states = state_family(sysN, r_ref, budget, 53);
        auto inputsN = input_family(sysN, budget, budget.input_cap, 53);
        double worst = -1.0;
        for (const auto& s : states) {
            for (const auto& in : inputsN) {
                auto [t, target] = measure(sysN, s, in, eps_ref);
                if (rep.verdict == Verdict::Falsified) return rep;
                if (t && *t > worst) {
                    worst = *t;
                    trunc_sample = s;
                    trunc_input = in;
                    trunc_target = target;
                }
            }
        }
        if (worst < 0.0) {
            trunc_complete = false;
            break;
        }
        tau_by_n.push_back(worst);
        rep.sup_by_truncation.push_back({static_cast<double>(N), worst});
    }
    if (trunc_complete && diverging_across_truncations(tau_by_n)) {
        rep.verdict = Verdict::Falsified;
        auto sysN = sys.with_truncation(ns.back());
        rep.witness = make_witness(
            sysN, trunc_sample, trunc_input, tau_by_n.back(), tau_by_n.back(), trunc_target,
            WitnessKind::AttainmentTime,
            "attainment time at fixed (eps, r) grew by >= 1.5x per truncation doubling");
        rep.notes = "time-to-band diverges along the truncation family";
        return rep;
    }

    rep.notes = unattained_decaying
                    ? "no divergence detected; some samples still decaying at the horizon "
                      "(budget-relative)"
                    : "no divergence detected (budget-relative)";
    return rep;
}

EstimationReport check_ag(const TruncatedModeSystem& sys, AgUniformity uniformity,
                          const gains::ScalarGainFunction& gamma, const EstimationBudget& budget,
                          const IntegratorConfig& cfg) {
    EstimationReport rep;
    rep.budget = budget;
    rep.property = uniformity == AgUniformity::AG ? "AG" : uniformity == AgUniformity::sAG ? "sAG" : "UAG";
    auto ns = usable_truncations(sys, budget);
    double eps_ref = *std::min_element(budget.eps_grid.begin(), budget.eps_grid.end());
    double r_ref = budget.r_grid.front();
    for (double r : budget.r_grid)
        if (std::abs(r - 1.0) < std::abs(r_ref - 1.0)) r_ref = r;

    auto sysL = sys.with_truncation(ns.back());
    auto inputs = input_family(sysL, budget, budget.input_cap, 61);
    bool unattained_decaying = false;

    auto measure = [&](const TruncatedModeSystem& sysN, const Sample& s, const InputChoice& in,
                       double eps) -> std::pair<std::optional<double>, double> {
        double target = target_level(eps, gamma, in.u);
        auto traj = integrate::trajectory(sysN, budget.horizon, s.x0, in.u, cfg);
        auto t = tail_attainment(traj, target);
        if (!t) {
            double early = min_norm_in(traj, 0.0, budget.horizon / 2.0);
            double t_arg = budget.horizon;
            double late = min_norm_in(traj, budget.horizon / 2.0, budget.horizon, &t_arg);
            if (late > target && late >= 0.99 * early) {
                rep.verdict = Verdict::Falsified;
                rep.witness = make_witness(sysN, s, in, t_arg, late, target,
                                           WitnessKind::NormAtTime,
                                           "tail norm never settles into the gain band");
            } else {
                unattained_decaying = true;
            }
        }
        return {t, target};
    };

    if (uniformity == AgUniformity::AG || uniformity == AgUniformity::sAG) {
        for (int k : mode_scan(sysL, budget.max_witness_modes)) {
            Sample s{scaled_to(sysL.witness_state(k), r_ref),
                     systems::format_state(scaled_to(sysL.witness_state(k), r_ref))};
            for (double eps : budget.eps_grid) {
                double worst = 0.0;
                for (const auto& in : inputs) {
                    auto [t, target] = measure(sysL, s, in, eps);
                    if (rep.verdict == Verdict::Falsified) return rep;
                    if (t) worst = std::max(worst, *t);
                }
                rep.tau_table.push_back({eps, systems::norm(s.x0), worst});
            }
        }
        rep.notes = unattained_decaying
                        ? "tails still settling at the horizon on some samples (budget-relative)"
                        : "every sampled tail settled (budget-relative)";
        return rep;
    }

    // UAG: mode family + truncation scans, tail semantics
    FamilyMeasurement fam;
    for (int k : mode_scan(sysL, budget.max_witness_modes)) {
        Sample s{scaled_to(sysL.witness_state(k), r_ref),
                 systems::format_state(scaled_to(sysL.witness_state(k), r_ref))};
        double worst = -1.0;
        InputChoice worst_in;
        for (const auto& in : inputs) {
            auto [t, target] = measure(sysL, s, in, eps_ref);
            if (rep.verdict == Verdict::Falsified) return rep;
            if (t && *t > worst) {
                worst = *t;
                worst_in = in;
                fam.last_target = target;
            }
        }
        if (worst < 0.0) break;
        fam.values.push_back(worst);
        fam.modes.push_back(k);
        fam.last_sample = s;
        fam.last_input = worst_in;
        rep.mode_table.push_back({static_cast<double>(k), worst});
    }
    if (diverging_mode_tail(fam.values)) {
        rep.verdict = Verdict::Falsified;
        rep.witness = make_witness(sysL, fam.last_sample, fam.last_input, fam.values.back(),
                                   fam.values.back(), fam.last_target,
                                   WitnessKind::AttainmentTime,
                                   "tail settle times keep growing by >= 1.5x per mode");
        rep.notes = "settle time diverges along the mode-indexed witness family";
        return rep;
    }

    std::vector<double> tau_by_n;
    Sample trunc_sample;
    InputChoice trunc_input;
    double trunc_target = 0.0;
    bool trunc_complete = true;
    for (int N : ns) {
        auto sysN = sys.with_truncation(N);
        auto states = state_family(sysN, r_ref, budget, 67);
        auto inputsN = input_family(sysN, budget, budget.input_cap, 67);
        double worst = -1.0;
        for (const auto& s : states) {
            for (const auto& in : inputsN) {
                auto [t, target] = measure(sysN, s, in, eps_ref);
                if (rep.verdict == Verdict::Falsified) return rep;
                if (t && *t > worst) {
                    worst = *t;
                    trunc_sample = s;
                    trunc_input = in;
                    trunc_target = target;
                }
            }
        }
        if (worst < 0.0) {
            trunc_complete = false;
            break;
        }
        tau_by_n.push_back(worst);
        rep.sup_by_truncation.push_back({static_cast<double>(N), worst});
    }
    if (trunc_complete && diverging_across_truncations(tau_by_n)) {
        rep.verdict = Verdict::Falsified;
        auto sysN = sys.with_truncation(ns.back());
        rep.witness = make_witness(sysN, trunc_sample, trunc_input, tau_by_n.back(),
                                   tau_by_n.back(), trunc_target, WitnessKind::AttainmentTime,
                                   "tail settle time at fixed (eps, r) grew by >= 1.5x per "
                                   "truncation doubling");
        rep.notes = "settle time diverges along the truncation family";
        return rep;
    }
    rep.notes = unattained_decaying
                    ? "no divergence detected; tails still settling at the horizon "
                      "(budget-relative)"
                    : "no divergence detected (budget-relative)";
    return rep;
}

EstimationReport fit_iss_bound(const TruncatedModeSystem& sys, const EstimationBudget& budget,
                               const IntegratorConfig& cfg) {
    EstimationReport rep;
    rep.property = "ISS-bound";
    rep.budget = budget;
    auto ns = usable_truncations(sys, budget);
    double T = budget.horizon;
    std::vector<double> t_grid;
    for (int i = 0; i <= 8; ++i) t_grid.push_back(T * i / 8.0);

    std::vector<double> levels{0.0};
    if (!sys.input_free)
        for (double v : budget.input_levels)
            if (v != 0.0 && std::abs(v) <= budget.input_cap + 1e-15) levels.push_back(v);

    // input-gain tail estimate from the smallest radius, largest truncation
    auto sysL = sys.with_truncation(ns.back());
    double r_min = *std::min_element(budget.r_grid.begin(), budget.r_grid.end());
    double run_gamma = 0.0;
    std::vector<std::pair<double, double>> gamma_hat;  // (|level|, value)
    {
        std::vector<double> lv = levels;
        std::sort(lv.begin(), lv.end(),
                  [](double a, double b) { return std::abs(a) < std::abs(b); });
        for (double level : lv) {
            double tail = 0.0;
            auto states = state_family(sysL, r_min, budget, 71);
            auto u = level == 0.0 ? signals::zero_signal() : signals::constant_signal(level);
            for (const auto& s : states) {
                auto traj = integrate::trajectory(sysL, T, s.x0, u, cfg, {T});
                tail = std::max(tail, systems::norm(traj.states.back()));
            }
            run_gamma = std::max(run_gamma, tail);
            gamma_hat.emplace_back(std::abs(level), run_gamma);
            rep.gamma_table.push_back({std::abs(level), run_gamma});
        }
    }
    auto gamma_of = [&](double level) {
        double g = 0.0;
        for (const auto& [l, v] : gamma_hat)
            if (l <= std::abs(level) + 1e-15) g = v;
        return g;
    };

    double r_ref = budget.r_grid.front();
    for (double r : budget.r_grid)
        if (std::abs(r - 1.0) < std::abs(r_ref - 1.0)) r_ref = r;

    // residuals per truncation at the reference radius for the no-decay test
    std::vector<double> resid_start, resid_late;
    struct LateBest {
        double value = 0.0;
        double time = 0.0;
        Sample s;
        InputChoice u;
    } late_best;
    for (int N : ns) {
        auto sysN = sys.with_truncation(N);
        auto states = state_family(sysN, r_ref, budget, 73);
        double r0 = 0.0, rl = 0.0;
        for (const auto& s : states) {
            for (double level : levels) {
                auto u = level == 0.0 ? signals::zero_signal() : signals::constant_signal(level);
                InputChoice in{u, signals::format_signal(u)};
                auto traj = integrate::trajectory(sysN, T, s.x0, u, cfg, {T});
                double g = gamma_of(level);
                double v0 = std::max(0.0, systems::norm(traj.states.front()) - g);
                double vl = std::max(0.0, systems::norm(traj.states.back()) - g);
                r0 = std::max(r0, v0);
                if (vl > rl) {
                    rl = vl;
                    if (N == ns.back()) late_best = {vl, T, s, in};
                }
            }
        }
        resid_start.push_back(r0);
        resid_late.push_back(rl);
    }
    bool no_decay = true;
    for (std::size_t i = 0; i < resid_late.size(); ++i) {
        if (resid_start[i] <= 1e-9 || resid_late[i] < 0.25 * resid_start[i]) no_decay = false;
        if (i > 0 && resid_late[i] < 0.95 * resid_late[i - 1]) no_decay = false;
    }
    if (no_decay && !resid_late.empty() && resid_late.back() > 1e-6 * std::max(1.0, r_ref)) {
        rep.verdict = Verdict::Falsified;
        auto sysN = sys.with_truncation(ns.back());
        rep.witness = make_witness(sysN, late_best.s, late_best.u, late_best.time,
                                   late_best.value, 0.25 * resid_start.back(),
                                   WitnessKind::NormAtTime,
                                   "input-adjusted norm residual never decays at the horizon");
        rep.notes = "residuals at the reference radius stay flat across truncations; no decay "
                    "envelope can dominate them";
        return rep;
    }

    // envelope fit over the full grid at the largest truncation
    std::vector<gains::KLSample> kl_samples;
    for (double r : budget.r_grid) {
        auto states = state_family(sysL, r, budget, 79);
        for (double t : t_grid) kl_samples.push_back({r, t, 0.0});
        std::size_t base = kl_samples.size() - t_grid.size();
        for (const auto& s : states) {
            for (double level : levels) {
                auto u = level == 0.0 ? signals::zero_signal() : signals::constant_signal(level);
                auto traj = integrate::trajectory(sysL, T, s.x0, u, cfg, t_grid);
                double g = gamma_of(level);
                for (std::size_t ti = 0; ti < t_grid.size(); ++ti) {
                    // locate the stored row at the requested time
                    double want = t_grid[ti];
                    double v = 0.0;
                    for (std::size_t i = 0; i < traj.size(); ++i)
                        if (std::abs(traj.times[i] - want) <= 1e-9 * std::max(1.0, want))
                            v = std::max(0.0, systems::norm(traj.states[i]) - g);
                    auto& cell = kl_samples[base + ti];
                    cell.value = std::max(cell.value, v);
                }
            }
        }
    }
    rep.envelope = gains::kl_envelope_fit(kl_samples);
    rep.has_envelope = true;
    rep.notes = "decay envelope fitted over the sampled grid (budget-relative certificate "
                "candidate, not a proof)";
    return rep;
}

EstimationReport check_cep(const TruncatedModeSystem& sys, double eps, double h,
                           const EstimationBudget& budget, const IntegratorConfig& cfg) {
    if (eps <= 0.0 || h <= 0.0) throw DomainError("equilibrium continuity needs eps, h > 0");
    EstimationReport rep;
    rep.property = "CEP";
    rep.budget = budget;
    auto ns = usable_truncations(sys, budget);
    auto sysN = sys.with_truncation(ns.back());
    std::optional<Witness> violation;
    for (int j = 0; j <= 10; ++j) {
        double delta = eps / std::pow(2.0, j);
        bool ok = true;
        for (double rr : {delta, delta / 2.0}) {
            auto states = state_family(sysN, rr, budget, 83 + j);
            auto inputs = sys.input_free ? input_family(sysN, budget, 0.0, 83)
                                         : input_family(sysN, budget, delta, 83 + j);
            for (const auto& s : states) {
                for (const auto& in : inputs) {
                    auto traj = integrate::trajectory(sysN, h, s.x0, in.u, cfg);
                    auto p = peak_with_time(traj);
                    if (p.value > eps * (1.0 + 1e-9)) {
                        ok = false;
                        violation = make_witness(sysN, s, in, p.time, p.value, eps,
                                                 WitnessKind::PeakNorm,
                                                 "escaped the eps-ball from delta=" + num(delta));
                        break;
                    }
                }
                if (!ok) break;
            }
            if (!ok) break;
        }
        if (ok) {
            rep.delta_hat = delta;
            rep.notes = "largest sampled delta keeping trajectories inside eps (geometric grid, "
                        "budget-relative)";
            return rep;
        }
    }
    rep.verdict = Verdict::Falsified;
    rep.witness = violation;
    rep.notes = "every sampled delta produced an escape from the eps-ball";
    return rep;
}

EstimationReport estimate_flow_lipschitz(const TruncatedModeSystem& sys, double R, double tau,
                                         const EstimationBudget& budget,
                                         const IntegratorConfig& cfg,
                                         const std::optional<GronwallParams>& gronwall) {
    if (R <= 0.0 || tau <= 0.0) throw DomainError("Lipschitz estimate needs R, tau > 0");
    EstimationReport rep;
    rep.property = "flow-Lipschitz";
    rep.budget = budget;
    std::vector<double> t_grid;
    for (int i = 0; i <= 4; ++i) t_grid.push_back(tau * i / 4.0);

    auto inputs = input_family(sys, budget, budget.input_cap, 91);
    Rng base(budget.seed ^ 0xF00DF00Du);
    double L = 0.0;
    int pairs = std::max(4, budget.random_states * 2);
    for (int i = 0; i < pairs; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        StateVector x = sys.zero_state(), y = sys.zero_state();
        for (int k = 1; k <= sys.n_modes; ++k)
            for (int c = 0; c < sys.mode_dim; ++c) x.mode(k)[c] = rng.uniform(-1.0, 1.0);
        x = scaled_to(x, rng.uniform(0.1 * R, R));
        if (i % 2 == 0) {
            y = x;
            int k = rng.uniform_int(1, sys.n_modes);
            y.mode(k)[0] += rng.uniform(1e-4, 1e-2) * R;
        } else {
            for (int k = 1; k <= sys.n_modes; ++k)
                for (int c = 0; c < sys.mode_dim; ++c) y.mode(k)[c] = rng.uniform(-1.0, 1.0);
            y = scaled_to(y, rng.uniform(0.1 * R, R));
        }
        StateVector diff0 = x;
        for (std::size_t c = 0; c < diff0.data.size(); ++c) diff0.data[c] -= y.data[c];
        double d0 = systems::norm(diff0);
        if (d0 <= 0.0) continue;
        for (const auto& in : inputs) {
            auto tx = integrate::trajectory(sys, tau, x, in.u, cfg, t_grid);
            auto ty = integrate::trajectory(sys, tau, y, in.u, cfg, t_grid);
            for (double t : t_grid) {
                auto find = [&](const Trajectory& tr) -> const StateVector* {
                    for (std::size_t q = 0; q < tr.size(); ++q)
                        if (std::abs(tr.times[q] - t) <= 1e-9 * std::max(1.0, t))
                            return &tr.states[q];
                    return nullptr;
                };
                const StateVector* ax = find(tx);
                const StateVector* ay = find(ty);
                if (!ax || !ay) continue;
                StateVector d = *ax;
                for (std::size_t c = 0; c < d.data.size(); ++c) d.data[c] -= ay->data[c];
                L = std::max(L, systems::norm(d) / d0);
            }
        }
    }
    rep.L_hat = L;
    rep.notes = "max sampled pairwise expansion over t <= " + num(tau);
    if (gronwall) {
        double bound = gronwall->M *
                       std::exp((gronwall->M * gronwall->L_f + gronwall->lambda) * tau);
        rep.notes += "; exponential comparison bound " + num(bound) +
                     (L <= bound ? " respected" : " exceeded");
    }
    return rep;
}

std::optional<Witness> adversarial_search(const TruncatedModeSystem& sys,
                                          SearchObjective objective,
                                          const EstimationBudget& budget,
                                          const IntegratorConfig& cfg) {
    auto polish_level = [&](Witness w, bool maximize_time) -> Witness {
        if (sys.input_free) return w;
        auto sysN = sys.with_truncation(w.truncation);
        auto x0 = systems::parse_state(sysN, w.x0_spec);
        double best_score = -1.0;
        Witness best = w;
        std::vector<double> levels = budget.input_levels;
        levels.push_back(budget.input_cap);
        levels.push_back(0.75 * budget.input_cap);
        for (double level : levels) {
            if (std::abs(level) > budget.input_cap + 1e-15) continue;
            auto u = signals::constant_signal(std::abs(level));
            double score;
            double time;
            if (maximize_time) {
                auto traj = integrate::trajectory(sysN, budget.horizon, x0, u, cfg);
                auto t = integrate::first_norm_attainment(traj, w.bound);
                if (!t) continue;
                score = *t;
                time = *t;
            } else {
                auto traj = integrate::trajectory(sysN, budget.horizon, x0, u, cfg);
                auto p = peak_with_time(traj);
                score = p.value;
                time = p.time;
            }
            if (score > best_score) {
                best_score = score;
                best.u_spec = signals::format_signal(u);
                best.time = time;
                best.measured = score;
            }
        }
        return best;
    };

    switch (objective) {
        case SearchObjective::BRS: {
            double C = systems::norm(sys.witness_state(1));
            auto rep = check_brs(sys, C, std::min(budget.horizon, 1.0), budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            return polish_level(*rep.witness, false);
        }
        case SearchObjective::UGS: {
            auto rep = check_stability(sys,
                                       sys.input_free ? StabilityVariant::ZeroUGS
                                                      : StabilityVariant::UGS,
                                       budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            return polish_level(*rep.witness, false);
        }
        case SearchObjective::ULS: {
            auto rep = check_stability(sys, StabilityVariant::ULS, budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            return rep.witness;
        }
        case SearchObjective::ULIM: {
            auto rep = check_limit(sys, LimitUniformity::ULIM, gains::zero_gain(), budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            if (rep.witness->kind == WitnessKind::AttainmentTime)
                return polish_level(*rep.witness, true);
            return rep.witness;
        }
        case SearchObjective::UAG: {
            auto rep = check_ag(sys, AgUniformity::UAG, gains::zero_gain(), budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            return rep.witness;
        }
        case SearchObjective::ISS: {
            auto rep = fit_iss_bound(sys, budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            return rep.witness;
        }
        case SearchObjective::CEP: {
            auto rep = check_cep(sys, budget.eps_grid.front(), std::min(budget.horizon, 10.0),
                                 budget, cfg);
            if (rep.verdict != Verdict::Falsified) return std::nullopt;
            return rep.witness;
        }
    }
    return std::nullopt;
}

ReplayResult replay_witness(const TruncatedModeSystem& sys, const Witness& w,
                            const IntegratorConfig& cfg) {
    ReplayResult res;
    auto sysN = sys.with_truncation(w.truncation);
    auto x0 = systems::parse_state(sysN, w.x0_spec);
    auto u = signals::parse_signal(w.u_spec);
    double tol = 2.0 * (cfg.rel_tol * std::max(1.0, std::abs(w.measured)) + cfg.abs_tol);
    switch (w.kind) {
        case WitnessKind::NormAtTime: {
            auto xt = integrate::flow(sysN, w.time, x0, u, cfg);
            res.measured = systems::norm(xt);
            res.ok = std::abs(res.measured - w.measured) <= tol + 1e-6 * std::abs(w.measured);
            break;
        }
        case WitnessKind::PeakNorm: {
            double T = std::max(w.time * 1.0000001, 1e-9);
            try {
                auto traj = integrate::trajectory(sysN, T, x0, u, cfg, {w.time});
                res.measured = integrate::max_norm(traj);
            } catch (const BlowUpError&) {
                res.measured = cfg.hard_state_cap;
            }
            res.ok = res.measured >= w.measured - tol - 1e-6 * std::abs(w.measured);
            break;
        }
        case WitnessKind::AttainmentTime: {
            auto traj = integrate::trajectory(sysN, w.time * 1.1 + 1.0, x0, u, cfg);
            auto t = integrate::first_norm_attainment(traj, w.bound);
            if (!t) {
                res.note = "attainment not reproduced within the stretched window";
                break;
            }
            res.measured = *t;
            // recorded times may sit on the recording run's accepted-step grid,
            // so allow one-grid-step slack relative to the measured scale
            res.ok = std::abs(*t - w.measured) <= 0.05 * std::max(1.0, w.measured);
            break;
        }
    }
    if (!res.ok && res.note.empty()) res.note = "re-measured value disagrees with the record";
    return res;
}

}  // namespace isslab::estimate
