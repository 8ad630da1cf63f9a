#include "isslab/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace isslab::lyap {

using integrate::IntegratorConfig;
using signals::InputSignal;
using systems::StateVector;
using systems::TruncatedModeSystem;

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

IntegratorConfig tightened(const IntegratorConfig& cfg) {
    IntegratorConfig out = cfg;
    out.rel_tol = std::min(cfg.rel_tol, 1e-12);
    out.abs_tol = std::min(cfg.abs_tol, 1e-14);
    return out;
}

}  // namespace

CandidateLF make_norm_sq_lf() {
    CandidateLF lf;
    lf.V = [](const StateVector& x) {
        double n = systems::norm(x);
        return n * n;
    };
    lf.psi2 = gains::power_gain(1.0, 2.0);
    lf.psi1 = gains::power_gain(1.0, 2.0);
    lf.alpha = gains::power_gain(1.0, 2.0);
    lf.sigma = gains::power_gain(1.0, 2.0);
    lf.label = "norm-squared";
    return lf;
}

CandidateLF make_weighted_norm_sq_lf(const std::function<double(int)>& weight, int n_modes) {
    if (n_modes < 1) throw DomainError("weighted candidate needs at least one mode");
    double w_min = weight(1), w_max = weight(1);
    for (int k = 2; k <= n_modes; ++k) {
        double w = weight(k);
        if (w <= 0.0) throw DomainError("mode weights must be positive");
        w_min = std::min(w_min, w);
        w_max = std::max(w_max, w);
    }
    if (w_min <= 0.0) throw DomainError("mode weights must be positive");
    CandidateLF lf;
    lf.V = [weight](const StateVector& x) {
        double acc = 0.0;
        for (int k = 1; k <= x.n_modes(); ++k) {
            const double* m = const_cast<StateVector&>(x).mode(k);
            double s = 0.0;
            for (int c = 0; c < x.mode_dim; ++c) s += m[c] * m[c];
            acc += weight(k) * s;
        }
        return acc;
    };
    lf.psi2 = gains::power_gain(w_max, 2.0);
    lf.psi1 = gains::power_gain(w_min, 2.0);
    lf.alpha = gains::power_gain(w_min, 2.0);
    lf.sigma = gains::power_gain(w_max, 2.0);
    lf.label = "weighted-norm-squared";
    return lf;
}

DiniEstimate dini_derivative(const TruncatedModeSystem& sys, const CandidateLF& lf,
                             const StateVector& x, const InputSignal& u,
                             const IntegratorConfig& cfg, const std::vector<double>& h_grid) {
    std::vector<double> hs = h_grid;
    if (hs.empty()) hs = {1e-2, 1e-3, 1e-4, 1e-5};
    if (hs.size() < 2) throw DomainError("derivative grid needs at least two step sizes");
    std::sort(hs.begin(), hs.end(), std::greater<double>());
    IntegratorConfig tight = tightened(cfg);

    double v0 = lf.V(x);
    std::vector<double> quotients;
    for (double h : hs) {
        if (h <= 0.0) throw DomainError("derivative step sizes must be positive");
        auto xh = integrate::flow(sys, h, x, u, tight);
        quotients.push_back((lf.V(xh) - v0) / h);
    }
    // pairwise elimination of the O(h) term
    std::vector<double> extrap;
    for (std::size_t i = 0; i + 1 < quotients.size(); ++i) {
        double hi = hs[i], hj = hs[i + 1];
        extrap.push_back((quotients[i + 1] * hi - quotients[i] * hj) / (hi - hj));
    }
    DiniEstimate est;
    est.value = extrap.back();
    double prev = extrap.size() >= 2 ? extrap[extrap.size() - 2] : quotients.back();
    est.error_bar = std::abs(est.value - prev) + 1e-9 * (1.0 + std::abs(est.value));
    return est;
}

estimate::EstimationReport check_dissipation(const TruncatedModeSystem& sys,
                                             const CandidateLF& lf,
                                             const estimate::EstimationBudget& budget,
                                             const IntegratorConfig& cfg) {
    estimate::EstimationReport rep;
    rep.property = "LF-dissipation";
    rep.budget = budget;

    std::vector<double> levels{0.0};
    if (!sys.input_free)
        for (double v : budget.input_levels)
            if (v != 0.0 && std::abs(v) <= budget.input_cap + 1e-15) levels.push_back(v);

    Rng base(budget.seed ^ 0xD155D155u);
    for (std::size_t ri = 0; ri < budget.r_grid.size(); ++ri) {
        double r = budget.r_grid[ri];
        if (r <= 0.0) continue;
        for (int i = 0; i < std::max(2, budget.random_states); ++i) {
            Rng rng = base.fork(static_cast<std::uint64_t>(i) * 1000 + ri);
            StateVector x = sys.zero_state();
            int active = std::min(sys.n_modes, rng.uniform_int(1, 3));
            for (int a = 0; a < active; ++a) {
                int k = rng.uniform_int(1, sys.n_modes);
                for (int c = 0; c < sys.mode_dim; ++c) x.mode(k)[c] = rng.uniform(-1.0, 1.0);
            }
            if (systems::norm(x) <= 0.0) x.mode(1)[0] = 1.0;
            double target_norm = rng.uniform(0.1 * r, r);
            double n0 = systems::norm(x);
            for (double& v : x.data) v *= target_norm / n0;

            for (double level : levels) {
                auto u = level == 0.0 ? signals::zero_signal()
                                      : signals::constant_signal(level);
                auto est = dini_derivative(sys, lf, x, u, cfg);
                double nx = systems::norm(x);
                double rhs = -gains::eval(lf.alpha, nx) +
                             (lf.sigma.is_zero() ? 0.0 : gains::eval(lf.sigma, std::abs(level)));
                rep.sigma_table.push_back({nx, est.value});
                if (est.value - est.error_bar > rhs) {
                    rep.verdict = estimate::Verdict::Falsified;
                    estimate::Witness w;
                    w.system_id = sys.catalog_id;
                    w.truncation = sys.n_modes;
                    w.x0_spec = systems::format_state(x);
                    w.u_spec = signals::format_signal(u);
                    w.time = 0.0;
                    w.measured = est.value;
                    w.bound = rhs;
                    w.kind = estimate::WitnessKind::NormAtTime;
                    w.note = "derivative estimate exceeds the claimed decrease (error bar " +
                             num(est.error_bar) + ")";
                    rep.witness = w;
                    rep.notes = "dissipation inequality violated at a sampled point";
                    return rep;
                }
            }
        }
    }
    rep.notes = "decrease inequality held at every sampled (state, input) pair "
                "(budget-relative)";
    return rep;
}

UlimBound nclf_ulim_bound(const CandidateLF& lf) {
    UlimBound bound;
    gains::ScalarGainFunction alpha = lf.alpha;
    gains::ScalarGainFunction sigma = lf.sigma;
    gains::ScalarGainFunction psi2 = lf.psi2;
    if (sigma.is_zero()) {
        bound.gamma = gains::zero_gain();
    } else {
        bound.gamma = gains::custom_gain(
            gains::Kind::K,
            [alpha, sigma](double r) {
                if (r == 0.0) return 0.0;
                return gains::inverse(alpha, 2.0 * gains::eval(sigma, r));
            },
            1e150, "alpha^{-1}(2 sigma(r))");
    }
    bound.tau = [psi2, alpha](double r, double eps) {
        if (r < 0.0 || eps <= 0.0) throw DomainError("reach-time bound needs r >= 0, eps > 0");
        return 2.0 * (gains::eval(psi2, r) + 1.0) / gains::eval(alpha, eps);
    };
    bound.source = &lf;
    return bound;
}

IntegralCheck verify_integral_inequality(const TruncatedModeSystem& sys, const CandidateLF& lf,
                                         const StateVector& x0, const InputSignal& u, double t,
                                         const IntegratorConfig& cfg, double quad_tol) {
    if (t <= 0.0) throw DomainError("integral check needs t > 0");
    std::vector<double> extra;
    for (int i = 0; i <= 64; ++i) extra.push_back(t * i / 64.0);
    auto traj = integrate::trajectory(sys, t, x0, u, cfg, extra);
    double lhs = 0.0;
    double prev_t = traj.times.front();
    double prev_a = gains::eval(lf.alpha, systems::norm(traj.states.front()));
    for (std::size_t i = 1; i < traj.size(); ++i) {
        double cur_t = traj.times[i];
        double cur_a = gains::eval(lf.alpha, systems::norm(traj.states[i]));
        lhs += 0.5 * (cur_t - prev_t) * (prev_a + cur_a);
        prev_t = cur_t;
        prev_a = cur_a;
    }
    IntegralCheck out;
    out.lhs = lhs;
    out.rhs = gains::eval(lf.psi2, systems::norm(x0)) +
              t * (lf.sigma.is_zero() ? 0.0 : gains::eval(lf.sigma, signals::sup_norm(u)));
    out.ok = lhs <= out.rhs + quad_tol;
    return out;
}

UlimVerification verify_ulim_from_nclf(const TruncatedModeSystem& sys, const CandidateLF& lf,
                                       const estimate::EstimationBudget& budget,
                                       const IntegratorConfig& cfg) {
    UlimVerification out;
    auto bound = nclf_ulim_bound(lf);
    std::vector<double> levels{0.0};
    if (!sys.input_free)
        for (double v : budget.input_levels)
            if (v != 0.0 && std::abs(v) <= budget.input_cap + 1e-15) levels.push_back(v);

    Rng base(budget.seed ^ 0x0B5E55EDu);
    out.ok = true;
    for (double r : budget.r_grid) {
        if (r <= 0.0) continue;
        for (double eps : budget.eps_grid) {
            double tau = bound.tau(r, eps);
            std::vector<StateVector> xs;
            for (int k = 1; k <= std::min(sys.n_modes, budget.max_witness_modes); ++k) {
                StateVector x = sys.witness_state(k);
                double n = systems::norm(x);
                for (double& v : x.data) v *= r / n;
                xs.push_back(x);
            }
            for (int i = 0; i < budget.random_states; ++i) {
                Rng rng = base.fork(static_cast<std::uint64_t>(i));
                StateVector x = sys.zero_state();
                for (int k = 1; k <= sys.n_modes; ++k)
                    for (int c = 0; c < sys.mode_dim; ++c) x.mode(k)[c] = rng.uniform(-1.0, 1.0);
                double n = systems::norm(x);
                if (n <= 0.0) continue;
                double want = rng.uniform(0.1 * r, r);
                for (double& v : x.data) v *= want / n;
                xs.push_back(x);
            }
            for (const auto& x : xs) {
                for (double level : levels) {
                    auto u = level == 0.0 ? signals::zero_signal()
                                          : signals::constant_signal(level);
                    auto t = estimate::attainment_time(sys, x, u, eps, bound.gamma,
                                                       tau * 1.0000001 + 1e-9, cfg);
                    ++out.checked;
                    if (!t || *t > tau) {
                        out.ok = false;
                        out.note = "missed the constructive reach time at r=" + num(r) +
                                   ", eps=" + num(eps) + ", level=" + num(level);
                        out.cases.push_back({r, eps, level, t ? *t : -1.0, tau});
                        return out;
                    }
                    out.cases.push_back({r, eps, level, *t, tau});
                }
            }
        }
    }
    out.note = "all sampled cases attained the band within the constructive bound";
    return out;
}

}  // namespace isslab::lyap
