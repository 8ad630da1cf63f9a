#include "isslab/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace isslab::integrate {

using systems::StateVector;
using systems::TruncatedModeSystem;

namespace {

using Field = std::function<void(double t, const double* y, double* dy)>;

struct Dopri5 {
    // Dormand-Prince 5(4) tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct Stepper {
    const Field& f;
    std::size_t n;
    std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp, ynew, errv;

    Stepper(const Field& field, std::size_t dim)
        : f(field), n(dim), k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim),
          tmp(dim), ynew(dim), errv(dim) {}

    // One trial step from (t, y) with derivative k1 already filled; fills
    // ynew, errv and k7 (derivative at the new point, FSAL).
    void attempt(double t, const std::vector<double>& y, double h) {
        using D = Dopri5;
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * D::a21 * k1[i];
        f(t + D::c2 * h, tmp.data(), k2.data());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (D::a31 * k1[i] + D::a32 * k2[i]);
        f(t + D::c3 * h, tmp.data(), k3.data());
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
        f(t + D::c4 * h, tmp.data(), k4.data());
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] + D::a54 * k4[i]);
        f(t + D::c5 * h, tmp.data(), k5.data());
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                                 D::a64 * k4[i] + D::a65 * k5[i]);
        f(t + h, tmp.data(), k6.data());
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + h * (D::b1 * k1[i] + D::b3 * k3[i] + D::b4 * k4[i] + D::b5 * k5[i] +
                                  D::b6 * k6[i]);
        f(t + h, ynew.data(), k7.data());
        for (std::size_t i = 0; i < n; ++i)
            errv[i] = h * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                           D::e6 * k6[i] + D::e7 * k7[i]);
    }

    double error_norm(const std::vector<double>& y, const IntegratorConfig& cfg) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double q = errv[i] / sk;
            acc += q * q;
        }
        return std::sqrt(acc / static_cast<double>(n));
    }
};

double initial_step(const Field& f, double t0, const std::vector<double>& y,
                    const std::vector<double>& f0, double span, const IntegratorConfig& cfg) {
    if (cfg.init_step > 0.0) return std::min(cfg.init_step, span);
    std::size_t n = y.size();
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        d0 += (y[i] / sk) * (y[i] / sk);
        d1 += (f0[i] / sk) * (f0[i] / sk);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y[i] + h0 * f0[i];
    f(t0 + h0, y1.data(), f1.data());
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sk = cfg.abs_tol + cfg.rel_tol * std::abs(y[i]);
        double q = (f1[i] - f0[i]) / sk;
        d2 += q * q;
    }
    d2 = std::sqrt(d2 / n) / h0;
    double m = std::max(d1, d2);
    double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
    return std::min({100.0 * h0, h1, span, cfg.max_step});
}

void enforce_cap(const std::vector<double>& y, double t, double cap) {
    for (double v : y)
        if (!(std::abs(v) <= cap))
            throw BlowUpError("state exceeded hard cap during integration", t);
}

// Earliest fraction in (0, 0.99) at which some |y_i| crosses one of the
// watched magnitude levels between y0 and y1 (linear estimate); 1.0 when the
// step is free of interior crossings. Crossings inside the final 1% stay in
// the step: the straddling sliver is too short to degrade the error order.
double first_kink_fraction(const std::vector<double>& y0, const std::vector<double>& y1,
                           const std::vector<double>& levels) {
    double theta = 1.0;
    for (std::size_t i = 0; i < y0.size(); ++i) {
        for (double level : levels) {
            for (double sgn : {1.0, -1.0}) {
                double g0 = y0[i] - sgn * level;
                double g1 = y1[i] - sgn * level;
                if (g0 == 0.0 || g0 * g1 >= 0.0) continue;
                theta = std::min(theta, g0 / (g0 - g1));
            }
        }
    }
    return theta < 0.99 ? theta : 1.0;
}

// Integrates dy = f(t, y) over [t0, t1]; on_step(t, y, dy, err_norm) fires at
// every accepted step (not at t0). stop_times are hit exactly. kink_levels
// lists magnitudes where f loses smoothness; steps are trimmed to end just
// past a crossing instead of straddling it.
void integrate_span(
    const Field& f, double t0, double t1, std::vector<double>& y, const IntegratorConfig& cfg,
    const std::vector<double>& stop_times, const std::vector<double>& kink_levels,
    const std::function<void(double, const std::vector<double>&, const std::vector<double>&,
                             double)>& on_step) {
    if (t1 <= t0) return;
    std::size_t n = y.size();
    Stepper st(f, n);
    f(t0, y.data(), st.k1.data());
    double t = t0;
    double h = initial_step(f, t0, y, st.k1, t1 - t0, cfg);
    double err_old = 1e-4;
    std::size_t next_stop = 0;
    while (next_stop < stop_times.size() && stop_times[next_stop] <= t0) ++next_stop;

    int rejects_in_row = 0;
    int kink_cuts = 0;
    while (t < t1) {
        double target = t1;
        if (next_stop < stop_times.size()) target = std::min(target, stop_times[next_stop]);
        h = std::min({h, cfg.max_step, target - t});
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            // squeezed against a stop time: snap
            t = target;
            if (next_stop < stop_times.size() && target == stop_times[next_stop]) ++next_stop;
            on_step(t, y, st.k1, 0.0);
            continue;
        }
        st.attempt(t, y, h);
        double err = st.error_norm(y, cfg);
        if (std::isnan(err) || std::isinf(err)) {
            h *= 0.25;
            if (++rejects_in_row > 200) throw BlowUpError("step control failed (nan)", t);
            continue;
        }
        if (err <= 1.0) {
            if (!kink_levels.empty() && kink_cuts < 64) {
                double theta = first_kink_fraction(y, st.ynew, kink_levels);
                double cut = theta * h;
                if (theta < 1.0 && cut > 1e-12 * std::max(1.0, std::abs(t))) {
                    // retry, landing a hair past the estimated crossing
                    h = std::min(h, cut * 1.001);
                    ++kink_cuts;
                    continue;
                }
            }
            kink_cuts = 0;
            rejects_in_row = 0;
            t += h;
            y = st.ynew;
            enforce_cap(y, t, cfg.hard_state_cap);
            std::swap(st.k1, st.k7);  // FSAL
            on_step(t, y, st.k1, std::abs(err * h));
            if (next_stop < stop_times.size() &&
                std::abs(t - stop_times[next_stop]) <= 1e-12 * std::max(1.0, std::abs(t)))
                ++next_stop;
            double fac = cfg.safety * std::pow(std::max(err, 1e-10), -0.14) *
                         std::pow(err_old, 0.08);
            fac = std::clamp(fac, 1.0 / cfg.max_growth, cfg.max_growth);
            h *= fac;
            err_old = std::max(err, 1e-4);
        } else {
            h *= std::max(0.1, cfg.safety * std::pow(err, -0.2));
            if (++rejects_in_row > 200) throw BlowUpError("step control failed (rejects)", t);
        }
    }
}

Field mode_field(const TruncatedModeSystem& sys, int k, double u_val) {
    return [&sys, k, u_val](double, const double* y, double* dy) { sys.rhs(k, y, u_val, dy); };
}

Field full_field(const TruncatedModeSystem& sys, double u_val) {
    int dim = sys.mode_dim;
    return [&sys, u_val, dim](double, const double* y, double* dy) {
        for (int k = 1; k <= sys.n_modes; ++k)
            sys.rhs(k, y + (k - 1) * dim, u_val, dy + (k - 1) * dim);
    };
}

double hermite(double s, double h, double p0, double m0, double p1, double m1) {
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * p1 +
           (s3 - s2) * h * m1;
}

}  // namespace

StateVector flow(const TruncatedModeSystem& sys, double t, const StateVector& x0,
                 const signals::InputSignal& u, const IntegratorConfig& cfg) {
    if (t < 0.0) throw DomainError("flow time must be nonnegative");
    if (static_cast<int>(x0.data.size()) != sys.n_modes * sys.mode_dim)
        throw DomainError("state dimension does not match truncation");
    StateVector out = x0;
    if (t == 0.0) return out;
    auto bps = signals::breakpoints(u, t);

    if (cfg.use_oracle && sys.mode_oracle && sys.oracle_exact) {
        for (int k = 1; k <= sys.n_modes; ++k) {
            std::vector<double> z(out.mode(k), out.mode(k) + sys.mode_dim);
            for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
                double uv = signals::scalar_at(u, bps[s]);
                auto r = sys.mode_oracle(k, z.data(), uv, bps[s + 1] - bps[s]);
                z = r.value;
            }
            std::copy(z.begin(), z.end(), out.mode(k));
        }
        return out;
    }

    if (sys.decoupled) {
        for (int k = 1; k <= sys.n_modes; ++k) {
            std::vector<double> z(out.mode(k), out.mode(k) + sys.mode_dim);
            for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
                double uv = signals::scalar_at(u, bps[s]);
                auto field = mode_field(sys, k, uv);
                integrate_span(field, bps[s], bps[s + 1], z, cfg, {}, sys.rhs_kink_levels,
                               [](double, const std::vector<double>&, const std::vector<double>&,
                                  double) {});
            }
            std::copy(z.begin(), z.end(), out.mode(k));
        }
        return out;
    }

    std::vector<double> y = out.data;
    for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
        double uv = signals::scalar_at(u, bps[s]);
        auto field = full_field(sys, uv);
        integrate_span(field, bps[s], bps[s + 1], y, cfg, {}, sys.rhs_kink_levels,
                       [](double, const std::vector<double>&, const std::vector<double>&,
                          double) {});
    }
    out.data = y;
    return out;
}

Trajectory trajectory(const TruncatedModeSystem& sys, double T, const StateVector& x0,
                      const signals::InputSignal& u, const IntegratorConfig& cfg,
                      const std::vector<double>& extra_times) {
    if (T <= 0.0) throw DomainError("trajectory horizon must be positive");
    if (static_cast<int>(x0.data.size()) != sys.n_modes * sys.mode_dim)
        throw DomainError("state dimension does not match truncation");
    Trajectory traj;
    auto push = [&](double t, const std::vector<double>& y, const std::vector<double>& dy,
                    double le) {
        StateVector s = x0;
        s.data = y;
        StateVector d = x0;
        d.data = dy;
        traj.times.push_back(t);
        traj.states.push_back(std::move(s));
        traj.derivs.push_back(std::move(d));
        traj.local_error.push_back(le);
    };

    std::vector<double> stops = extra_times;
    std::sort(stops.begin(), stops.end());
    stops.erase(std::unique(stops.begin(), stops.end()), stops.end());

    std::vector<double> y = x0.data;
    {
        std::vector<double> dy(y.size());
        double uv = signals::scalar_at(u, 0.0);
        full_field(sys, uv)(0.0, y.data(), dy.data());
        push(0.0, y, dy, 0.0);
    }
    auto bps = signals::breakpoints(u, T);
    for (std::size_t s = 0; s + 1 < bps.size(); ++s) {
        double uv = signals::scalar_at(u, bps[s]);
        auto field = full_field(sys, uv);
        integrate_span(field, bps[s], bps[s + 1], y, cfg, stops, sys.rhs_kink_levels, push);
    }

    if (cfg.event_threshold) {
        double thr = *cfg.event_threshold;
        // steps never straddle input breakpoints, so u is constant on a bracket
        auto mode_value_at = [&](std::size_t i, int k, double t_query) {
            std::vector<double> z(traj.states[i].mode(k),
                                  traj.states[i].mode(k) + sys.mode_dim);
            double uv = signals::scalar_at(u, traj.times[i]);
            auto field = mode_field(sys, k, uv);
            integrate_span(field, traj.times[i], t_query, z, cfg, {}, sys.rhs_kink_levels,
                           [](double, const std::vector<double>&, const std::vector<double>&,
                              double) {});
            return z[0];
        };
        for (int k = 1; k <= sys.n_modes; ++k) {
            double level = cfg.event_threshold_scales_with_mode ? thr * k : thr;
            // record every bracketed crossing, not only the first
            for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
                double g0 = traj.component(i, k, 0) - level;
                double g1 = traj.component(i + 1, k, 0) - level;
                bool crosses = (g0 <= 0.0 && g1 > 0.0) || (g0 >= 0.0 && g1 < 0.0);
                if (!crosses) continue;
                double lo = traj.times[i], hi = traj.times[i + 1];
                for (int it = 0; it < 60 && (hi - lo) > 1e-13 * std::max(1.0, hi); ++it) {
                    double mid = 0.5 * (lo + hi);
                    double gm = mode_value_at(i, k, mid) - level;
                    if ((g0 <= 0.0 && gm <= 0.0) || (g0 >= 0.0 && gm >= 0.0))
                        lo = mid;
                    else
                        hi = mid;
                }
                traj.events.push_back({0.5 * (lo + hi), k, level});
            }
        }
        std::sort(traj.events.begin(), traj.events.end(),
                  [](const TrajectoryEvent& a, const TrajectoryEvent& b) {
                      return a.time < b.time || (a.time == b.time && a.mode < b.mode);
                  });
    }
    return traj;
}

std::optional<double> peak_time(const Trajectory& traj, int mode_k, double level) {
    if (traj.size() < 2) return std::nullopt;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        double g0 = traj.component(i, mode_k, 0) - level;
        double g1 = traj.component(i + 1, mode_k, 0) - level;
        if (g0 == 0.0) return traj.times[i];
        if ((g0 < 0.0 && g1 >= 0.0) || (g0 > 0.0 && g1 <= 0.0)) {
            double h = traj.times[i + 1] - traj.times[i];
            if (h <= 0.0) return traj.times[i + 1];
            double p0 = traj.component(i, mode_k, 0), p1 = traj.component(i + 1, mode_k, 0);
            double m0 = traj.derivs[i].mode(mode_k)[0], m1 = traj.derivs[i + 1].mode(mode_k)[0];
            double lo = 0.0, hi = 1.0;
            double glo = g0;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                double gm = hermite(mid, h, p0, m0, p1, m1) - level;
                if ((glo <= 0.0 && gm <= 0.0) || (glo >= 0.0 && gm >= 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            return traj.times[i] + 0.5 * (lo + hi) * h;
        }
    }
    return std::nullopt;
}

double max_norm(const Trajectory& traj) {
    double m = 0.0;
    for (const auto& s : traj.states) m = std::max(m, systems::norm(s));
    return m;
}

std::optional<double> first_norm_attainment(const Trajectory& traj, double target) {
    if (traj.size() == 0) return std::nullopt;
    if (systems::norm(traj.states[0]) <= target) return traj.times[0];
    for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        double n1 = systems::norm(traj.states[i + 1]);
        if (n1 > target) continue;
        double h = traj.times[i + 1] - traj.times[i];
        if (h <= 0.0) return traj.times[i + 1];
        // bisect the Hermite interpolant of the full state on this bracket
        double lo = 0.0, hi = 1.0;
        const auto& s0 = traj.states[i];
        const auto& s1 = traj.states[i + 1];
        const auto& d0 = traj.derivs[i];
        const auto& d1 = traj.derivs[i + 1];
        systems::StateVector probe = s0;
        auto norm_at = [&](double s) {
            for (std::size_t c = 0; c < probe.data.size(); ++c)
                probe.data[c] = hermite(s, h, s0.data[c], d0.data[c], s1.data[c], d1.data[c]);
            return systems::norm(probe);
        };
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            if (norm_at(mid) > target)
                lo = mid;
            else
                hi = mid;
        }
        return traj.times[i] + hi * h;
    }
    return std::nullopt;
}

AxiomDefects check_axioms(const TruncatedModeSystem& sys, const AxiomSample& sample,
                          const IntegratorConfig& cfg) {
    AxiomDefects d;
    const auto& x = sample.x0;
    const auto& u = sample.u;
    double t = sample.t, h = sample.h;

    StateVector same = flow(sys, 0.0, x, u, cfg);
    StateVector diff = same;
    for (std::size_t i = 0; i < diff.data.size(); ++i) diff.data[i] -= x.data[i];
    d.identity = systems::norm(diff);

    StateVector a = flow(sys, t + h, x, u, cfg);
    StateVector mid = flow(sys, t, x, u, cfg);
    StateVector b = flow(sys, h, mid, signals::shift(u, t), cfg);
    StateVector ab = a;
    for (std::size_t i = 0; i < ab.data.size(); ++i) ab.data[i] -= b.data[i];
    d.cocycle = systems::norm(ab) / (1.0 + systems::norm(a));

    if (t > 0.0) {
        auto tail = signals::constant_signal(signals::sup_norm(u) + 1.0);
        auto u2 = signals::concat(signals::restrict_to(u, t), tail, t);
        StateVector c1 = flow(sys, t, x, u, cfg);
        StateVector c2 = flow(sys, t, x, u2, cfg);
        StateVector cc = c1;
        for (std::size_t i = 0; i < cc.data.size(); ++i) cc.data[i] -= c2.data[i];
        d.causality = systems::norm(cc) / (1.0 + systems::norm(c1));
    }
    return d;
}

std::vector<AxiomSample> make_axiom_samples(const TruncatedModeSystem& sys, int count,
                                            std::uint64_t seed, double state_scale,
                                            double input_scale, double t_max) {
    std::vector<AxiomSample> out(static_cast<std::size_t>(count));
    Rng base(seed);
    for (int i = 0; i < count; ++i) {
        Rng rng = base.fork(static_cast<std::uint64_t>(i));
        AxiomSample s;
        s.x0 = sys.zero_state();
        int active = rng.uniform_int(1, std::min(3, sys.n_modes));
        for (int a = 0; a < active; ++a) {
            int k = rng.uniform_int(1, sys.n_modes);
            for (int c = 0; c < sys.mode_dim; ++c)
                s.x0.mode(k)[c] = rng.uniform(-state_scale, state_scale);
        }
        int segs = rng.uniform_int(1, 3);
        std::vector<std::pair<double, double>> steps;
        double t0 = 0.0;
        for (int g = 0; g < segs; ++g) {
            steps.emplace_back(t0, rng.uniform(-input_scale, input_scale));
            t0 += rng.uniform(0.1, t_max / 2.0);
        }
        s.u = signals::step_signal(steps, 4.0 * t_max);
        s.t = rng.uniform(0.05, t_max);
        s.h = rng.uniform(0.0, t_max / 2.0);
        out[static_cast<std::size_t>(i)] = std::move(s);
    }
    return out;
}

}  // namespace isslab::integrate
