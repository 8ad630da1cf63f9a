#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "isslab/signals.hpp"
#include "isslab/systems.hpp"

namespace isslab::integrate {

struct IntegratorConfig {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_step = 1e8;
    double init_step = 0.0;  // 0 selects the step automatically
    double hard_state_cap = 1e9;
    double max_growth = 5.0;  // step-size growth cap per accepted step
    double safety = 0.9;
    std::optional<double> event_threshold;  // component-0 crossing level per mode
    bool event_threshold_scales_with_mode = false;  // level for mode k is threshold * k
    bool use_oracle = false;  // substitute exact closed forms when available
};

struct TrajectoryEvent {
    double time = 0.0;
    int mode = 0;
    double level = 0.0;
};

// Accepted-step history of one run: states, derivatives (for cubic Hermite
// interpolation) and the local error estimate of each step.
struct Trajectory {
    std::vector<double> times;
    std::vector<systems::StateVector> states;
    std::vector<systems::StateVector> derivs;
    std::vector<double> local_error;
    std::vector<TrajectoryEvent> events;

    std::size_t size() const { return times.size(); }
    double component(std::size_t i, int mode_k, int comp) const {
        return states[i].mode(mode_k)[comp];
    }
};

// State at time t. Decoupled systems integrate mode by mode; integration
// restarts at input breakpoints. With use_oracle set and an exact closed form
// available the flow is assembled from it piecewise. Throws BlowUpError when
// any component passes hard_state_cap.
systems::StateVector flow(const systems::TruncatedModeSystem& sys, double t,
                          const systems::StateVector& x0, const signals::InputSignal& u,
                          const IntegratorConfig& cfg = {});

// Full-system run over [0, T] on one adaptive grid. extra_times are hit
// exactly and stored. Threshold crossings (sign changes of component 0 of any
// mode against the configured level) are refined and recorded as events.
Trajectory trajectory(const systems::TruncatedModeSystem& sys, double T,
                      const systems::StateVector& x0, const signals::InputSignal& u,
                      const IntegratorConfig& cfg = {},
                      const std::vector<double>& extra_times = {});

// First time component 0 of mode k crosses the level (sign change over the
// stored grid, refined on the cubic Hermite interpolant). Empty when no
// crossing is bracketed.
std::optional<double> peak_time(const Trajectory& traj, int mode_k, double level);

double max_norm(const Trajectory& traj);

// First time the trajectory norm drops to target or below, refined by
// bisection on the Hermite interpolant; empty if it never does within the run.
std::optional<double> first_norm_attainment(const Trajectory& traj, double target);

struct AxiomSample {
    systems::StateVector x0;
    signals::InputSignal u;
    double t = 0.0;
    double h = 0.0;
};

struct AxiomDefects {
    double identity = 0.0;   // || flow(0, x, u) - x ||
    double cocycle = 0.0;    // || flow(t+h, x, u) - flow(h, flow(t, x, u), shift(u, t)) || (relative)
    double causality = 0.0;  // flows under inputs agreeing on [0, t] compared at t (relative)
};

AxiomDefects check_axioms(const systems::TruncatedModeSystem& sys, const AxiomSample& sample,
                          const IntegratorConfig& cfg = {});

std::vector<AxiomSample> make_axiom_samples(const systems::TruncatedModeSystem& sys, int count,
                                            std::uint64_t seed, double state_scale = 0.4,
                                            double input_scale = 1.0, double t_max = 2.0);

}  // namespace isslab::integrate
