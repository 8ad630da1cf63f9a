#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isslab/estimate.hpp"
#include "isslab/gains.hpp"
#include "isslab/integrate.hpp"
#include "isslab/signals.hpp"
#include "isslab/systems.hpp"

namespace isslab::lyap {

// A scalar certificate candidate V with an upper frame psi2 (and optional
// lower frame psi1), a dissipation rate alpha and an input offset sigma:
// the claimed decrease is  D+V(x) <= -alpha(|x|) + sigma(|u|).
struct CandidateLF {
    std::function<double(const systems::StateVector&)> V;
    gains::ScalarGainFunction psi2;                 // upper frame, class K-infinity
    std::optional<gains::ScalarGainFunction> psi1;  // lower frame when coercive
    gains::ScalarGainFunction alpha;                // decrease rate, class K
    gains::ScalarGainFunction sigma;                // input offset, class K or zero
    std::string label;
};

// V(x) = |x|^2 with matching square frames.
CandidateLF make_norm_sq_lf();

// V(x) = sum_k w_k |x_k|^2 with w_k = weight(k); frames scaled by the
// weight range over the modes actually present.
CandidateLF make_weighted_norm_sq_lf(const std::function<double(int)>& weight, int n_modes);

struct DiniEstimate {
    double value = 0.0;      // extrapolated forward difference quotient
    double error_bar = 0.0;  // spread of the last two extrapolants plus floor
};

// Upper right-hand derivative of V along the flow at x under input u,
// via forward quotients on an h-grid with Richardson extrapolation.
DiniEstimate dini_derivative(const systems::TruncatedModeSystem& sys, const CandidateLF& lf,
                             const systems::StateVector& x, const signals::InputSignal& u,
                             const integrate::IntegratorConfig& cfg = {},
                             const std::vector<double>& h_grid = {});

// Sample the decrease inequality over random states and constant inputs;
// Falsified when the estimated derivative exceeds the claimed bound by more
// than its error bar.
estimate::EstimationReport check_dissipation(const systems::TruncatedModeSystem& sys,
                                             const CandidateLF& lf,
                                             const estimate::EstimationBudget& budget,
                                             const integrate::IntegratorConfig& cfg = {});

struct UlimBound {
    gains::ScalarGainFunction gamma;                   // gain: alpha^{-1}(2 sigma(r))
    std::function<double(double, double)> tau;         // horizon tau(r, eps)
    const CandidateLF* source = nullptr;
};

// Constructive reach-time bound from a (possibly non-coercive) certificate:
// gamma(r) = alpha^{-1}(2 sigma(r)), tau(r, eps) = 2 (psi2(r) + 1) / alpha(eps).
UlimBound nclf_ulim_bound(const CandidateLF& lf);

struct IntegralCheck {
    bool ok = false;
    double lhs = 0.0;
    double rhs = 0.0;
};

// Trapezoid check of  integral_0^t alpha(|phi(s)|) ds <= psi2(|x|) + t sigma(|u|).
IntegralCheck verify_integral_inequality(const systems::TruncatedModeSystem& sys,
                                         const CandidateLF& lf, const systems::StateVector& x0,
                                         const signals::InputSignal& u, double t,
                                         const integrate::IntegratorConfig& cfg = {},
                                         double quad_tol = 1e-6);

struct UlimVerification {
    bool ok = false;
    int checked = 0;
    std::string note;
    std::vector<std::array<double, 5>> cases;  // (r, eps, input level, attained time, tau bound)
};

// Empirically confirm the constructive bound: from sampled states with
// |x| <= r and sampled inputs, the trajectory enters the eps + gamma(|u|)
// ball within tau(r, eps).
UlimVerification verify_ulim_from_nclf(const systems::TruncatedModeSystem& sys,
                                       const CandidateLF& lf,
                                       const estimate::EstimationBudget& budget,
                                       const integrate::IntegratorConfig& cfg = {});

}  // namespace isslab::lyap
