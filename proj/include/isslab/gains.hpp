#pragma once

#include <functional>
#include <string>
#include <vector>

#include "isslab/common.hpp"

namespace isslab::gains {

// Scalar comparison functions on [0, inf): class K (zero at zero, strictly
// increasing, continuous), K-infinity (K and unbounded), and class L
// (strictly decreasing to zero).
enum class Kind { K, KInfinity, L };

struct ScalarGainFunction {
    Kind kind = Kind::K;
    std::function<double(double)> fn;
    double domain_hint = 1e150;  // upper bound of reliable evaluation
    std::string label = "custom";

    bool is_zero() const { return label == "zero"; }
};

ScalarGainFunction identity_gain();
ScalarGainFunction zero_gain();
ScalarGainFunction power_gain(double c, double p);       // c * s^p
ScalarGainFunction saturation_gain(double c);            // c * s / (1 + s)
ScalarGainFunction custom_gain(Kind kind, std::function<double(double)> fn,
                               double domain_hint = 1e150, std::string label = "custom");

// Text forms: "id", "zero", "pow(c,p)", "sat(c)".
ScalarGainFunction parse_gain(const std::string& text);
std::string format_gain(const ScalarGainFunction& f);

double eval(const ScalarGainFunction& f, double s);

// Solves f(s) = y for K / K-infinity gains by bracketed bisection.
// Post: |f(result) - y| <= tol * max(1, y) and the final bracket width is
// below tol * max(1, result). Throws BracketError if no bracket exists below
// the domain hint.
double inverse(const ScalarGainFunction& f, double y, double tol = 1e-9);

struct ClassVerdict {
    bool pass = true;
    std::string reason;      // empty when pass
    double witness_a = 0.0;  // grid points exhibiting the failure, when applicable
    double witness_b = 0.0;
};

// Grid-based membership check for the declared kind. Monotonicity and sign are
// checked on the grid, continuity by adaptive refinement between grid points,
// unboundedness / vanishing by geometric probing above the grid.
ClassVerdict verify_class(const ScalarGainFunction& f, const std::vector<double>& grid);

// For a class-K alpha: alpha(a + b) >= alpha(a)/2 + alpha(b)/2.
bool split_lower_bound_check(const ScalarGainFunction& alpha, double a, double b);

struct KLSample {
    double r = 0.0;
    double t = 0.0;
    double value = 0.0;
};

struct KLFunction {
    std::function<double(double, double)> fn;
    double operator()(double r, double t) const { return fn(r, t); }
};

// Fits a two-argument envelope beta(r, t): class K in r for each t, strictly
// decreasing to zero in t for each r > 0, with beta(r_i, t_i) >= value_i for
// every sample. Throws DegenerateSampleError when no sample has r > 0 or when
// a sample has r = 0 with a positive value.
KLFunction kl_envelope_fit(const std::vector<KLSample>& samples);

// Checks the two-argument class membership on the given grids.
ClassVerdict verify_kl_grid(const KLFunction& beta, const std::vector<double>& r_grid,
                            const std::vector<double>& t_grid);

}  // namespace isslab::gains
