#pragma once

#include <string>
#include <vector>

#include "isslab/common.hpp"

namespace isslab::signals {

// Piecewise-constant right-continuous input signal. Segment k holds on
// [start_k, start_{k+1}); the last segment holds up to the horizon (and is
// used for evaluation beyond it). Segment starts strictly increase from 0.
struct InputSignal {
    struct Segment {
        double start = 0.0;
        std::vector<double> value;  // one entry per input channel
    };
    std::vector<Segment> segments;
    double horizon = 0.0;
};

InputSignal constant_signal(double v, double horizon = 1e18);
InputSignal constant_signal(const std::vector<double>& v, double horizon = 1e18);
InputSignal step_signal(const std::vector<std::pair<double, double>>& steps, double horizon = 1e18);
InputSignal zero_signal(double horizon = 1e18);

void validate(const InputSignal& u);  // throws ParseError on malformed data

const std::vector<double>& value_at(const InputSignal& u, double t);
double scalar_at(const InputSignal& u, double t);  // first channel

// Supremum over time of the Euclidean norm of the segment values.
double sup_norm(const InputSignal& u);

// u(. + tau): drops history before tau, re-bases segment starts at 0.
InputSignal shift(const InputSignal& u, double tau);

// Equals head on [0, t) and tail(. - t) afterwards; the tail owns time t.
InputSignal concat(const InputSignal& head, const InputSignal& tail, double t);

// Restriction to [0, t): keeps segments starting before t, horizon becomes t.
InputSignal restrict_to(const InputSignal& u, double t);

// Breakpoints of u inside [0, T], including 0 and T, strictly increasing.
std::vector<double> breakpoints(const InputSignal& u, double T);

// Text forms: "const(v)" and "steps[(t0,v0),(t1,v1),...]" (scalar channel).
InputSignal parse_signal(const std::string& text);
std::string format_signal(const InputSignal& u);

}  // namespace isslab::signals
