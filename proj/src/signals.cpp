#include "isslab/signals.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace isslab::signals {

namespace {

double euclid(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void validate(const InputSignal& u) {
    if (u.segments.empty()) throw ParseError("signal needs at least one segment");
    if (u.segments.front().start != 0.0) throw ParseError("first segment must start at 0");
    if (u.horizon < 0.0) throw ParseError("signal horizon must be nonnegative");
    std::size_t channels = u.segments.front().value.size();
    if (channels == 0) throw ParseError("signal segments need at least one channel");
    for (std::size_t i = 0; i < u.segments.size(); ++i) {
        if (u.segments[i].value.size() != channels)
            throw ParseError("segment channel counts differ");
        if (i > 0 && !(u.segments[i - 1].start < u.segments[i].start))
            throw ParseError("segment starts must strictly increase");
    }
}

InputSignal constant_signal(double v, double horizon) {
    return constant_signal(std::vector<double>{v}, horizon);
}

InputSignal constant_signal(const std::vector<double>& v, double horizon) {
    InputSignal u;
    u.segments.push_back({0.0, v});
    u.horizon = horizon;
    validate(u);
    return u;
}

InputSignal zero_signal(double horizon) { return constant_signal(0.0, horizon); }

InputSignal step_signal(const std::vector<std::pair<double, double>>& steps, double horizon) {
    InputSignal u;
    for (const auto& [t, v] : steps) u.segments.push_back({t, {v}});
    u.horizon = horizon;
    validate(u);
    return u;
}

const std::vector<double>& value_at(const InputSignal& u, double t) {
    const InputSignal::Segment* seg = &u.segments.front();
    for (const auto& s : u.segments) {
        if (s.start <= t)
            seg = &s;
        else
            break;
    }
    return seg->value;
}

double scalar_at(const InputSignal& u, double t) { return value_at(u, t).front(); }

double sup_norm(const InputSignal& u) {
    double m = 0.0;
    for (const auto& s : u.segments) m = std::max(m, euclid(s.value));
    return m;
}

InputSignal shift(const InputSignal& u, double tau) {
    if (tau < 0.0) throw DomainError("shift amount must be nonnegative");
    InputSignal out;
    out.segments.push_back({0.0, value_at(u, tau)});
    for (const auto& s : u.segments)
        if (s.start > tau) out.segments.push_back({s.start - tau, s.value});
    out.horizon = std::max(0.0, u.horizon - tau);
    return out;
}

InputSignal concat(const InputSignal& head, const InputSignal& tail, double t) {
    if (t < 0.0) throw DomainError("concat switch time must be nonnegative");
    InputSignal out;
    if (t == 0.0) {
        out = tail;
        return out;
    }
    for (const auto& s : head.segments)
        if (s.start < t) out.segments.push_back(s);
    for (const auto& s : tail.segments) out.segments.push_back({s.start + t, s.value});
    out.horizon = t + tail.horizon;
    validate(out);
    return out;
}

InputSignal restrict_to(const InputSignal& u, double t) {
    if (t <= 0.0) throw DomainError("restriction endpoint must be positive");
    InputSignal out;
    for (const auto& s : u.segments)
        if (s.start < t) out.segments.push_back(s);
    out.horizon = t;
    return out;
}

std::vector<double> breakpoints(const InputSignal& u, double T) {
    std::vector<double> pts{0.0};
    for (const auto& s : u.segments)
        if (s.start > 0.0 && s.start < T) pts.push_back(s.start);
    pts.push_back(T);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

InputSignal parse_signal(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.rfind("const(", 0) == 0 && s.back() == ')') {
        std::string inner = s.substr(6, s.size() - 7);
        std::size_t pos = 0;
        double v = std::stod(inner, &pos);
        if (pos != inner.size()) throw ParseError("bad constant signal value: " + inner);
        return constant_signal(v);
    }
    if (s.rfind("steps[", 0) == 0 && s.back() == ']') {
        std::string inner = s.substr(6, s.size() - 7);
        std::vector<std::pair<double, double>> steps;
        std::size_t i = 0;
        while (i < inner.size()) {
            if (inner[i] != '(') throw ParseError("expected '(' in steps signal");
            std::size_t close = inner.find(')', i);
            if (close == std::string::npos) throw ParseError("unclosed '(' in steps signal");
            std::string pair = inner.substr(i + 1, close - i - 1);
            std::size_t comma = pair.find(',');
            if (comma == std::string::npos) throw ParseError("expected 't,v' pair: " + pair);
            steps.emplace_back(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1)));
            i = close + 1;
            if (i < inner.size() && inner[i] == ',') ++i;
        }
        if (steps.empty()) throw ParseError("steps signal needs at least one pair");
        return step_signal(steps);
    }
    throw ParseError("unrecognized signal: " + text);
}

std::string format_signal(const InputSignal& u) {
    if (u.segments.size() == 1) return "const(" + num(u.segments.front().value.front()) + ")";
    std::string out = "steps[";
    for (std::size_t i = 0; i < u.segments.size(); ++i) {
        if (i) out += ",";
        out += "(" + num(u.segments[i].start) + "," + num(u.segments[i].value.front()) + ")";
    }
    out += "]";
    return out;
}

}  // namespace isslab::signals
