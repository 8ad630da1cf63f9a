#include "isslab/gains.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

namespace isslab::gains {

namespace {

constexpr double kZeroTol = 1e-12;

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ScalarGainFunction identity_gain() {
    return {Kind::KInfinity, [](double s) { return s; }, 1e300, "id"};
}

ScalarGainFunction zero_gain() {
    return {Kind::K, [](double) { return 0.0; }, 1e300, "zero"};
}

ScalarGainFunction power_gain(double c, double p) {
    if (c <= 0.0 || p <= 0.0) throw DomainError("power gain needs c > 0 and p > 0");
    ScalarGainFunction f;
    f.kind = Kind::KInfinity;
    f.fn = [c, p](double s) { return c * std::pow(s, p); };
    f.domain_hint = std::pow(1e300 / c, 1.0 / p);
    f.label = "pow(" + num(c) + "," + num(p) + ")";
    return f;
}

ScalarGainFunction saturation_gain(double c) {
    if (c <= 0.0) throw DomainError("saturation gain needs c > 0");
    ScalarGainFunction f;
    f.kind = Kind::K;  // bounded: class K but not K-infinity
    f.fn = [c](double s) { return c * s / (1.0 + s); };
    f.domain_hint = 1e300;
    f.label = "sat(" + num(c) + ")";
    return f;
}

ScalarGainFunction custom_gain(Kind kind, std::function<double(double)> fn, double domain_hint,
                               std::string label) {
    return {kind, std::move(fn), domain_hint, std::move(label)};
}

ScalarGainFunction parse_gain(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s == "id") return identity_gain();
    if (s == "zero") return zero_gain();
    auto args_of = [&](const std::string& head) -> std::vector<double> {
        std::string inner = s.substr(head.size() + 1, s.size() - head.size() - 2);
        std::vector<double> out;
        std::stringstream ss(inner);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw ParseError("bad gain argument: " + tok);
            out.push_back(v);
        }
        return out;
    };
    if (s.rfind("pow(", 0) == 0 && s.back() == ')') {
        auto a = args_of("pow");
        if (a.size() != 2) throw ParseError("pow gain takes two arguments: " + text);
        return power_gain(a[0], a[1]);
    }
    if (s.rfind("sat(", 0) == 0 && s.back() == ')') {
        auto a = args_of("sat");
        if (a.size() != 1) throw ParseError("sat gain takes one argument: " + text);
        return saturation_gain(a[0]);
    }
    throw ParseError("unrecognized gain: " + text);
}

std::string format_gain(const ScalarGainFunction& f) { return f.label; }

double eval(const ScalarGainFunction& f, double s) {
    if (s < 0.0) throw DomainError("gain argument must be nonnegative, got " + num(s));
    if (s > f.domain_hint) throw DomainError("gain argument " + num(s) + " above domain hint");
    return f.fn(s);
}

double inverse(const ScalarGainFunction& f, double y, double tol) {
    if (f.kind == Kind::L) throw DomainError("inverse is defined for class-K gains only");
    if (y < 0.0) throw DomainError("inverse target must be nonnegative");
    if (y <= kZeroTol && std::abs(eval(f, 0.0)) <= kZeroTol) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (eval(f, hi) < y) {
        lo = hi;
        hi *= 2.0;
        if (hi > f.domain_hint)
            throw BracketError("no bracket for inverse below domain hint (target " + num(y) + ")");
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double v = eval(f, mid);
        if (v < y)
            lo = mid;
        else
            hi = mid;
        if (std::abs(v - y) <= tol * std::max(1.0, y) && (hi - lo) <= tol * std::max(1.0, mid))
            return mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Flags a jump between a and b: refines the interval down and reports failure
// when the value gap does not shrink with the interval.
bool continuous_between(const ScalarGainFunction& f, double a, double b, double fa, double fb,
                        double scale) {
    double gap0 = std::abs(fb - fa);
    if (gap0 <= 1e-6 * scale) return true;
    double lo = a, hi = b, flo = fa, fhi = fb;
    for (int level = 0; level < 48 && (hi - lo) > 1e-14 * std::max(1.0, std::abs(hi)); ++level) {
        double mid = 0.5 * (lo + hi);
        double fm = f.fn(mid);
        if (std::abs(fm - flo) >= std::abs(fhi - fm)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    // After shrinking the interval by ~2^48 the residual gap of a continuous
    // function is negligible; a persistent gap marks a jump.
    return std::abs(fhi - flo) <= std::max(1e-7 * scale, 1e-9);
}

}  // namespace

ClassVerdict verify_class(const ScalarGainFunction& f, const std::vector<double>& grid) {
    ClassVerdict v;
    if (grid.size() < 2) {
        v.pass = false;
        v.reason = "grid needs at least two points";
        return v;
    }
    std::vector<double> g = grid;
    std::sort(g.begin(), g.end());
    if (g.front() < 0.0) {
        v.pass = false;
        v.reason = "grid contains negative arguments";
        return v;
    }
    std::vector<double> vals(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) vals[i] = eval(f, g[i]);
    double scale = std::max(1e-12, *std::max_element(vals.begin(), vals.end()) -
                                       *std::min_element(vals.begin(), vals.end()));

    bool wants_k = f.kind == Kind::K || f.kind == Kind::KInfinity;
    if (wants_k) {
        double at0 = eval(f, 0.0);
        if (std::abs(at0) > kZeroTol) {
            v.pass = false;
            v.reason = "value at zero is " + num(at0) + ", expected 0";
            return v;
        }
    }
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
        if (g[i] == g[i + 1]) continue;
        bool ok = wants_k ? vals[i] < vals[i + 1] : vals[i] > vals[i + 1];
        if (!ok) {
            v.pass = false;
            v.reason = wants_k ? "not strictly increasing on grid" : "not strictly decreasing on grid";
            v.witness_a = g[i];
            v.witness_b = g[i + 1];
            return v;
        }
        if (!continuous_between(f, g[i], g[i + 1], vals[i], vals[i + 1], scale)) {
            v.pass = false;
            v.reason = "jump detected between grid points";
            v.witness_a = g[i];
            v.witness_b = g[i + 1];
            return v;
        }
    }

    if (f.kind == Kind::KInfinity) {
        double target = 2.0 * std::max(1.0, vals.back());
        double s = std::max(1.0, g.back());
        bool exceeded = false;
        while (s <= f.domain_hint) {
            if (f.fn(s) > target) {
                exceeded = true;
                break;
            }
            s *= 2.0;
        }
        if (!exceeded) {
            v.pass = false;
            v.reason = "no probed argument exceeded " + num(target) + "; looks bounded";
            v.witness_a = g.back();
            return v;
        }
    }
    if (f.kind == Kind::L) {
        double floor = std::max(1e-9, 1e-9 * std::abs(vals.front()));
        double s = std::max(1.0, g.back());
        bool vanished = false;
        for (int it = 0; it < 80 && s <= f.domain_hint; ++it, s *= 2.0) {
            if (std::abs(f.fn(s)) < floor) {
                vanished = true;
                break;
            }
        }
        if (!vanished) {
            v.pass = false;
            v.reason = "does not decay below " + num(floor) + " on probed arguments";
            v.witness_a = g.back();
            return v;
        }
    }
    return v;
}

bool split_lower_bound_check(const ScalarGainFunction& alpha, double a, double b) {
    if (a < 0.0 || b < 0.0) throw DomainError("split check needs nonnegative arguments");
    double lhs = eval(alpha, a + b);
    double rhs = 0.5 * eval(alpha, a) + 0.5 * eval(alpha, b);
    return lhs >= rhs - 1e-12 * std::max(1.0, std::abs(lhs));
}

KLFunction kl_envelope_fit(const std::vector<KLSample>& samples) {
    bool any_positive_r = false;
    for (const auto& s : samples) {
        if (s.r < 0.0 || s.t < 0.0 || s.value < 0.0)
            throw DomainError("envelope samples must be nonnegative");
        if (s.r > 0.0) any_positive_r = true;
        if (s.r == 0.0 && s.value > 0.0)
            throw DegenerateSampleError("sample demands positive value at r = 0");
    }
    if (!any_positive_r)
        throw DegenerateSampleError("all samples sit at r = 0; envelope is unconstrained");

    auto kept = std::make_shared<std::vector<KLSample>>();
    for (const auto& s : samples)
        if (s.r > 0.0 && s.value > 0.0) kept->push_back(s);

    KLFunction beta;
    beta.fn = [kept](double r, double t) {
        if (r < 0.0 || t < 0.0) throw DomainError("envelope arguments must be nonnegative");
        double env = 0.0;
        for (const auto& s : *kept) {
            double radial = std::min(1.0, r / s.r);
            double ramp = t <= s.t ? 1.0 : std::max(0.0, 1.0 - (t - s.t));
            env = std::max(env, s.value * radial * ramp);
        }
        // strict-monotonicity regularizer; also covers the no-sample case
        return env + r * std::exp(-t);
    };
    return beta;
}

ClassVerdict verify_kl_grid(const KLFunction& beta, const std::vector<double>& r_grid,
                            const std::vector<double>& t_grid) {
    ClassVerdict v;
    for (double t : t_grid) {
        ScalarGainFunction section;
        section.kind = Kind::K;
        section.fn = [&beta, t](double r) { return beta(r, t); };
        section.label = "r-section";
        ClassVerdict sec = verify_class(section, r_grid);
        if (!sec.pass) {
            sec.reason = "r-section at t=" + num(t) + ": " + sec.reason;
            return sec;
        }
    }
    for (double r : r_grid) {
        if (r <= 0.0) continue;
        ScalarGainFunction section;
        section.kind = Kind::L;
        section.fn = [&beta, r](double t) { return beta(r, t); };
        section.label = "t-section";
        ClassVerdict sec = verify_class(section, t_grid);
        if (!sec.pass) {
            sec.reason = "t-section at r=" + num(r) + ": " + sec.reason;
            return sec;
        }
    }
    return v;
}

}  // namespace isslab::gains
