#include "isslab/systems.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace isslab::systems {

namespace {

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double mode_euclid(const StateVector& x, int k) {
    const double* z = x.mode(k);
    double s = 0.0;
    for (int i = 0; i < x.mode_dim; ++i) s += z[i] * z[i];
    return std::sqrt(s);
}

// Riccati-type componentwise upper bound shared by the cubic-damped family:
// first component bounded by x0 / (1 - t * y0 * x0), second comes closed-form.
OracleResult riccati_bound(const double* z0, double t, double rate_scale) {
    double x0 = z0[0], y0 = z0[1];
    double ts = t * rate_scale;
    OracleResult r;
    r.exact = false;
    double denom = 1.0 - ts * y0 * x0;
    if (x0 * y0 > 0.0 && denom <= 0.0)
        throw SingularityError("upper-bound denominator vanished", t);
    r.value = {x0 / denom, y0 * std::exp(-ts)};
    return r;
}

}  // namespace

double norm(const StateVector& x) {
    double acc = 0.0;
    for (int k = 1; k <= x.n_modes(); ++k) {
        double m = mode_euclid(x, k);
        acc += x.norm_tag == NormTag::L1 ? m : m * m;
    }
    return x.norm_tag == NormTag::L1 ? acc : std::sqrt(acc);
}

StateVector TruncatedModeSystem::zero_state() const {
    StateVector x;
    x.data.assign(static_cast<std::size_t>(n_modes) * mode_dim, 0.0);
    x.mode_dim = mode_dim;
    x.norm_tag = norm_tag;
    return x;
}

StateVector TruncatedModeSystem::basis_state(int k, double scale) const {
    if (k < 1 || k > n_modes) throw DomainError("mode index out of range");
    StateVector x = zero_state();
    for (int i = 0; i < mode_dim; ++i) x.mode(k)[i] = scale * mode_witness[i];
    return x;
}

TruncatedModeSystem TruncatedModeSystem::with_truncation(int n) const {
    // non-catalog systems (ad-hoc constructions) truncate by plain copy
    const auto& ids = catalog_ids();
    if (std::find(ids.begin(), ids.end(), catalog_id) == ids.end()) {
        TruncatedModeSystem out = *this;
        out.n_modes = n;
        return out;
    }
    return catalog(catalog_id, n);
}

double mode_escape_threshold() {
    double e2 = std::exp(2.0);
    return 2.0 * e2 / (e2 - 1.0);
}

double default_cutoff_width() { return std::min(mode_escape_threshold(), 0.5); }

double cutoff(double s, double a) {
    if (a <= 0.0) throw DomainError("cutoff width must be positive");
    double mag = std::abs(s), sgn = s < 0.0 ? -1.0 : 1.0;
    if (mag <= a / 4.0) return s;
    if (mag >= a / 2.0) return 0.0;
    double w = (mag - a / 4.0) / (a / 4.0);  // in (0,1)
    double smooth = w * w * w * (10.0 + w * (-15.0 + 6.0 * w));
    return sgn * mag * (1.0 - smooth);
}

namespace {

TruncatedModeSystem make_example1(int n) {
    TruncatedModeSystem s;
    s.catalog_id = "Example1";
    s.mode_dim = 1;
    s.n_modes = n;
    s.norm_tag = NormTag::L1;
    s.input_free = false;
    s.mode_witness = {1.0};
    s.rhs = [](int k, const double* z, double u, double* dz) {
        dz[0] = -z[0] / (1.0 + std::pow(std::abs(u), k));
    };
    s.mode_oracle = [](int k, const double* z0, double u, double t) {
        OracleResult r;
        r.exact = true;
        r.value = {z0[0] * std::exp(-t / (1.0 + std::pow(std::abs(u), k)))};
        return r;
    };
    s.oracle_exact = true;
    return s;
}

TruncatedModeSystem make_s1(int n) {
    TruncatedModeSystem s;
    s.catalog_id = "S1";
    s.mode_dim = 2;
    s.n_modes = n;
    s.norm_tag = NormTag::L2;
    s.input_free = true;
    s.mode_witness = {mode_escape_threshold(), std::exp(1.0)};
    s.rhs = [](int k, const double* z, double, double* dz) {
        double x = z[0], y = z[1];
        double kk = static_cast<double>(k) * k;
        dz[0] = -x + x * x * y - x * x * x / kk;
        dz[1] = -y;
    };
    s.mode_oracle = [](int, const double* z0, double, double t) {
        return riccati_bound(z0, t, 1.0);
    };
    s.oracle_exact = false;
    return s;
}

TruncatedModeSystem make_s2(int n) {
    TruncatedModeSystem s = make_s1(n);
    s.catalog_id = "S2";
    s.input_free = false;
    s.rhs = [](int k, const double* z, double u, double* dz) {
        double x = z[0], y = z[1];
        double kk = static_cast<double>(k) * k;
        dz[0] = -x + x * x * y * std::abs(u) - x * x * x / kk;
        dz[1] = -y;
    };
    s.mode_oracle = nullptr;  // bound only valid for |u| = 1
    return s;
}

TruncatedModeSystem make_s1tilde(int n) {
    TruncatedModeSystem s = make_s1(n);
    s.catalog_id = "S1tilde";
    s.rhs = [](int k, const double* z, double, double* dz) {
        double x = z[0], y = z[1];
        double kk = static_cast<double>(k) * k;
        double inv_k = 1.0 / k;
        dz[0] = inv_k * (-x + x * x * y - x * x * x / kk);
        dz[1] = inv_k * (-y);
    };
    s.mode_oracle = [](int k, const double* z0, double, double t) {
        return riccati_bound(z0, t / k, 1.0);
    };
    s.oracle_exact = false;
    return s;
}

TruncatedModeSystem make_s3(int n) {
    TruncatedModeSystem s = make_s1tilde(n);
    s.catalog_id = "S3";
    s.rhs_kink_levels = {default_cutoff_width() / 4.0, default_cutoff_width() / 2.0};
    s.rhs = [](int k, const double* z, double, double* dz) {
        double x = z[0], y = z[1];
        double kk = static_cast<double>(k) * k;
        double inv_k = 1.0 / k;
        double a = default_cutoff_width();
        dz[0] = inv_k * (-x + x * x * y - x * x * x / kk) - cutoff(x, a);
        dz[1] = inv_k * (-y) - cutoff(y, a);
    };
    s.mode_oracle = nullptr;
    s.oracle_exact = false;
    return s;
}

TruncatedModeSystem make_s4(int n) {
    TruncatedModeSystem s = make_s3(n);
    s.catalog_id = "S4";
    s.input_free = false;
    s.rhs = [](int k, const double* z, double u, double* dz) {
        double x = z[0], y = z[1];
        double kk = static_cast<double>(k) * k;
        double inv_k = 1.0 / k;
        double a = default_cutoff_width();
        dz[0] = inv_k * (-x + x * x * y * std::abs(u) - x * x * x / kk) - cutoff(x, a);
        dz[1] = inv_k * (-y) - cutoff(y, a);
    };
    return s;
}

TruncatedModeSystem make_lindiag(int n) {
    TruncatedModeSystem s;
    s.catalog_id = "LinDiagStrong";
    s.mode_dim = 1;
    s.n_modes = n;
    s.norm_tag = NormTag::L2;
    s.input_free = true;
    s.mode_witness = {1.0};
    s.rhs = [](int k, const double* z, double, double* dz) { dz[0] = -z[0] / k; };
    s.mode_oracle = [](int k, const double* z0, double, double t) {
        OracleResult r;
        r.exact = true;
        r.value = {z0[0] * std::exp(-t / k)};
        return r;
    };
    s.oracle_exact = true;
    return s;
}

TruncatedModeSystem make_scalar_iss() {
    TruncatedModeSystem s;
    s.catalog_id = "ScalarISS";
    s.mode_dim = 1;
    s.n_modes = 1;
    s.norm_tag = NormTag::L2;
    s.input_free = false;
    s.mode_witness = {1.0};
    s.rhs = [](int, const double* z, double u, double* dz) { dz[0] = -z[0] + u; };
    s.mode_oracle = [](int, const double* z0, double u, double t) {
        OracleResult r;
        r.exact = true;
        r.value = {z0[0] * std::exp(-t) + u * (1.0 - std::exp(-t))};
        return r;
    };
    s.oracle_exact = true;
    return s;
}

}  // namespace

TruncatedModeSystem catalog(const std::string& id, int n_modes) {
    if (id != "ScalarISS" && n_modes < 1) throw DomainError("truncation must have at least one mode");
    if (id == "Example1") return make_example1(n_modes);
    if (id == "S1") return make_s1(n_modes);
    if (id == "S2") return make_s2(n_modes);
    if (id == "S1tilde") return make_s1tilde(n_modes);
    if (id == "S3") return make_s3(n_modes);
    if (id == "S4") return make_s4(n_modes);
    if (id == "LinDiagStrong") return make_lindiag(n_modes);
    if (id == "ScalarISS") return make_scalar_iss();
    throw DomainError("unknown catalog id: " + id);
}

std::vector<std::string> catalog_ids() {
    return {"Example1", "S1", "S2", "S1tilde", "S3", "S4", "LinDiagStrong", "ScalarISS"};
}

OracleResult exact_solution(const TruncatedModeSystem& sys, int k, const std::vector<double>& z0,
                            double u_const, double t) {
    if (!sys.mode_oracle) throw NoOracleError("no closed-form solution for " + sys.catalog_id);
    if (static_cast<int>(z0.size()) != sys.mode_dim)
        throw DomainError("mode state has wrong dimension");
    return sys.mode_oracle(k, z0.data(), u_const, t);
}

StateVector parse_state(const TruncatedModeSystem& sys, const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s == "zero") return sys.zero_state();
    auto parse_values = [](const std::string& inner) {
        std::vector<double> vals;
        std::stringstream ss(inner);
        std::string tok;
        while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
        return vals;
    };
    if (s.rfind("e:", 0) == 0) {
        int k = std::stoi(s.substr(2));
        return sys.basis_state(k);
    }
    if (s.rfind("mode:", 0) == 0) {
        std::size_t second = s.find(':', 5);
        if (second == std::string::npos) throw ParseError("expected mode:k:(values)");
        int k = std::stoi(s.substr(5, second - 5));
        std::string rest = s.substr(second + 1);
        if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
            throw ParseError("expected parenthesized mode values");
        auto vals = parse_values(rest.substr(1, rest.size() - 2));
        if (static_cast<int>(vals.size()) != sys.mode_dim)
            throw ParseError("mode value count must equal mode dimension");
        StateVector x = sys.zero_state();
        if (k < 1 || k > sys.n_modes) throw ParseError("mode index out of range");
        for (int i = 0; i < sys.mode_dim; ++i) x.mode(k)[i] = vals[i];
        return x;
    }
    if (s.rfind("list:", 0) == 0) {
        std::string rest = s.substr(5);
        if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')')
            throw ParseError("expected parenthesized list values");
        auto vals = parse_values(rest.substr(1, rest.size() - 2));
        StateVector x = sys.zero_state();
        if (vals.size() > x.data.size()) throw ParseError("list longer than state dimension");
        for (std::size_t i = 0; i < vals.size(); ++i) x.data[i] = vals[i];
        return x;
    }
    throw ParseError("unrecognized state: " + text);
}

std::string format_state(const StateVector& x) {
    std::string out = "list:(";
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        if (i) out += ",";
        out += num(x.data[i]);
    }
    out += ")";
    return out;
}

}  // namespace isslab::systems
