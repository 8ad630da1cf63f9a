#include "isslab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "isslab/gains.hpp"
#include "isslab/lyapunov.hpp"
#include "isslab/signals.hpp"

namespace isslab::experiment {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double to_number(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected a number for " + what + ", got '" + s + "'");
    }
}

}  // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section = "global";
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ParseError("empty section name", line_no);
            cfg.sections[section];
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected 'key = value'", line_no);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", line_no);
        cfg.sections[section][key] = value;
    }
    return cfg;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string Config::get(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end() || !s->second.count(key))
        throw ConfigError("missing config value [" + section + "] " + key);
    return s->second.at(key);
}

std::string Config::get_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double Config::number(const std::string& section, const std::string& key) const {
    return to_number(get(section, key), "[" + section + "] " + key);
}

double Config::number_or(const std::string& section, const std::string& key,
                         double fallback) const {
    return has(section, key) ? number(section, key) : fallback;
}

int Config::integer_or(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    double v = number(section, key);
    int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError("expected an integer for [" + section + "] " + key);
    return i;
}

bool Config::flag_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("expected a boolean for [" + section + "] " + key);
}

std::vector<double> Config::numbers_or(const std::string& section, const std::string& key,
                                       const std::vector<double>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<double> out;
    for (const auto& part : split_list(get(section, key)))
        if (!part.empty()) out.push_back(to_number(part, "[" + section + "] " + key));
    if (out.empty()) throw ConfigError("empty list for [" + section + "] " + key);
    return out;
}

std::vector<int> Config::integers_or(const std::string& section, const std::string& key,
                                     const std::vector<int>& fallback) const {
    if (!has(section, key)) return fallback;
    std::vector<int> out;
    for (double v : numbers_or(section, key, {})) {
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            throw ConfigError("expected integers for [" + section + "] " + key);
        out.push_back(i);
    }
    return out;
}

integrate::IntegratorConfig integrator_from(const Config& cfg) {
    integrate::IntegratorConfig out;
    out.rel_tol = cfg.number_or("integrator", "rel_tol", out.rel_tol);
    out.abs_tol = cfg.number_or("integrator", "abs_tol", out.abs_tol);
    out.max_step = cfg.number_or("integrator", "max_step", out.max_step);
    out.init_step = cfg.number_or("integrator", "init_step", out.init_step);
    out.hard_state_cap = cfg.number_or("integrator", "hard_state_cap", out.hard_state_cap);
    if (cfg.has("integrator", "event_threshold"))
        out.event_threshold = cfg.number("integrator", "event_threshold");
    out.event_threshold_scales_with_mode =
        cfg.flag_or("integrator", "event_scales_with_mode", false);
    out.use_oracle = cfg.flag_or("integrator", "use_oracle", false);
    return out;
}

estimate::EstimationBudget budget_from(const Config& cfg) {
    estimate::EstimationBudget b;
    b.r_grid = cfg.numbers_or("budget", "r_grid", b.r_grid);
    b.eps_grid = cfg.numbers_or("budget", "eps_grid", b.eps_grid);
    b.horizon = cfg.number_or("budget", "horizon", b.horizon);
    b.input_levels = cfg.numbers_or("budget", "input_levels", b.input_levels);
    b.input_cap = cfg.number_or("budget", "input_cap", b.input_cap);
    b.max_switches = cfg.integer_or("budget", "max_switches", b.max_switches);
    b.random_signals = cfg.integer_or("budget", "random_signals", b.random_signals);
    b.random_states = cfg.integer_or("budget", "random_states", b.random_states);
    b.max_witness_modes = cfg.integer_or("budget", "max_witness_modes", b.max_witness_modes);
    b.truncations = cfg.integers_or("budget", "truncations", b.truncations);
    b.seed = static_cast<std::uint64_t>(cfg.number_or("budget", "seed",
                                                      static_cast<double>(b.seed)));
    return b;
}

systems::TruncatedModeSystem system_from(const Config& cfg) {
    std::string id = cfg.get("system", "id");
    int n = cfg.integer_or("system", "truncation", 8);
    return systems::catalog(id, n);
}

void write_trajectory_csv(std::ostream& out, const integrate::Trajectory& traj, int mode_dim) {
    out << "time,mode_index,component_index,value,local_error\n";
    std::size_t ev = 0;
    auto flush_events_until = [&](double t) {
        while (ev < traj.events.size() && traj.events[ev].time <= t) {
            const auto& e = traj.events[ev];
            out << num(e.time) << "," << e.mode << ",-1," << num(e.level) << ",0\n";
            ++ev;
        }
    };
    for (std::size_t i = 0; i < traj.size(); ++i) {
        flush_events_until(traj.times[i]);
        const auto& x = traj.states[i];
        for (int k = 1; k <= x.n_modes(); ++k) {
            const double* m = x.mode(k);
            for (int c = 0; c < mode_dim; ++c)
                out << num(traj.times[i]) << "," << k << "," << c << "," << num(m[c]) << ","
                    << num(traj.local_error[i]) << "\n";
        }
    }
    flush_events_until(std::numeric_limits<double>::infinity());
}

std::string manifest_text(const Config& cfg, const std::string& command) {
    std::ostringstream out;
    out << "tool = " << kToolVersion << "\n";
    out << "command = " << command << "\n";
    for (const auto& [section, entries] : cfg.sections) {
        for (const auto& [key, value] : entries)
            out << section << "." << key << " = " << value << "\n";
    }
    return out.str();
}

namespace {

const char* kind_name(estimate::WitnessKind kind) {
    switch (kind) {
        case estimate::WitnessKind::NormAtTime: return "norm_at_time";
        case estimate::WitnessKind::PeakNorm: return "peak_norm";
        case estimate::WitnessKind::AttainmentTime: return "attainment_time";
    }
    return "norm_at_time";
}

estimate::WitnessKind kind_from(const std::string& name) {
    if (name == "norm_at_time") return estimate::WitnessKind::NormAtTime;
    if (name == "peak_norm") return estimate::WitnessKind::PeakNorm;
    if (name == "attainment_time") return estimate::WitnessKind::AttainmentTime;
    throw ConfigError("unknown witness kind '" + name + "'");
}

}  // namespace

std::string witness_to_text(const estimate::Witness& w) {
    std::ostringstream out;
    out << "system = " << w.system_id << "\n";
    out << "truncation = " << w.truncation << "\n";
    out << "x0 = " << w.x0_spec << "\n";
    out << "u = " << w.u_spec << "\n";
    out << "time = " << num(w.time) << "\n";
    out << "measured = " << num(w.measured) << "\n";
    out << "bound = " << num(w.bound) << "\n";
    out << "kind = " << kind_name(w.kind) << "\n";
    out << "note = " << w.note << "\n";
    return out.str();
}

estimate::Witness witness_from_text(const std::string& text) {
    auto cfg = Config::parse(text);
    estimate::Witness w;
    w.system_id = cfg.get("global", "system");
    w.truncation = cfg.integer_or("global", "truncation", 1);
    w.x0_spec = cfg.get("global", "x0");
    w.u_spec = cfg.get("global", "u");
    w.time = cfg.number("global", "time");
    w.measured = cfg.number("global", "measured");
    w.bound = cfg.number("global", "bound");
    w.kind = kind_from(cfg.get("global", "kind"));
    w.note = cfg.get_or("global", "note", "");
    return w;
}

namespace {

void write_table(std::ostream& out, const std::string& name, const char* header,
                 const std::vector<std::array<double, 2>>& rows) {
    if (rows.empty()) return;
    out << "[table " << name << "]\n" << header << "\n";
    for (const auto& r : rows) out << num(r[0]) << "," << num(r[1]) << "\n";
}

}  // namespace

void write_report(std::ostream& out, const estimate::EstimationReport& rep,
                  const std::string& system_id) {
    out << "property = " << rep.property << "\n";
    out << "system = " << system_id << "\n";
    out << "verdict = "
        << (rep.verdict == estimate::Verdict::Falsified ? "Falsified" : "NoViolationFound")
        << "\n";
    out << "notes = " << rep.notes << "\n";
    out << "delta_hat = " << num(rep.delta_hat) << "\n";
    out << "c_hat = " << num(rep.c_hat) << "\n";
    out << "L_hat = " << num(rep.L_hat) << "\n";
    write_table(out, "sigma", "r,sigma_hat", rep.sigma_table);
    write_table(out, "gamma", "level,gamma_hat", rep.gamma_table);
    write_table(out, "sup_by_truncation", "N,sup", rep.sup_by_truncation);
    write_table(out, "mode", "mode,measured", rep.mode_table);
    if (!rep.tau_table.empty()) {
        out << "[table tau]\neps,r,tau_hat\n";
        for (const auto& r : rep.tau_table)
            out << num(r[0]) << "," << num(r[1]) << "," << num(r[2]) << "\n";
    }
    if (rep.witness) {
        out << "[witness]\n" << witness_to_text(*rep.witness);
    }
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file '" + path + "'");
    out << content;
}

int verdict_exit(const estimate::EstimationReport& rep) {
    return rep.verdict == estimate::Verdict::Falsified ? 3 : 0;
}

}  // namespace

int cmd_simulate(const Config& cfg, std::ostream& log) {
    auto sys = system_from(cfg);
    auto icfg = integrator_from(cfg);
    auto x0 = systems::parse_state(sys, cfg.get_or("simulate", "x0", "zero"));
    auto u = signals::parse_signal(cfg.get_or("simulate", "u", "const(0)"));
    double T = cfg.number("simulate", "horizon");
    auto traj = integrate::trajectory(sys, T, x0, u, icfg);

    std::ostringstream csv;
    write_trajectory_csv(csv, traj, sys.mode_dim);
    std::string out_path = cfg.get_or("simulate", "output", "trajectory.csv");
    write_file(out_path, csv.str());
    if (cfg.has("simulate", "manifest"))
        write_file(cfg.get("simulate", "manifest"), manifest_text(cfg, "simulate"));
    log << "simulate: wrote " << traj.size() << " rows to " << out_path << " ("
        << traj.events.size() << " events)\n";
    return 0;
}

int cmd_estimate(const Config& cfg, std::ostream& log) {
    auto sys = system_from(cfg);
    auto icfg = integrator_from(cfg);
    auto budget = budget_from(cfg);
    std::string property = cfg.get("estimate", "property");
    auto gamma = gains::parse_gain(cfg.get_or("estimate", "gamma", "zero"));

    estimate::EstimationReport rep;
    if (property == "BRS") {
        rep = estimate::check_brs(sys, cfg.number("estimate", "C"),
                                  cfg.number("estimate", "tau"), budget, icfg);
    } else if (property == "ULS" || property == "UGS" || property == "UGB" ||
               property == "0-ULS" || property == "0-UGS") {
        using estimate::StabilityVariant;
        StabilityVariant v = property == "ULS"     ? StabilityVariant::ULS
                             : property == "UGS"   ? StabilityVariant::UGS
                             : property == "UGB"   ? StabilityVariant::UGB
                             : property == "0-ULS" ? StabilityVariant::ZeroULS
                                                   : StabilityVariant::ZeroUGS;
        rep = estimate::check_stability(sys, v, budget, icfg);
    } else if (property == "LIM" || property == "sLIM" || property == "ULIM") {
        using estimate::LimitUniformity;
        LimitUniformity u = property == "LIM"    ? LimitUniformity::LIM
                            : property == "sLIM" ? LimitUniformity::sLIM
                                                 : LimitUniformity::ULIM;
        rep = estimate::check_limit(sys, u, gamma, budget, icfg);
    } else if (property == "AG" || property == "sAG" || property == "UAG") {
        using estimate::AgUniformity;
        AgUniformity u = property == "AG"    ? AgUniformity::AG
                         : property == "sAG" ? AgUniformity::sAG
                                             : AgUniformity::UAG;
        rep = estimate::check_ag(sys, u, gamma, budget, icfg);
    } else if (property == "ISS") {
        rep = estimate::fit_iss_bound(sys, budget, icfg);
    } else if (property == "CEP") {
        rep = estimate::check_cep(sys, cfg.number("estimate", "eps"),
                                  cfg.number("estimate", "h"), budget, icfg);
    } else if (property == "LIPSCHITZ") {
        rep = estimate::estimate_flow_lipschitz(sys, cfg.number("estimate", "R"),
                                                cfg.number("estimate", "tau"), budget, icfg);
    } else {
        throw ConfigError("unknown property '" + property + "'");
    }

    std::ostringstream report;
    write_report(report, rep, sys.catalog_id);
    write_file(cfg.get_or("estimate", "report", "report.txt"), report.str());
    if (rep.witness && cfg.has("estimate", "witness"))
        write_file(cfg.get("estimate", "witness"), witness_to_text(*rep.witness));
    if (cfg.has("estimate", "manifest"))
        write_file(cfg.get("estimate", "manifest"), manifest_text(cfg, "estimate"));
    log << "estimate " << property << ": "
        << (rep.verdict == estimate::Verdict::Falsified ? "Falsified" : "NoViolationFound")
        << "\n";
    return verdict_exit(rep);
}

int cmd_lyapunov(const Config& cfg, std::ostream& log) {
    auto sys = system_from(cfg);
    auto icfg = integrator_from(cfg);
    auto budget = budget_from(cfg);
    std::string candidate = cfg.get_or("lyapunov", "candidate", "norm_sq");
    lyap::CandidateLF lf;
    if (candidate == "norm_sq") {
        lf = lyap::make_norm_sq_lf();
    } else if (candidate.rfind("weighted:", 0) == 0) {
        double p = to_number(candidate.substr(9), "candidate weight exponent");
        lf = lyap::make_weighted_norm_sq_lf(
            [p](int k) { return std::pow(static_cast<double>(k), p); }, sys.n_modes);
    } else {
        throw ConfigError("unknown candidate '" + candidate + "'");
    }
    if (cfg.has("lyapunov", "alpha")) lf.alpha = gains::parse_gain(cfg.get("lyapunov", "alpha"));
    if (cfg.has("lyapunov", "sigma")) lf.sigma = gains::parse_gain(cfg.get("lyapunov", "sigma"));

    std::ostringstream report;
    int exit_code = 0;
    auto diss = lyap::check_dissipation(sys, lf, budget, icfg);
    report << "dissipation = "
           << (diss.verdict == estimate::Verdict::Falsified ? "Falsified" : "NoViolationFound")
           << "\n";
    if (diss.verdict == estimate::Verdict::Falsified) {
        exit_code = 3;
        if (diss.witness && cfg.has("lyapunov", "witness"))
            write_file(cfg.get("lyapunov", "witness"), witness_to_text(*diss.witness));
    }

    auto bound = lyap::nclf_ulim_bound(lf);
    report << "[table tau_bound]\nr,eps,tau\n";
    for (double r : budget.r_grid)
        for (double eps : budget.eps_grid)
            report << num(r) << "," << num(eps) << "," << num(bound.tau(r, eps)) << "\n";

    if (diss.verdict != estimate::Verdict::Falsified) {
        auto ver = lyap::verify_ulim_from_nclf(sys, lf, budget, icfg);
        report << "reach_within_bound = " << (ver.ok ? "pass" : "fail") << " (" << ver.checked
               << " cases)\n";
        if (!ver.ok) exit_code = 3;
    }

    write_file(cfg.get_or("lyapunov", "report", "lyapunov.txt"), report.str());
    if (cfg.has("lyapunov", "manifest"))
        write_file(cfg.get("lyapunov", "manifest"), manifest_text(cfg, "lyapunov"));
    log << "lyapunov: " << (exit_code == 0 ? "certificate consistent" : "violation found")
        << "\n";
    return exit_code;
}

int cmd_replay(const Config& cfg, std::ostream& log) {
    std::ifstream in(cfg.get("replay", "witness"));
    if (!in) throw ConfigError("cannot open witness file");
    std::stringstream buf;
    buf << in.rdbuf();
    auto w = witness_from_text(buf.str());
    auto sys = systems::catalog(w.system_id, w.truncation);
    auto icfg = integrator_from(cfg);
    auto res = estimate::replay_witness(sys, w, icfg);
    log << "replay: " << (res.ok ? "reproduced" : "NOT reproduced") << ", measured "
        << num(res.measured) << " vs recorded " << num(w.measured) << "\n";
    if (!res.note.empty()) log << "note: " << res.note << "\n";
    return res.ok ? 0 : 3;
}

int cmd_lattice(const LatticeQueryArgs& args, std::ostream& out) {
    const lattice::KnowledgeBase* kb = &lattice::builtin_kb();
    lattice::KnowledgeBase loaded;
    if (args.rules_path) {
        std::ifstream in(*args.rules_path);
        if (!in) throw ConfigError("cannot open rules file '" + *args.rules_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        loaded = lattice::load_rules(buf.str());
        kb = &loaded;
    }
    auto context = lattice::parse_context(args.context);
    std::set<std::string> facts(args.facts.begin(), args.facts.end());

    if (!args.target) {
        auto cl = lattice::closure(*kb, facts, context);
        for (const auto& [atom, ded] : cl) {
            out << atom;
            if (!ded.trace.empty()) {
                out << " via";
                for (std::size_t step : ded.trace) out << " " << kb->rules[step].location;
            }
            out << "\n";
        }
        return 0;
    }

    auto res = lattice::query(*kb, facts, *args.target, context);
    switch (res.status) {
        case lattice::QueryStatus::DerivedYes: {
            out << "DerivedYes\n";
            for (std::size_t step : res.derivation->trace) {
                const auto& rule = kb->rules[step];
                out << "  " << rule.location << ": " << rule.quote << "\n";
            }
            break;
        }
        case lattice::QueryStatus::BlockedNo:
            out << "BlockedNo witness:" << res.blocker->witness << "\n";
            out << "  " << res.blocker->quote << "\n";
            break;
        case lattice::QueryStatus::Unknown:
            out << "Unknown\n";
            break;
    }
    return 0;
}

}  // namespace isslab::experiment
