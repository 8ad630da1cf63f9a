// Python bindings: a focused slice of the laboratory covering the system
// catalog, numerical flows, empirical stability checks, the quadratic
// certificate helpers, the deduction engine, and the comparison-function
// toolbox. States cross the boundary as flat lists of doubles; reports and
// query results cross as plain dicts.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isslab/estimate.hpp"
#include "isslab/gains.hpp"
#include "isslab/integrate.hpp"
#include "isslab/lattice.hpp"
#include "isslab/lyapunov.hpp"
#include "isslab/signals.hpp"
#include "isslab/systems.hpp"

namespace py = pybind11;
using namespace isslab;
using systems::StateVector;
using systems::TruncatedModeSystem;

namespace {

StateVector state_from(const TruncatedModeSystem& sys, const std::vector<double>& data) {
    if (static_cast<int>(data.size()) != sys.n_modes * sys.mode_dim)
        throw DomainError("state length must equal n_modes * mode_dim");
    StateVector x;
    x.mode_dim = sys.mode_dim;
    x.norm_tag = sys.norm_tag;
    x.data = data;
    return x;
}

estimate::EstimationBudget budget_from(const py::kwargs& kw) {
    estimate::EstimationBudget b;
    auto grab = [&](const char* name, auto& field) {
        if (kw.contains(name)) field = kw[name].cast<std::decay_t<decltype(field)>>();
    };
    grab("r_grid", b.r_grid);
    grab("eps_grid", b.eps_grid);
    grab("horizon", b.horizon);
    grab("input_levels", b.input_levels);
    grab("input_cap", b.input_cap);
    grab("max_switches", b.max_switches);
    grab("random_signals", b.random_signals);
    grab("random_states", b.random_states);
    grab("max_witness_modes", b.max_witness_modes);
    grab("truncations", b.truncations);
    grab("seed", b.seed);
    return b;
}

const char* verdict_name(estimate::Verdict v) {
    return v == estimate::Verdict::Falsified ? "Falsified" : "NoViolationFound";
}

const char* witness_kind_name(estimate::WitnessKind k) {
    switch (k) {
        case estimate::WitnessKind::NormAtTime: return "norm_at_time";
        case estimate::WitnessKind::PeakNorm: return "peak_norm";
        default: return "attainment_time";
    }
}

py::dict report_to_dict(const estimate::EstimationReport& rep) {
    py::dict d;
    d["property"] = rep.property;
    d["verdict"] = verdict_name(rep.verdict);
    d["sigma_table"] = rep.sigma_table;
    d["gamma_table"] = rep.gamma_table;
    d["sup_by_truncation"] = rep.sup_by_truncation;
    d["tau_table"] = rep.tau_table;
    d["mode_table"] = rep.mode_table;
    d["c_hat"] = rep.c_hat;
    d["delta_hat"] = rep.delta_hat;
    d["L_hat"] = rep.L_hat;
    d["has_envelope"] = rep.has_envelope;
    d["notes"] = rep.notes;
    if (rep.witness) {
        py::dict w;
        w["system_id"] = rep.witness->system_id;
        w["x0_spec"] = rep.witness->x0_spec;
        w["u_spec"] = rep.witness->u_spec;
        w["time"] = rep.witness->time;
        w["measured"] = rep.witness->measured;
        w["bound"] = rep.witness->bound;
        w["kind"] = witness_kind_name(rep.witness->kind);
        w["note"] = rep.witness->note;
        d["witness"] = w;
    } else {
        d["witness"] = py::none();
    }
    return d;
}

estimate::StabilityVariant stability_variant(const std::string& name) {
    if (name == "ULS") return estimate::StabilityVariant::ULS;
    if (name == "UGS") return estimate::StabilityVariant::UGS;
    if (name == "UGB") return estimate::StabilityVariant::UGB;
    if (name == "ZeroULS") return estimate::StabilityVariant::ZeroULS;
    if (name == "ZeroUGS") return estimate::StabilityVariant::ZeroUGS;
    throw DomainError("unknown stability variant: " + name);
}

estimate::LimitUniformity limit_uniformity(const std::string& name) {
    if (name == "LIM") return estimate::LimitUniformity::LIM;
    if (name == "sLIM") return estimate::LimitUniformity::sLIM;
    if (name == "ULIM") return estimate::LimitUniformity::ULIM;
    throw DomainError("unknown limit uniformity: " + name);
}

const char* status_name(lattice::QueryStatus s) {
    switch (s) {
        case lattice::QueryStatus::DerivedYes: return "DerivedYes";
        case lattice::QueryStatus::BlockedNo: return "BlockedNo";
        default: return "Unknown";
    }
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Numerical laboratory for stability estimation of truncated mode systems";
    m.attr("__version__") = "0.1.0";

    py::class_<TruncatedModeSystem>(m, "System")
        .def_readonly("catalog_id", &TruncatedModeSystem::catalog_id)
        .def_readonly("mode_dim", &TruncatedModeSystem::mode_dim)
        .def_readonly("n_modes", &TruncatedModeSystem::n_modes)
        .def_readonly("input_free", &TruncatedModeSystem::input_free)
        .def("zero_state", [](const TruncatedModeSystem& s) { return s.zero_state().data; })
        .def(
            "witness_state",
            [](const TruncatedModeSystem& s, int k) { return s.witness_state(k).data; },
            py::arg("k"))
        .def(
            "rhs",
            [](const TruncatedModeSystem& s, int k, const std::vector<double>& z, double u) {
                if (static_cast<int>(z.size()) != s.mode_dim)
                    throw DomainError("mode state length must equal mode_dim");
                std::vector<double> dz(z.size());
                s.rhs(k, z.data(), u, dz.data());
                return dz;
            },
            py::arg("k"), py::arg("z"), py::arg("u"))
        .def("__repr__", [](const TruncatedModeSystem& s) {
            return "<System " + s.catalog_id + " n_modes=" + std::to_string(s.n_modes) + ">";
        });

    m.def("catalog", &systems::catalog, py::arg("id"), py::arg("n_modes"));
    m.def("catalog_ids", &systems::catalog_ids);
    m.def(
        "norm",
        [](const TruncatedModeSystem& sys, const std::vector<double>& data) {
            return systems::norm(state_from(sys, data));
        },
        py::arg("system"), py::arg("state"));

    m.def(
        "flow",
        [](const TruncatedModeSystem& sys, double t, const std::vector<double>& x0,
           double u_level, double rel_tol, double abs_tol) {
            integrate::IntegratorConfig cfg;
            cfg.rel_tol = rel_tol;
            cfg.abs_tol = abs_tol;
            auto u = signals::constant_signal(u_level);
            return integrate::flow(sys, t, state_from(sys, x0), u, cfg).data;
        },
        py::arg("system"), py::arg("t"), py::arg("x0"), py::arg("u_level") = 0.0,
        py::arg("rel_tol") = 1e-9, py::arg("abs_tol") = 1e-12);

    m.def(
        "attainment_time",
        [](const TruncatedModeSystem& sys, const std::vector<double>& x0, double u_level,
           double eps, double horizon) -> std::optional<double> {
            auto u = signals::constant_signal(u_level);
            return estimate::attainment_time(sys, state_from(sys, x0), u, eps,
                                             gains::zero_gain(), horizon);
        },
        py::arg("system"), py::arg("x0"), py::arg("u_level"), py::arg("eps"),
        py::arg("horizon"));

    m.def(
        "check_brs",
        [](const TruncatedModeSystem& sys, double C, double tau, const py::kwargs& kw) {
            return report_to_dict(estimate::check_brs(sys, C, tau, budget_from(kw)));
        },
        py::arg("system"), py::arg("C"), py::arg("tau"));
    m.def(
        "check_stability",
        [](const TruncatedModeSystem& sys, const std::string& variant, const py::kwargs& kw) {
            return report_to_dict(
                estimate::check_stability(sys, stability_variant(variant), budget_from(kw)));
        },
        py::arg("system"), py::arg("variant"));
    m.def(
        "check_limit",
        [](const TruncatedModeSystem& sys, const std::string& uniformity, const py::kwargs& kw) {
            return report_to_dict(estimate::check_limit(sys, limit_uniformity(uniformity),
                                                        gains::zero_gain(), budget_from(kw)));
        },
        py::arg("system"), py::arg("uniformity"));
    m.def(
        "fit_iss_bound",
        [](const TruncatedModeSystem& sys, const py::kwargs& kw) {
            return report_to_dict(estimate::fit_iss_bound(sys, budget_from(kw)));
        },
        py::arg("system"));

    m.def(
        "dini_norm_sq",
        [](const TruncatedModeSystem& sys, const std::vector<double>& x, double u_level) {
            auto lf = lyap::make_norm_sq_lf();
            auto est = lyap::dini_derivative(sys, lf, state_from(sys, x),
                                             signals::constant_signal(u_level));
            return py::make_tuple(est.value, est.error_bar);
        },
        py::arg("system"), py::arg("x"), py::arg("u_level") = 0.0);
    m.def(
        "reach_time_bound",
        [](double r, double eps) { return lyap::nclf_ulim_bound(lyap::make_norm_sq_lf()).tau(r, eps); },
        py::arg("r"), py::arg("eps"));

    m.def("atom_ids", [] { return lattice::atom_ids(); });
    m.def(
        "lattice_query",
        [](const std::vector<std::string>& facts, const std::string& target,
           const std::string& context) {
            const auto& kb = lattice::builtin_kb();
            std::set<std::string> fact_set(facts.begin(), facts.end());
            auto q = lattice::query(kb, fact_set, target, lattice::parse_context(context));
            py::dict d;
            d["status"] = status_name(q.status);
            if (q.derivation) {
                std::vector<std::string> steps;
                for (auto idx : q.derivation->trace) steps.push_back(kb.rules[idx].location);
                d["trace"] = steps;
                d["replay_ok"] = lattice::replay_trace(kb, fact_set, *q.derivation);
            }
            if (q.blocker) d["blocked_by"] = q.blocker->witness;
            return d;
        },
        py::arg("facts"), py::arg("target"), py::arg("context") = "General");
    m.def(
        "lattice_closure",
        [](const std::vector<std::string>& facts, const std::string& context) {
            std::set<std::string> fact_set(facts.begin(), facts.end());
            auto atoms = lattice::closure(lattice::builtin_kb(), fact_set,
                                          lattice::parse_context(context));
            std::vector<std::string> out;
            for (const auto& [atom, ded] : atoms) out.push_back(atom);
            return out;
        },
        py::arg("facts"), py::arg("context") = "General");
    m.def(
        "lattice_consistency",
        [](const std::vector<std::string>& true_atoms,
           const std::vector<std::string>& false_atoms, const std::string& context) {
            auto conflicts = lattice::consistency_check(
                lattice::builtin_kb(), {true_atoms.begin(), true_atoms.end()},
                {false_atoms.begin(), false_atoms.end()}, lattice::parse_context(context));
            std::vector<std::string> out;
            for (const auto& c : conflicts) out.push_back(c.atom);
            return out;
        },
        py::arg("true_atoms"), py::arg("false_atoms"), py::arg("context") = "General");

    m.def(
        "power_eval",
        [](double c, double p, double s) { return gains::eval(gains::power_gain(c, p), s); },
        py::arg("c"), py::arg("p"), py::arg("s"));
    m.def(
        "power_inverse",
        [](double c, double p, double y) { return gains::inverse(gains::power_gain(c, p), y); },
        py::arg("c"), py::arg("p"), py::arg("y"));
}
