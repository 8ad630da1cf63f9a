#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isslab/gains.hpp"
#include "isslab/integrate.hpp"
#include "isslab/signals.hpp"
#include "isslab/systems.hpp"

namespace isslab::estimate {

// Sampling budget shared by the empirical checkers. Verdicts are always
// relative to this budget: NoViolationFound is not a proof.
struct EstimationBudget {
    std::vector<double> r_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    std::vector<double> eps_grid = {0.01, 0.1, 1.0};
    double horizon = 20.0;
    std::vector<double> input_levels = {0.0, 0.5, 1.0, 2.0};
    double input_cap = 2.0;     // magnitude cap for randomized inputs
    int max_switches = 3;       // switches in randomized piecewise-constant inputs
    int random_signals = 3;     // randomized inputs per family
    int random_states = 4;      // randomized states per radius
    int max_witness_modes = 12; // per-mode witness family cap
    std::vector<int> truncations = {8, 16, 32, 64};
    std::uint64_t seed = 20240601;
};

enum class Verdict { NoViolationFound, Falsified };

// What a witness's `measured` number is, so replays know what to recompute.
enum class WitnessKind { NormAtTime, PeakNorm, AttainmentTime };

struct Witness {
    std::string system_id;
    int truncation = 0;
    std::string x0_spec;  // state mini-language text
    std::string u_spec;   // signal text form
    double time = 0.0;
    double measured = 0.0;
    double bound = 0.0;  // the level whose violation the witness exhibits
    WitnessKind kind = WitnessKind::PeakNorm;
    std::string note;
};

struct EstimationReport {
    std::string property;
    Verdict verdict = Verdict::NoViolationFound;
    std::optional<Witness> witness;
    std::vector<std::array<double, 2>> sigma_table;        // (r, sigma_hat)
    std::vector<std::array<double, 2>> gamma_table;        // (input level, gamma_hat)
    std::vector<std::array<double, 2>> sup_by_truncation;  // (N, sup)
    std::vector<std::array<double, 3>> tau_table;          // (eps, r, tau_hat)
    std::vector<std::array<double, 2>> mode_table;         // (mode k, measured)
    double c_hat = 0.0;
    double delta_hat = 0.0;
    double L_hat = 0.0;
    gains::KLFunction envelope;  // only set by fit_iss_bound
    bool has_envelope = false;
    std::string notes;
    EstimationBudget budget;
};

// First sampled time t <= T with ||phi(t,x0,u)|| <= eps + gamma(sup||u||),
// refined by interpolation on the stored grid; empty if never attained.
std::optional<double> attainment_time(const systems::TruncatedModeSystem& sys,
                                      const systems::StateVector& x0,
                                      const signals::InputSignal& u, double eps,
                                      const gains::ScalarGainFunction& gamma, double T,
                                      const integrate::IntegratorConfig& cfg = {});

// Reachability-set boundedness: sup ||phi|| over sampled ||x|| <= C,
// ||u|| <= C, t <= tau, swept across the budget's truncations. Falsified when
// the sup keeps growing by >= 1.5 per truncation doubling.
EstimationReport check_brs(const systems::TruncatedModeSystem& sys, double C, double tau,
                           const EstimationBudget& budget,
                           const integrate::IntegratorConfig& cfg = {});

enum class StabilityVariant { ULS, UGS, UGB, ZeroULS, ZeroUGS };

EstimationReport check_stability(const systems::TruncatedModeSystem& sys, StabilityVariant variant,
                                 const EstimationBudget& budget,
                                 const integrate::IntegratorConfig& cfg = {});

enum class LimitUniformity { LIM, sLIM, ULIM };

EstimationReport check_limit(const systems::TruncatedModeSystem& sys, LimitUniformity uniformity,
                             const gains::ScalarGainFunction& gamma,
                             const EstimationBudget& budget,
                             const integrate::IntegratorConfig& cfg = {});

enum class AgUniformity { AG, sAG, UAG };

EstimationReport check_ag(const systems::TruncatedModeSystem& sys, AgUniformity uniformity,
                          const gains::ScalarGainFunction& gamma, const EstimationBudget& budget,
                          const integrate::IntegratorConfig& cfg = {});

// Fits a decay envelope beta(r, t) to trajectory norms after subtracting a
// fitted input-gain tail; Falsified when residuals at fixed (r, t-late) never
// decay and do not shrink with truncation.
EstimationReport fit_iss_bound(const systems::TruncatedModeSystem& sys,
                               const EstimationBudget& budget,
                               const integrate::IntegratorConfig& cfg = {});

// Continuity at the equilibrium: largest sampled delta on a geometric grid
// below eps such that ||x||,||u|| <= delta keeps ||phi(t)|| <= eps for t <= h.
EstimationReport check_cep(const systems::TruncatedModeSystem& sys, double eps, double h,
                           const EstimationBudget& budget,
                           const integrate::IntegratorConfig& cfg = {});

struct GronwallParams {
    double M = 0.0;
    double lambda = 0.0;
    double L_f = 0.0;
};

EstimationReport estimate_flow_lipschitz(const systems::TruncatedModeSystem& sys, double R,
                                         double tau, const EstimationBudget& budget,
                                         const integrate::IntegratorConfig& cfg = {},
                                         const std::optional<GronwallParams>& gronwall = {});

enum class SearchObjective { BRS, UGS, ULS, ULIM, UAG, ISS, CEP };

// Falsification-witness polish: runs the matching checker, then coordinate
// search over constant-input magnitude and mode index to maximize the
// violation margin. Every returned witness replays.
std::optional<Witness> adversarial_search(const systems::TruncatedModeSystem& sys,
                                          SearchObjective objective,
                                          const EstimationBudget& budget,
                                          const integrate::IntegratorConfig& cfg = {});

struct ReplayResult {
    bool ok = false;
    double measured = 0.0;
    std::string note;
};

// Re-simulates a witness on the given system and confirms the recorded
// measurement within 2x integrator tolerance (plus grid slack for times).
ReplayResult replay_witness(const systems::TruncatedModeSystem& sys, const Witness& w,
                            const integrate::IntegratorConfig& cfg = {});

}  // namespace isslab::estimate
