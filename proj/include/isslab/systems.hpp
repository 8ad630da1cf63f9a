#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isslab/common.hpp"

namespace isslab::systems {

enum class NormTag { L1, L2 };

// State of a finite truncation: n_modes blocks of mode_dim components each.
struct StateVector {
    std::vector<double> data;
    int mode_dim = 1;
    NormTag norm_tag = NormTag::L2;

    int n_modes() const { return static_cast<int>(data.size()) / mode_dim; }
    double* mode(int k) { return data.data() + static_cast<std::size_t>(k - 1) * mode_dim; }
    const double* mode(int k) const {
        return data.data() + static_cast<std::size_t>(k - 1) * mode_dim;
    }
};

// Aggregates mode Euclidean norms: L1 sums them, L2 takes root-sum-square.
double norm(const StateVector& x);

struct OracleResult {
    std::vector<double> value;  // mode state at time t
    bool exact = false;         // false: componentwise upper bound on |state|
};

// Finite truncation of a countable family of low-dimensional mode ODEs.
// Mode indices are 1-based. rhs writes d/dt of one mode given its state and
// the scalar input value.
struct TruncatedModeSystem {
    std::string catalog_id;
    int mode_dim = 1;
    int n_modes = 0;
    NormTag norm_tag = NormTag::L2;
    bool input_free = false;  // rhs ignores u
    bool decoupled = true;    // modes never interact (true for the whole catalog)
    std::vector<double> mode_witness;  // canonical per-mode initial state
    // Component magnitudes at which the rhs loses higher-order smoothness
    // (e.g. cutoff band junctions); the integrator aligns steps with
    // crossings of these levels so no step straddles one.
    std::vector<double> rhs_kink_levels;
    std::function<void(int k, const double* z, double u, double* dz)> rhs;
    std::function<OracleResult(int k, const double* z0, double u_const, double t)> mode_oracle;
    bool oracle_exact = false;

    StateVector zero_state() const;
    StateVector basis_state(int k, double scale = 1.0) const;  // witness placed in mode k
    StateVector witness_state(int k) const { return basis_state(k, 1.0); }
    TruncatedModeSystem with_truncation(int n) const;
};

// Catalog ids: Example1, S1, S2, S1tilde, S3, S4, LinDiagStrong, ScalarISS.
TruncatedModeSystem catalog(const std::string& id, int n_modes);
std::vector<std::string> catalog_ids();

// Odd C^1 cutoff: identity on [0, a/4], zero beyond a/2, smooth (quintic
// smoothstep) transition in between.
double cutoff(double s, double a);
double default_cutoff_width();   // catalog width: min(mode_escape_threshold(), 1/2)
double mode_escape_threshold();  // 2e^2/(e^2-1): start value whose comparison solution escapes by t=1

// Closed-form mode solution where available; throws NoOracleError otherwise
// and SingularityError when a bound's denominator crosses zero before t.
OracleResult exact_solution(const TruncatedModeSystem& sys, int k, const std::vector<double>& z0,
                            double u_const, double t);

// State construction mini-language:
//   zero | e:k | mode:k:(a,b) | list:(v1,v2,...)
// e:k places the canonical mode witness in mode k.
StateVector parse_state(const TruncatedModeSystem& sys, const std::string& text);
std::string format_state(const StateVector& x);

}  // namespace isslab::systems
