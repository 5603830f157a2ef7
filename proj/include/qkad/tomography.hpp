#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "qkad/featuremap.hpp"

namespace qkad {

// Shots for one estimation run, split across the three measurement bases.
// X and Y get floor(total / 3) each; Z absorbs the remainder.
struct ShotPlan {
  long long total = 0;
  long long n_x = 0;
  long long n_y = 0;
  long long n_z = 0;

  long long for_basis(PauliBasis b) const {
    switch (b) {
      case PauliBasis::x:
        return n_x;
      case PauliBasis::y:
        return n_y;
      case PauliBasis::z:
        return n_z;
    }
    return 0;
  }
};

// total must be >= 3 so every basis is measured at least once.
ShotPlan plan_shots(long long total);

// Single-shot estimator 3 U^dag |b><b| U - I for one measured qubit. Trace 1,
// Hermitian, eigenvalues exactly {2, -1}.
std::array<cd, 4> snapshot_matrix(PauliBasis basis, int outcome);

// Per-shot, per-qubit channel applied to sampled bits: with probability
// p_eff = clamp(depolarizing_p + drift_rate * shot_index, 0, 1) the outcome
// is replaced by a fair coin, then flipped with probability readout_flip_p.
// shot_index counts shots within one estimation run, so drift_rate models
// slow decalibration over a run.
struct NoiseConfig {
  double depolarizing_p = 0.0;
  double readout_flip_p = 0.0;
  double drift_rate = 0.0;

  bool enabled() const {
    return depolarizing_p > 0.0 || readout_flip_p > 0.0 || drift_rate > 0.0;
  }
  void validate() const;
};

std::vector<OneQubitRdm> exact_rdms(const FeatureMapCircuit& circuit);

// Samples plan.total measurement shots (bases in the order X, Y, Z) and
// returns per-qubit snapshot means. All qubits of a shot share one sampled
// bitstring, so cross-qubit sampling noise is correlated like on hardware.
std::vector<OneQubitRdm> estimate_rdms(const FeatureMapCircuit& circuit,
                                       const ShotPlan& plan,
                                       const std::optional<NoiseConfig>& noise,
                                       Rng& rng);

// Process-wide count of estimate_rdms calls. Lets callers prove that cached
// RDMs were reused (hyperparameter sweeps must not re-run tomography).
std::uint64_t estimate_invocation_count();
void reset_estimate_invocation_count();

enum class ProbeState { plus, t };

// One-qubit preparation circuits for the precision study: |+> and the
// pi/4-phase T state, written over {RX, RZ}.
FeatureMapCircuit probe_circuit(ProbeState state);

struct PrecisionRow {
  long long shots = 0;
  double mean_d = 0.0;
  double std_d = 0.0;
};

// For every shot count: `repeats` independent estimations, each reduced to
// the per-qubit Frobenius distance to the exact RDM averaged over qubits.
// Rows report mean and sample standard deviation over repeats. Child seeds
// derive from (seed, shots, repeat), so results are schedule independent.
std::vector<PrecisionRow> precision_sweep(
    const FeatureMapCircuit& circuit, std::span<const long long> shot_grid,
    int repeats, const std::optional<NoiseConfig>& noise, std::uint64_t seed);

std::vector<PrecisionRow> precision_sweep(
    ProbeState state, std::span<const long long> shot_grid, int repeats,
    const std::optional<NoiseConfig>& noise, std::uint64_t seed);

// Header shots,mean_d,std_d; values with %.17g.
void write_precision_csv(std::ostream& out,
                         std::span<const PrecisionRow> rows);

}  // namespace qkad
