#include "qkad/tomography.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "qkad/parallel.hpp"

namespace qkad {

namespace {

std::atomic<std::uint64_t> g_estimate_calls{0};

const PauliBasis kBasisOrder[3] = {PauliBasis::x, PauliBasis::y,
                                   PauliBasis::z};

}  // namespace

ShotPlan plan_shots(long long total) {
  if (total < 3)
    throw std::invalid_argument("shot budget must be at least 3");
  ShotPlan plan;
  plan.total = total;
  plan.n_x = total / 3;
  plan.n_y = total / 3;
  plan.n_z = total - plan.n_x - plan.n_y;
  return plan;
}

std::array<cd, 4> snapshot_matrix(PauliBasis basis, int outcome) {
  if (outcome != 0 && outcome != 1)
    throw std::invalid_argument("outcome must be 0 or 1");
  // 3 U^dag |b><b| U - I with U the basis rotation (X: H, Y: H S^dag, Z: I).
  // The six results are half-integer matrices; write them exactly instead of
  // multiplying 1/sqrt(2) factors back together.
  const double s = outcome == 0 ? 1.0 : -1.0;
  switch (basis) {
    case PauliBasis::x:
      return {cd(0.5, 0), cd(1.5 * s, 0), cd(1.5 * s, 0), cd(0.5, 0)};
    case PauliBasis::y:
      return {cd(0.5, 0), cd(0, -1.5 * s), cd(0, 1.5 * s), cd(0.5, 0)};
    case PauliBasis::z:
      return {cd(0.5 + 1.5 * s, 0), cd(0, 0), cd(0, 0), cd(0.5 - 1.5 * s, 0)};
  }
  throw std::invalid_argument("unknown Pauli basis");
}

void NoiseConfig::validate() const {
  if (depolarizing_p < 0.0 || depolarizing_p > 1.0)
    throw std::invalid_argument("depolarizing_p outside [0, 1]");
  if (readout_flip_p < 0.0 || readout_flip_p > 1.0)
    throw std::invalid_argument("readout_flip_p outside [0, 1]");
  if (drift_rate < 0.0)
    throw std::invalid_argument("drift_rate must be non-negative");
}

std::vector<OneQubitRdm> exact_rdms(const FeatureMapCircuit& circuit) {
  const StateVector state = simulate(circuit);
  std::vector<OneQubitRdm> rdms;
  rdms.reserve(static_cast<std::size_t>(state.num_qubits()));
  for (int q = 0; q < state.num_qubits(); ++q)
    rdms.push_back(partial_trace_one_qubit(state, q));
  return rdms;
}

std::vector<OneQubitRdm> estimate_rdms(const FeatureMapCircuit& circuit,
                                       const ShotPlan& plan,
                                       const std::optional<NoiseConfig>& noise,
                                       Rng& rng) {
  if (plan.n_x < 1 || plan.n_y < 1 || plan.n_z < 1 ||
      plan.n_x + plan.n_y + plan.n_z != plan.total)
    throw std::invalid_argument("inconsistent shot plan");
  if (noise) noise->validate();

  g_estimate_calls.fetch_add(1, std::memory_order_relaxed);

  const int nq = circuit.spec.num_qubits;
  const StateVector base = simulate(circuit);
  const GateMatrix h = make_gate(GateId::h);
  const GateMatrix sdg = make_gate(GateId::sdg);
  const bool noisy = noise && noise->enabled();

  // ones[q][basis]: outcome-1 counts, the sufficient statistic for the
  // snapshot mean.
  std::vector<std::array<long long, 3>> ones(
      static_cast<std::size_t>(nq), std::array<long long, 3>{0, 0, 0});

  long long shot_index = 0;
  for (int bi = 0; bi < 3; ++bi) {
    const PauliBasis basis = kBasisOrder[bi];
    const long long n_b = plan.for_basis(basis);

    StateVector rotated = base;
    for (int q = 0; q < nq; ++q) {
      const int t[1] = {q};
      if (basis == PauliBasis::x) {
        rotated.apply(h, t);
      } else if (basis == PauliBasis::y) {
        rotated.apply(sdg, t);
        rotated.apply(h, t);
      }
    }
    std::vector<double> cdf = rotated.probabilities();
    std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
    const double scale = cdf.back();

    for (long long s = 0; s < n_b; ++s, ++shot_index) {
      const double u = rng.uniform() * scale;
      std::size_t idx = static_cast<std::size_t>(
          std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
      if (idx >= cdf.size()) idx = cdf.size() - 1;
      std::uint64_t bits = idx;
      if (noisy) {
        const double p_eff = std::clamp(
            noise->depolarizing_p + noise->drift_rate * double(shot_index),
            0.0, 1.0);
        for (int q = 0; q < nq; ++q) {
          bool bit = (bits >> q) & 1u;
          if (p_eff > 0.0 && rng.bernoulli(p_eff)) bit = rng.bernoulli(0.5);
          if (noise->readout_flip_p > 0.0 && rng.bernoulli(noise->readout_flip_p))
            bit = !bit;
          bits = (bits & ~(std::uint64_t{1} << q)) |
                 (std::uint64_t{bit} << q);
        }
      }
      for (int q = 0; q < nq; ++q) ones[q][bi] += (bits >> q) & 1u;
    }
  }

  // Mean of 3 U^dag |b><b| U - I over all shots, accumulated from counts.
  // Snapshot entries are halves and small integers, so the per-basis sums
  // below are exact; m11 is written as 1 - m00 to keep the trace exact.
  std::vector<OneQubitRdm> rdms;
  rdms.reserve(static_cast<std::size_t>(nq));
  const double total = static_cast<double>(plan.total);
  for (int q = 0; q < nq; ++q) {
    const auto kx = static_cast<double>(ones[q][0]);
    const auto ky = static_cast<double>(ones[q][1]);
    const auto kz = static_cast<double>(ones[q][2]);
    const auto nx = static_cast<double>(plan.n_x);
    const auto ny = static_cast<double>(plan.n_y);
    const auto nz = static_cast<double>(plan.n_z);
    const double m00 = (2.0 * nz - 3.0 * kz + 0.5 * (nx + ny)) / total;
    const cd m01{1.5 * (nx - 2.0 * kx) / total, 1.5 * (2.0 * ky - ny) / total};
    rdms.push_back(OneQubitRdm(
        {cd{m00, 0.0}, m01, std::conj(m01), cd{1.0 - m00, 0.0}},
        RdmKind::estimated));
  }
  return rdms;
}

std::uint64_t estimate_invocation_count() {
  return g_estimate_calls.load(std::memory_order_relaxed);
}

void reset_estimate_invocation_count() {
  g_estimate_calls.store(0, std::memory_order_relaxed);
}

FeatureMapCircuit probe_circuit(ProbeState state) {
  FeatureMapCircuit c;
  c.spec.variant = FeatureMapVariant::rxx;
  c.spec.num_qubits = 1;
  c.spec.layers = 1;
  // RX(pi/2) then RZ(phi) gives (|0> + e^{i phi'} |1>)/sqrt(2) up to a global
  // phase; phi = pi/2 lands on |+>, 3 pi/4 on the T state.
  const double phi = state == ProbeState::plus ? kPi / 2.0 : 3.0 * kPi / 4.0;
  c.gates.push_back({GateId::rx, 0, -1, kPi / 2.0, true});
  c.gates.push_back({GateId::rz, 0, -1, phi, true});
  return c;
}

std::vector<PrecisionRow> precision_sweep(
    const FeatureMapCircuit& circuit, std::span<const long long> shot_grid,
    int repeats, const std::optional<NoiseConfig>& noise, std::uint64_t seed) {
  if (repeats < 2)
    throw std::invalid_argument("need at least two repeats for a std dev");
  const std::vector<OneQubitRdm> exact = exact_rdms(circuit);
  const int nq = circuit.spec.num_qubits;

  std::vector<std::vector<double>> dists(
      shot_grid.size(), std::vector<double>(static_cast<std::size_t>(repeats)));
  parallel_for(shot_grid.size() * static_cast<std::size_t>(repeats),
               [&](std::size_t task) {
                 const std::size_t si = task / static_cast<std::size_t>(repeats);
                 const int rep = static_cast<int>(
                     task % static_cast<std::size_t>(repeats));
                 const ShotPlan plan = plan_shots(shot_grid[si]);
                 char path[64];
                 std::snprintf(path, sizeof(path), "sweep/shots=%lld/rep=%d",
                               shot_grid[si], rep);
                 Rng rng(child_seed(seed, path));
                 const auto est = estimate_rdms(circuit, plan, noise, rng);
                 double d = 0.0;
                 for (int q = 0; q < nq; ++q)
                   d += frobenius_distance(est[static_cast<std::size_t>(q)],
                                           exact[static_cast<std::size_t>(q)]);
                 dists[si][static_cast<std::size_t>(rep)] = d / nq;
               });

  std::vector<PrecisionRow> rows;
  rows.reserve(shot_grid.size());
  for (std::size_t si = 0; si < shot_grid.size(); ++si) {
    const auto& v = dists[si];
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double d : v) mean += d;
    mean /= n;
    double ss = 0.0;
    for (double d : v) ss += (d - mean) * (d - mean);
    rows.push_back({shot_grid[si], mean, std::sqrt(ss / (n - 1.0))});
  }
  return rows;
}

std::vector<PrecisionRow> precision_sweep(
    ProbeState state, std::span<const long long> shot_grid, int repeats,
    const std::optional<NoiseConfig>& noise, std::uint64_t seed) {
  return precision_sweep(probe_circuit(state), shot_grid, repeats, noise,
                         seed);
}

void write_precision_csv(std::ostream& out,
                         std::span<const PrecisionRow> rows) {
  out << "shots,mean_d,std_d\n";
  char buf[96];
  for (const PrecisionRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g\n", r.shots, r.mean_d,
                  r.std_d);
    out << buf;
  }
}

}  // namespace qkad
