#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <sstream>
#include <vector>

#include "qkad/rng.hpp"
#include "qkad/tomography.hpp"
#include "support/oracles.hpp"

using namespace qkad;

namespace {

FeatureMapCircuit small_circuit(FeatureMapVariant v,
                                std::span<const double> x) {
  return build_feature_map(
      FeatureMapSpec::for_features(v, static_cast<int>(x.size())), x);
}

oracle::Mat2 to_mat2(const std::array<cd, 4>& m) {
  return {m[0], m[1], m[2], m[3]};
}

double rdm_diff(const OneQubitRdm& a, const OneQubitRdm& b) {
  return frobenius_distance(a, b);
}

}  // namespace

TEST_CASE("shot plans split across the three bases") {
  const ShotPlan p200 = plan_shots(200);
  CHECK(p200.n_x == 66);
  CHECK(p200.n_y == 66);
  CHECK(p200.n_z == 68);
  CHECK(p200.total == 200);

  const ShotPlan p3 = plan_shots(3);
  CHECK(p3.n_x == 1);
  CHECK(p3.n_y == 1);
  CHECK(p3.n_z == 1);

  const ShotPlan p10 = plan_shots(10);
  CHECK(p10.n_x == 3);
  CHECK(p10.n_y == 3);
  CHECK(p10.n_z == 4);

  const ShotPlan p1000 = plan_shots(1000);
  CHECK(p1000.n_x == 333);
  CHECK(p1000.n_y == 333);
  CHECK(p1000.n_z == 334);

  CHECK(p200.for_basis(PauliBasis::x) == 66);
  CHECK(p200.for_basis(PauliBasis::z) == 68);

  CHECK_THROWS_AS(plan_shots(2), std::invalid_argument);
  CHECK_THROWS_AS(plan_shots(0), std::invalid_argument);
}

TEST_CASE("snapshot matrices have trace one and eigenvalues {2, -1}") {
  for (PauliBasis b : {PauliBasis::x, PauliBasis::y, PauliBasis::z}) {
    for (int outcome : {0, 1}) {
      const std::array<cd, 4> m = snapshot_matrix(b, outcome);
      CHECK(std::abs(m[0] + m[3] - cd(1, 0)) <= 1e-15);
      CHECK(std::abs(m[1] - std::conj(m[2])) <= 1e-15);
      // eigenvalues of [[a, c],[conj(c), d]]: trace/2 +- sqrt((a-d)^2/4+|c|^2)
      const double a = m[0].real(), d = m[3].real();
      const double disc =
          std::sqrt((a - d) * (a - d) / 4.0 + std::norm(m[1]));
      CHECK(0.5 + disc == doctest::Approx(2.0).epsilon(1e-14));
      CHECK(0.5 - disc == doctest::Approx(-1.0).epsilon(1e-14));
    }
  }

  // the six matrices in closed form
  const auto z0 = snapshot_matrix(PauliBasis::z, 0);
  CHECK(z0[0] == cd(2, 0));
  CHECK(z0[3] == cd(-1, 0));
  const auto z1 = snapshot_matrix(PauliBasis::z, 1);
  CHECK(z1[0] == cd(-1, 0));
  CHECK(z1[3] == cd(2, 0));
  const auto x0 = snapshot_matrix(PauliBasis::x, 0);
  CHECK(x0[0] == cd(0.5, 0));
  CHECK(x0[1] == cd(1.5, 0));
  const auto x1 = snapshot_matrix(PauliBasis::x, 1);
  CHECK(x1[1] == cd(-1.5, 0));
  const auto y0 = snapshot_matrix(PauliBasis::y, 0);
  CHECK(y0[1] == cd(0, -1.5));
  const auto y1 = snapshot_matrix(PauliBasis::y, 1);
  CHECK(y1[1] == cd(0, 1.5));
}

TEST_CASE("snapshot estimator is unbiased on exact outcome probabilities") {
  // For any state, averaging snapshot matrices over the exact outcome
  // distribution of the three bases must return the state itself.
  const std::array<double, 2> x = {0.31, -0.62};
  const FeatureMapCircuit c = small_circuit(FeatureMapVariant::cx, x);
  const StateVector psi = simulate(c);
  const OneQubitRdm rho = partial_trace_one_qubit(psi, 0);

  oracle::Mat2 mean{};
  for (PauliBasis b : {PauliBasis::x, PauliBasis::y, PauliBasis::z}) {
    // rotate a copy the way the sampler does and read p(outcome)
    StateVector rotated = psi;
    const int t[] = {0};
    if (b == PauliBasis::x) {
      rotated.apply(make_gate(GateId::h), t);
    } else if (b == PauliBasis::y) {
      rotated.apply(make_gate(GateId::sdg), t);
      rotated.apply(make_gate(GateId::h), t);
    }
    double p0 = 0.0;
    const std::vector<double> probs = rotated.probabilities();
    for (std::size_t i = 0; i < probs.size(); ++i)
      if ((i & 1) == 0) p0 += probs[i];
    const oracle::Mat2 s0 = to_mat2(snapshot_matrix(b, 0));
    const oracle::Mat2 s1 = to_mat2(snapshot_matrix(b, 1));
    for (int k = 0; k < 4; ++k)
      mean[k] += (p0 * s0[k] + (1.0 - p0) * s1[k]) / 3.0;
  }

  const oracle::Mat2 target = {rho.at(0, 0), rho.at(0, 1), rho.at(1, 0),
                               rho.at(1, 1)};
  CHECK(oracle::max_abs_diff(mean, target) <= 1e-12);
}

TEST_CASE("estimates are deterministic per seed and converge to exact") {
  const std::array<double, 4> x = {0.4, -0.3, 0.7, 0.1};
  const FeatureMapCircuit c = small_circuit(FeatureMapVariant::ecr, x);
  const std::vector<OneQubitRdm> exact = exact_rdms(c);
  REQUIRE(exact.size() == 2);

  const ShotPlan plan = plan_shots(100000);
  Rng r1(child_seed(11, "tomo/det"));
  Rng r2(child_seed(11, "tomo/det"));
  const std::vector<OneQubitRdm> e1 =
      estimate_rdms(c, plan, std::nullopt, r1);
  const std::vector<OneQubitRdm> e2 =
      estimate_rdms(c, plan, std::nullopt, r2);
  REQUIRE(e1.size() == 2);
  for (int q = 0; q < 2; ++q) {
    CHECK(rdm_diff(e1[q], e2[q]) == 0.0);
    CHECK(e1[q].kind() == RdmKind::estimated);
    CHECK(rdm_diff(e1[q], exact[q]) <= 0.02);
  }
}

TEST_CASE("statistical mean of the off diagonal matches the state") {
  // |+> has rho01 = 0.5; average estimates over repeats and compare within
  // five standard errors.
  const FeatureMapCircuit probe = probe_circuit(ProbeState::plus);
  const ShotPlan plan = plan_shots(300);
  const int repeats = 200;
  std::vector<double> re01(repeats);
  for (int i = 0; i < repeats; ++i) {
    Rng rng(child_seed(5, "tomo/mean/" + std::to_string(i)));
    const std::vector<OneQubitRdm> est =
        estimate_rdms(probe, plan, std::nullopt, rng);
    re01[i] = est[0].at(0, 1).real();
  }
  double mu = 0.0;
  for (double v : re01) mu += v;
  mu /= repeats;
  double var = 0.0;
  for (double v : re01) var += (v - mu) * (v - mu);
  var /= repeats - 1;
  const double sem = std::sqrt(var / repeats);
  CHECK(std::abs(mu - 0.5) <= 5.0 * sem + 1e-12);
}

TEST_CASE("full depolarizing noise drives estimates to the maximally mixed "
          "state") {
  const FeatureMapCircuit probe = probe_circuit(ProbeState::plus);
  NoiseConfig noise;
  noise.depolarizing_p = 1.0;
  Rng rng(child_seed(3, "tomo/depol"));
  const std::vector<OneQubitRdm> est =
      estimate_rdms(probe, plan_shots(30000), noise, rng);
  const OneQubitRdm mixed({cd(0.5, 0), cd(0, 0), cd(0, 0), cd(0.5, 0)},
                          RdmKind::exact);
  CHECK(rdm_diff(est[0], mixed) <= 0.05);
}

TEST_CASE("certain readout flips negate the plus coherence") {
  // flipping every outcome maps <X> = 1 to <X> = -1.
  const FeatureMapCircuit probe = probe_circuit(ProbeState::plus);
  NoiseConfig noise;
  noise.readout_flip_p = 1.0;
  Rng rng(child_seed(3, "tomo/flip"));
  const std::vector<OneQubitRdm> est =
      estimate_rdms(probe, plan_shots(30000), noise, rng);
  CHECK(est[0].at(0, 1).real() == doctest::Approx(-0.5).epsilon(0.1));
}

TEST_CASE("extreme drift saturates without crashing") {
  const FeatureMapCircuit probe = probe_circuit(ProbeState::t);
  NoiseConfig noise;
  noise.drift_rate = 10.0;  // p_eff clamps to 1 after the first shot
  Rng rng(child_seed(3, "tomo/drift"));
  const std::vector<OneQubitRdm> est =
      estimate_rdms(probe, plan_shots(20000), noise, rng);
  const OneQubitRdm mixed({cd(0.5, 0), cd(0, 0), cd(0, 0), cd(0.5, 0)},
                          RdmKind::exact);
  CHECK(rdm_diff(est[0], mixed) <= 0.06);
}

TEST_CASE("noise configs reject values outside their ranges") {
  NoiseConfig bad;
  bad.depolarizing_p = -0.1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.depolarizing_p = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.depolarizing_p = 0.0;
  bad.readout_flip_p = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.readout_flip_p = 0.0;
  bad.drift_rate = -1e-9;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.drift_rate = 0.0;
  CHECK_NOTHROW(bad.validate());
}

TEST_CASE("invocation counter tracks estimate calls only") {
  reset_estimate_invocation_count();
  CHECK(estimate_invocation_count() == 0);

  const std::array<double, 2> x = {0.2, 0.4};
  const FeatureMapCircuit c = small_circuit(FeatureMapVariant::cx, x);
  (void)exact_rdms(c);
  CHECK(estimate_invocation_count() == 0);

  Rng rng(1);
  (void)estimate_rdms(c, plan_shots(30), std::nullopt, rng);
  CHECK(estimate_invocation_count() == 1);
  (void)estimate_rdms(c, plan_shots(30), std::nullopt, rng);
  CHECK(estimate_invocation_count() == 2);
  reset_estimate_invocation_count();
  CHECK(estimate_invocation_count() == 0);
}

TEST_CASE("probe circuits prepare the documented states") {
  const StateVector plus = simulate(probe_circuit(ProbeState::plus));
  // |+> up to a global phase: equal magnitudes, relative phase 0
  const cd a = plus.amplitude(0), b = plus.amplitude(1);
  CHECK(std::abs(std::abs(a) - 1.0 / std::sqrt(2.0)) <= 1e-12);
  CHECK(std::abs(b / a - cd(1, 0)) <= 1e-12);

  const std::vector<OneQubitRdm> t = exact_rdms(probe_circuit(ProbeState::t));
  REQUIRE(t.size() == 1);
  CHECK(std::abs(t[0].at(0, 0) - cd(0.5, 0)) <= 1e-12);
  CHECK(std::abs(t[0].at(0, 1) - cd(0.35355339059327373,
                                    -0.35355339059327373)) <= 1e-8);
}

TEST_CASE("precision sweep is deterministic and tightens with shots") {
  const long long grid[] = {100, 10000};
  const std::vector<PrecisionRow> a =
      precision_sweep(ProbeState::plus, grid, 30, std::nullopt, 42);
  const std::vector<PrecisionRow> b =
      precision_sweep(ProbeState::plus, grid, 30, std::nullopt, 42);
  REQUIRE(a.size() == 2);
  CHECK(a[0].shots == 100);
  CHECK(a[1].shots == 10000);
  CHECK(a[0].mean_d == b[0].mean_d);
  CHECK(a[1].std_d == b[1].std_d);
  CHECK(a[1].mean_d < a[0].mean_d);
  CHECK(a[0].mean_d > 0.0);
  CHECK(a[0].std_d > 0.0);

  CHECK_THROWS_AS(
      precision_sweep(ProbeState::plus, grid, 1, std::nullopt, 42),
      std::invalid_argument);
}

TEST_CASE("precision csv uses the documented header") {
  const std::vector<PrecisionRow> rows = {{100, 0.5, 0.25}};
  std::ostringstream out;
  write_precision_csv(out, rows);
  CHECK(out.str() == "shots,mean_d,std_d\n100,0.5,0.25\n");
}
