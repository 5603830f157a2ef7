#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qkad/featuremap.hpp"
#include "qkad/rng.hpp"
#include "qkad/tomography.hpp"
#include "support/oracles.hpp"

using namespace qkad;
using oracle::Mat2;

namespace {

Mat2 gate_as_mat2(GateId id, double angle, bool has_angle) {
  const GateMatrix g = has_angle
                           ? make_gate(id, std::array<double, 1>{angle})
                           : make_gate(id);
  Mat2 m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m[r * 2 + c] = g.at(r, c);
  return m;
}

// Multiplies a one-qubit gate list in application order into a single matrix.
Mat2 compose(const std::vector<CircuitGate>& gates) {
  Mat2 acc = {cd(1, 0), cd(0, 0), cd(0, 0), cd(1, 0)};
  for (const CircuitGate& g : gates)
    acc = oracle::mul2(gate_as_mat2(g.id, g.angle, g.has_angle), acc);
  return acc;
}

}  // namespace

TEST_CASE("qubit count is ceil(features / 2)") {
  CHECK(FeatureMapSpec::for_features(FeatureMapVariant::cx, 20).num_qubits ==
        10);
  CHECK(FeatureMapSpec::for_features(FeatureMapVariant::cx, 5).num_qubits ==
        3);
  CHECK(FeatureMapSpec::for_features(FeatureMapVariant::cx, 1).num_qubits ==
        1);
  CHECK_THROWS_AS(FeatureMapSpec::for_features(FeatureMapVariant::cx, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(FeatureMapSpec::for_features(FeatureMapVariant::cx, 4, 0),
                  std::invalid_argument);
}

TEST_CASE("single layer circuit lists encodings then the entangler chain") {
  const std::array<double, 4> x = {0.1, 0.2, 0.3, 0.4};
  const FeatureMapSpec spec =
      FeatureMapSpec::for_features(FeatureMapVariant::cx, 4);
  const FeatureMapCircuit c = build_feature_map(spec, x);

  REQUIRE(c.gates.size() == 5);
  CHECK(c.gates[0].id == GateId::rx);
  CHECK(c.gates[0].q0 == 0);
  CHECK(c.gates[0].angle == doctest::Approx(kPi * 0.1));
  CHECK(c.gates[1].id == GateId::rz);
  CHECK(c.gates[1].q0 == 0);
  CHECK(c.gates[1].angle == doctest::Approx(kPi * 0.2));
  CHECK(c.gates[2].id == GateId::rx);
  CHECK(c.gates[2].q0 == 1);
  CHECK(c.gates[2].angle == doctest::Approx(kPi * 0.3));
  CHECK(c.gates[3].id == GateId::rz);
  CHECK(c.gates[3].q0 == 1);
  CHECK(c.gates[3].angle == doctest::Approx(kPi * 0.4));
  CHECK(c.gates[4].id == GateId::cx);
  CHECK(c.gates[4].q0 == 0);
  CHECK(c.gates[4].q1 == 1);
  CHECK_FALSE(c.gates[4].has_angle);
}

TEST_CASE("odd feature counts pad the final rz angle with zero") {
  const std::array<double, 3> x = {0.1, 0.2, 0.3};
  const FeatureMapCircuit c = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::cx, 3), x);
  REQUIRE(c.gates.size() == 5);
  CHECK(c.gates[2].id == GateId::rx);
  CHECK(c.gates[2].angle == doctest::Approx(kPi * 0.3));
  CHECK(c.gates[3].id == GateId::rz);
  CHECK(c.gates[3].angle == 0.0);
}

TEST_CASE("rxx entanglers carry the fixed pi/2 angle") {
  const std::array<double, 6> x = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  const FeatureMapCircuit c = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::rxx, 6), x);
  int entanglers = 0;
  for (const CircuitGate& g : c.gates)
    if (g.id == GateId::rxx) {
      ++entanglers;
      CHECK(g.has_angle);
      CHECK(g.angle == kPi / 2);
    }
  CHECK(entanglers == 2);
  CHECK(c.gates.back().q0 == 1);
  CHECK(c.gates.back().q1 == 2);
}

TEST_CASE("two layers repeat the whole block") {
  const std::array<double, 4> x = {0.1, 0.2, 0.3, 0.4};
  const FeatureMapCircuit one = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::ecr, 4, 1), x);
  const FeatureMapCircuit two = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::ecr, 4, 2), x);
  REQUIRE(two.gates.size() == 2 * one.gates.size());
  for (std::size_t i = 0; i < one.gates.size(); ++i) {
    for (std::size_t off : {std::size_t{0}, one.gates.size()}) {
      CHECK(two.gates[i + off].id == one.gates[i].id);
      CHECK(two.gates[i + off].q0 == one.gates[i].q0);
      CHECK(two.gates[i + off].q1 == one.gates[i].q1);
      CHECK(two.gates[i + off].angle == one.gates[i].angle);
    }
  }
}

TEST_CASE("angle scale multiplies every encoding angle") {
  const std::array<double, 2> x = {0.5, -0.25};
  const FeatureMapCircuit c = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::cx, 2, 1, 2.0), x);
  CHECK(c.gates[0].angle == doctest::Approx(1.0));
  CHECK(c.gates[1].angle == doctest::Approx(-0.5));
}

TEST_CASE("sample length must match the spec") {
  const std::array<double, 3> x = {0.1, 0.2, 0.3};
  CHECK_THROWS_AS(
      build_feature_map(FeatureMapSpec::for_features(FeatureMapVariant::cx, 6),
                        x),
      std::invalid_argument);
}

TEST_CASE("rx decomposition reproduces the rotation up to global phase") {
  Rng rng(child_seed(7, "featuremap/decompose"));
  std::vector<double> thetas = {0.0, kPi, -2.3, 5.0};
  for (int i = 0; i < 4; ++i) thetas.push_back(rng.uniform(-6.0, 6.0));
  for (double th : thetas) {
    const std::vector<CircuitGate> seq = decompose_rx(th);
    REQUIRE(seq.size() == 5);
    CHECK(seq[0].id == GateId::rz);
    CHECK(seq[1].id == GateId::sx);
    CHECK(seq[2].id == GateId::rz);
    CHECK(seq[2].angle == doctest::Approx(th + kPi));
    CHECK(seq[3].id == GateId::sx);
    CHECK(seq[4].id == GateId::rz);
    CHECK(oracle::equal_up_to_phase(compose(seq), oracle::rot_x(th), 1e-12));
  }
}

TEST_CASE("transpile rewrites rx for cx and ecr, leaves rxx alone") {
  const std::array<double, 4> x = {0.37, -0.8, 0.12, 0.95};

  for (FeatureMapVariant v :
       {FeatureMapVariant::cx, FeatureMapVariant::ecr}) {
    const FeatureMapCircuit raw =
        build_feature_map(FeatureMapSpec::for_features(v, 4), x);
    const NativeCheck before = validate_native(raw);
    CHECK_FALSE(before.ok);
    CHECK(before.gate == "RX");
    CHECK(before.gate_index == 0);

    const FeatureMapCircuit native = transpile_to_native(raw);
    CHECK(validate_native(native).ok);

    // same state up to global phase, and identical reduced density matrices
    const StateVector a = simulate(raw);
    const StateVector b = simulate(native);
    REQUIRE(a.dim() == b.dim());
    // compare via the overlap |<a|b>| = 1
    cd overlap = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
      overlap += std::conj(a.amplitude(i)) * b.amplitude(i);
    CHECK(std::abs(std::abs(overlap) - 1.0) <= 1e-12);

    const std::vector<OneQubitRdm> ra = exact_rdms(raw);
    const std::vector<OneQubitRdm> rb = exact_rdms(native);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t q = 0; q < ra.size(); ++q)
      CHECK(frobenius_distance(ra[q], rb[q]) <= 1e-12);
  }

  const FeatureMapCircuit raw = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::rxx, 4), x);
  CHECK(validate_native(raw).ok);
  const FeatureMapCircuit same = transpile_to_native(raw);
  CHECK(same.gates.size() == raw.gates.size());
}

TEST_CASE("circuit text renders one gate per line") {
  const std::array<double, 3> x = {0.25, -0.5, 1.0};
  const FeatureMapCircuit c = build_feature_map(
      FeatureMapSpec::for_features(FeatureMapVariant::cx, 3), x);
  const std::string expected =
      "RX 0 0.78539816339744828\n"
      "RZ 0 -1.5707963267948966\n"
      "RX 1 3.1415926535897931\n"
      "RZ 1 0\n"
      "CX 0,1\n";
  CHECK(to_text(c) == expected);
}

TEST_CASE("variant names round trip") {
  for (FeatureMapVariant v :
       {FeatureMapVariant::cx, FeatureMapVariant::ecr,
        FeatureMapVariant::rxx})
    CHECK(feature_map_variant_from_name(feature_map_variant_name(v)) == v);
  CHECK_THROWS_AS(feature_map_variant_from_name("cz"), std::invalid_argument);
}
