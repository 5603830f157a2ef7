#pragma once

#include <span>
#include <string>
#include <vector>

#include "qkad/qstate.hpp"

namespace qkad {

// Entangler choice; also names the native gate set a circuit must reduce to
// before validate_native accepts it.
enum class FeatureMapVariant { cx, ecr, rxx };

FeatureMapVariant feature_map_variant_from_name(std::string_view name);
std::string_view feature_map_variant_name(FeatureMapVariant v);

struct FeatureMapSpec {
  FeatureMapVariant variant = FeatureMapVariant::cx;
  int num_qubits = 1;
  int layers = 1;
  double angle_scale = kPi;

  // Two features per qubit: num_qubits = ceil(num_features / 2).
  static FeatureMapSpec for_features(FeatureMapVariant variant,
                                     int num_features, int layers = 1,
                                     double angle_scale = kPi);
};

struct CircuitGate {
  GateId id;
  int q0 = 0;
  int q1 = -1;         // second target, -1 for one-qubit gates
  double angle = 0.0;  // meaningful only when has_angle
  bool has_angle = false;
};

struct FeatureMapCircuit {
  FeatureMapSpec spec;
  std::vector<CircuitGate> gates;
};

// Encoding layer per qubit k: RX(scale * x[2k]) then RZ(scale * x[2k+1]),
// angle 0 where the sample runs out; then the entangling chain
// (0,1), (1,2), ..., (n-2, n-1) with the variant's two-qubit gate, lower
// index first (the CX control). Repeated spec.layers times.
FeatureMapCircuit build_feature_map(const FeatureMapSpec& spec,
                                    std::span<const double> sample);

// RX(theta) as RZ(pi/2), SX, RZ(theta + pi), SX, RZ(pi/2) in application
// order, exact up to global phase. q0 is left at 0; callers rebind it.
std::vector<CircuitGate> decompose_rx(double theta);

// Rewrites RX gates for the cx and ecr variants, whose native sets
// {X, SX, RZ, CX} and {X, SX, RZ, ECR} lack RX. The rxx set {RX, RZ, RXX}
// needs no rewrite.
FeatureMapCircuit transpile_to_native(const FeatureMapCircuit& circuit);

struct NativeCheck {
  bool ok = true;
  std::size_t gate_index = 0;  // first offending gate when !ok
  std::string gate;
};

NativeCheck validate_native(const FeatureMapCircuit& circuit);

// One gate per line: NAME q0[,q1][ angle], angles with %.17g.
std::string to_text(const FeatureMapCircuit& circuit);

StateVector simulate(const FeatureMapCircuit& circuit);

}  // namespace qkad
