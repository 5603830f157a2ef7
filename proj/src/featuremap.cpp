#include "qkad/featuremap.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

namespace qkad {

FeatureMapVariant feature_map_variant_from_name(std::string_view name) {
  if (name == "cx") return FeatureMapVariant::cx;
  if (name == "ecr") return FeatureMapVariant::ecr;
  if (name == "rxx") return FeatureMapVariant::rxx;
  throw std::invalid_argument("unknown feature map variant: " +
                              std::string(name));
}

std::string_view feature_map_variant_name(FeatureMapVariant v) {
  switch (v) {
    case FeatureMapVariant::cx:
      return "cx";
    case FeatureMapVariant::ecr:
      return "ecr";
    case FeatureMapVariant::rxx:
      return "rxx";
  }
  return "?";
}

FeatureMapSpec FeatureMapSpec::for_features(FeatureMapVariant variant,
                                            int num_features, int layers,
                                            double angle_scale) {
  if (num_features < 1)
    throw std::invalid_argument("need at least one feature");
  if (layers < 1) throw std::invalid_argument("need at least one layer");
  FeatureMapSpec spec;
  spec.variant = variant;
  spec.num_qubits = (num_features + 1) / 2;
  spec.layers = layers;
  spec.angle_scale = angle_scale;
  return spec;
}

FeatureMapCircuit build_feature_map(const FeatureMapSpec& spec,
                                    std::span<const double> sample) {
  if (spec.num_qubits < 1 || spec.layers < 1)
    throw std::invalid_argument("bad feature map spec");
  const int f = static_cast<int>(sample.size());
  if (f < 1 || (f + 1) / 2 != spec.num_qubits)
    throw std::invalid_argument(
        "sample length does not match the qubit count");

  GateId twoq = GateId::cx;
  switch (spec.variant) {
    case FeatureMapVariant::cx:
      twoq = GateId::cx;
      break;
    case FeatureMapVariant::ecr:
      twoq = GateId::ecr;
      break;
    case FeatureMapVariant::rxx:
      twoq = GateId::rxx;
      break;
  }

  FeatureMapCircuit circuit;
  circuit.spec = spec;
  for (int layer = 0; layer < spec.layers; ++layer) {
    for (int q = 0; q < spec.num_qubits; ++q) {
      const double ax = 2 * q < f ? spec.angle_scale * sample[2 * q] : 0.0;
      const double az =
          2 * q + 1 < f ? spec.angle_scale * sample[2 * q + 1] : 0.0;
      circuit.gates.push_back({GateId::rx, q, -1, ax, true});
      circuit.gates.push_back({GateId::rz, q, -1, az, true});
    }
    for (int q = 0; q + 1 < spec.num_qubits; ++q) {
      CircuitGate g{twoq, q, q + 1, 0.0, false};
      if (twoq == GateId::rxx) {
        g.angle = kPi / 2.0;
        g.has_angle = true;
      }
      circuit.gates.push_back(g);
    }
  }
  return circuit;
}

std::vector<CircuitGate> decompose_rx(double theta) {
  const double half = kPi / 2.0;
  return {{GateId::rz, 0, -1, half, true},
          {GateId::sx, 0, -1, 0.0, false},
          {GateId::rz, 0, -1, theta + kPi, true},
          {GateId::sx, 0, -1, 0.0, false},
          {GateId::rz, 0, -1, half, true}};
}

namespace {

bool is_native(FeatureMapVariant variant, GateId id) {
  switch (variant) {
    case FeatureMapVariant::cx:
      return id == GateId::x || id == GateId::sx || id == GateId::rz ||
             id == GateId::cx;
    case FeatureMapVariant::ecr:
      return id == GateId::x || id == GateId::sx || id == GateId::rz ||
             id == GateId::ecr;
    case FeatureMapVariant::rxx:
      return id == GateId::rx || id == GateId::rz || id == GateId::rxx;
  }
  return false;
}

}  // namespace

FeatureMapCircuit transpile_to_native(const FeatureMapCircuit& circuit) {
  if (circuit.spec.variant == FeatureMapVariant::rxx) return circuit;
  FeatureMapCircuit out;
  out.spec = circuit.spec;
  for (const CircuitGate& g : circuit.gates) {
    if (g.id == GateId::rx) {
      for (CircuitGate r : decompose_rx(g.angle)) {
        r.q0 = g.q0;
        out.gates.push_back(r);
      }
    } else {
      out.gates.push_back(g);
    }
  }
  return out;
}

NativeCheck validate_native(const FeatureMapCircuit& circuit) {
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    if (!is_native(circuit.spec.variant, circuit.gates[i].id)) {
      return {false, i, std::string(gate_info(circuit.gates[i].id).name)};
    }
  }
  return {};
}

std::string to_text(const FeatureMapCircuit& circuit) {
  std::string out;
  char buf[64];
  for (const CircuitGate& g : circuit.gates) {
    out += gate_info(g.id).name;
    out += ' ';
    out += std::to_string(g.q0);
    if (g.q1 >= 0) {
      out += ',';
      out += std::to_string(g.q1);
    }
    if (g.has_angle) {
      std::snprintf(buf, sizeof(buf), " %.17g", g.angle);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

StateVector simulate(const FeatureMapCircuit& circuit) {
  StateVector state(circuit.spec.num_qubits);
  for (const CircuitGate& g : circuit.gates) {
    const GateMatrix m =
        g.has_angle ? make_gate(g.id, std::span<const double>(&g.angle, 1))
                    : make_gate(g.id);
    if (g.q1 >= 0) {
      const int t[2] = {g.q0, g.q1};
      state.apply(m, t);
    } else {
      const int t[1] = {g.q0};
      state.apply(m, t);
    }
  }
  return state;
}

}  // namespace qkad
