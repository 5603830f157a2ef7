#include "qkad/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qkad/simd/simd.hpp"

namespace qkad {

namespace {

constexpr double kUnitaryTol = 1e-12;

void check_unitary(const cd* m, int dim) {
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      cd acc = 0.0;
      for (int k = 0; k < dim; ++k)
        acc += m[r * dim + k] * std::conj(m[c * dim + k]);
      const cd want = (r == c) ? cd{1.0, 0.0} : cd{0.0, 0.0};
      if (std::abs(acc - want) > kUnitaryTol)
        throw std::invalid_argument("gate matrix is not unitary");
    }
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

const GateInfo kGateTable[] = {
    {GateId::h, "H", 1, 0},    {GateId::sdg, "SDG", 1, 0},
    {GateId::x, "X", 1, 0},    {GateId::sx, "SX", 1, 0},
    {GateId::rx, "RX", 1, 1},  {GateId::rz, "RZ", 1, 1},
    {GateId::cx, "CX", 2, 0},  {GateId::ecr, "ECR", 2, 0},
    {GateId::rxx, "RXX", 2, 1},
};

}  // namespace

GateMatrix::GateMatrix(const cd* m, int arity) : arity_(arity) {
  const int d = dim();
  std::copy(m, m + d * d, m_.begin());
  check_unitary(m_.data(), d);
}

GateMatrix GateMatrix::one_qubit(const std::array<cd, 4>& m) {
  return GateMatrix(m.data(), 1);
}

GateMatrix GateMatrix::two_qubit(const std::array<cd, 16>& m) {
  return GateMatrix(m.data(), 2);
}

const GateInfo& gate_info(GateId id) {
  return kGateTable[static_cast<int>(id)];
}

const GateInfo& gate_info(std::string_view name) {
  for (const auto& g : kGateTable)
    if (g.name == name) return g;
  throw std::invalid_argument("unknown gate name: " + std::string(name));
}

GateMatrix make_gate(GateId id, std::span<const double> params) {
  const GateInfo& info = gate_info(id);
  if (static_cast<int>(params.size()) != info.num_params)
    throw std::invalid_argument(std::string(info.name) + " expects " +
                                std::to_string(info.num_params) +
                                " parameter(s), got " +
                                std::to_string(params.size()));
  const cd i1{0.0, 1.0};
  switch (id) {
    case GateId::h:
      return GateMatrix::one_qubit(
          {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2});
    case GateId::sdg:
      return GateMatrix::one_qubit({1.0, 0.0, 0.0, -i1});
    case GateId::x:
      return GateMatrix::one_qubit({0.0, 1.0, 1.0, 0.0});
    case GateId::sx: {
      const cd p{0.5, 0.5}, q{0.5, -0.5};
      return GateMatrix::one_qubit({p, q, q, p});
    }
    case GateId::rx: {
      const cd c = std::cos(params[0] / 2.0);
      const cd s = -i1 * std::sin(params[0] / 2.0);
      return GateMatrix::one_qubit({c, s, s, c});
    }
    case GateId::rz: {
      const cd e0 = std::exp(-i1 * (params[0] / 2.0));
      const cd e1 = std::exp(i1 * (params[0] / 2.0));
      return GateMatrix::one_qubit({e0, 0.0, 0.0, e1});
    }
    case GateId::cx:
      // First target is the control.
      return GateMatrix::two_qubit({1, 0, 0, 0,  //
                                    0, 1, 0, 0,  //
                                    0, 0, 0, 1,  //
                                    0, 0, 1, 0});
    case GateId::ecr: {
      // R_ZX(-pi/4) (RX(pi) x I) R_ZX(pi/4), written out.
      const cd z{0.0, 0.0};
      const cd a{kInvSqrt2, 0.0};
      const cd b{0.0, -kInvSqrt2};
      return GateMatrix::two_qubit({z, z, b, a,   //
                                    z, z, a, b,   //
                                    b, -a, z, z,  //
                                    -a, b, z, z});
    }
    case GateId::rxx: {
      const cd c = std::cos(params[0] / 2.0);
      const cd s = -i1 * std::sin(params[0] / 2.0);
      const cd z{0.0, 0.0};
      return GateMatrix::two_qubit({c, z, z, s,  //
                                    z, c, s, z,  //
                                    z, s, c, z,  //
                                    s, z, z, c});
    }
  }
  throw std::logic_error("unreachable");
}

GateMatrix make_gate(std::string_view name, std::span<const double> params) {
  return make_gate(gate_info(name).id, params);
}

StateVector::StateVector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits < 1 || num_qubits > 24)
    throw std::invalid_argument("num_qubits out of range");
  amps_.assign(std::size_t{1} << num_qubits, cd{0.0, 0.0});
  amps_[0] = 1.0;
}

StateVector StateVector::from_amplitudes(std::vector<cd> amps) {
  const std::size_t n = amps.size();
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument("amplitude count must be a power of two >= 2");
  double norm2 = 0.0;
  for (const cd& a : amps) norm2 += std::norm(a);
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-10)
    throw std::invalid_argument("state is not normalized");
  StateVector s;
  s.amps_ = std::move(amps);
  int q = 0;
  while ((std::size_t{1} << q) < n) ++q;
  s.num_qubits_ = q;
  return s;
}

double StateVector::norm() const {
  double norm2 = 0.0;
  for (const cd& a : amps_) norm2 += std::norm(a);
  return std::sqrt(norm2);
}

void StateVector::apply(const GateMatrix& gate, std::span<const int> targets) {
  if (static_cast<int>(targets.size()) != gate.arity())
    throw std::invalid_argument("target count does not match gate arity");
  for (int t : targets)
    if (t < 0 || t >= num_qubits_)
      throw std::invalid_argument("gate target out of range");

  if (gate.arity() == 1) {
    simd::apply_gate1(amps_.data(), amps_.size(),
                      static_cast<unsigned>(targets[0]), gate.data());
    return;
  }

  if (targets[0] == targets[1])
    throw std::invalid_argument("two-qubit gate targets must differ");
  const std::size_t m_first = std::size_t{1} << targets[0];
  const std::size_t m_second = std::size_t{1} << targets[1];
  const std::size_t both = m_first | m_second;
  const cd* g = gate.data();
  const std::size_t n = amps_.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i & both) continue;
    // Gate basis order is 2 * bit_first + bit_second.
    const std::size_t idx[4] = {i, i | m_second, i | m_first, i | both};
    const cd v[4] = {amps_[idx[0]], amps_[idx[1]], amps_[idx[2]],
                     amps_[idx[3]]};
    for (int r = 0; r < 4; ++r)
      amps_[idx[r]] =
          g[r * 4 + 0] * v[0] + g[r * 4 + 1] * v[1] + g[r * 4 + 2] * v[2] +
          g[r * 4 + 3] * v[3];
  }
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps_.size());
  simd::abs2(amps_.data(), p.data(), amps_.size());
  return p;
}

OneQubitRdm::OneQubitRdm(const std::array<cd, 4>& m, RdmKind kind)
    : m_(m), kind_(kind) {
  const double herm = std::abs(m_[1] - std::conj(m_[2])) +
                      std::abs(m_[0].imag()) + std::abs(m_[3].imag());
  if (herm > 1e-12) throw std::invalid_argument("RDM is not Hermitian");
  const double tr = m_[0].real() + m_[3].real();
  if (std::abs(tr - 1.0) > 1e-12)
    throw std::invalid_argument("RDM trace differs from 1");
  const double mid = tr / 2.0;
  const double half_gap = (m_[0].real() - m_[3].real()) / 2.0;
  const double rad = std::sqrt(half_gap * half_gap + std::norm(m_[1]));
  const double lo = mid - rad;
  const double hi = mid + rad;
  if (kind_ == RdmKind::exact) {
    if (lo < -1e-10)
      throw std::invalid_argument("exact RDM is not positive semidefinite");
  } else {
    if (lo < -1.0 - 1e-9 || hi > 2.0 + 1e-9)
      throw std::invalid_argument("estimated RDM eigenvalues outside [-1, 2]");
  }
}

std::array<double, 8> OneQubitRdm::coords() const {
  return {m_[0].real(), m_[0].imag(), m_[1].real(), m_[1].imag(),
          m_[2].real(), m_[2].imag(), m_[3].real(), m_[3].imag()};
}

OneQubitRdm OneQubitRdm::from_coords(std::span<const double> c, RdmKind kind) {
  if (c.size() != 8)
    throw std::invalid_argument("RDM coordinate block must have 8 entries");
  return OneQubitRdm({cd{c[0], c[1]}, cd{c[2], c[3]}, cd{c[4], c[5]},
                      cd{c[6], c[7]}},
                     kind);
}

double frobenius_distance(const OneQubitRdm& a, const OneQubitRdm& b) {
  double acc = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) acc += std::norm(a.at(r, c) - b.at(r, c));
  return std::sqrt(acc);
}

OneQubitRdm partial_trace_one_qubit(const StateVector& state, int qubit) {
  if (qubit < 0 || qubit >= state.num_qubits())
    throw std::invalid_argument("qubit out of range");
  const auto& a = state.amplitudes();
  const std::size_t n = a.size();
  const std::size_t bit = std::size_t{1} << qubit;
  double p0 = 0.0, p1 = 0.0;
  cd off = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i & bit) continue;
    const cd a0 = a[i];
    const cd a1 = a[i | bit];
    p0 += std::norm(a0);
    p1 += std::norm(a1);
    off += a0 * std::conj(a1);
  }
  // Divide by the squared norm so slight drift from a long gate sequence
  // cannot push the trace outside the RDM tolerance.
  const double tr = p0 + p1;
  const double d0 = p0 / tr;
  return OneQubitRdm({cd{d0, 0.0}, off / tr, std::conj(off / tr),
                      cd{1.0 - d0, 0.0}},
                     RdmKind::exact);
}

PauliBasis pauli_basis_from_char(char c) {
  switch (c) {
    case 'x':
    case 'X':
      return PauliBasis::x;
    case 'y':
    case 'Y':
      return PauliBasis::y;
    case 'z':
    case 'Z':
      return PauliBasis::z;
  }
  throw std::invalid_argument("unknown Pauli basis");
}

char pauli_basis_char(PauliBasis b) {
  switch (b) {
    case PauliBasis::x:
      return 'X';
    case PauliBasis::y:
      return 'Y';
    case PauliBasis::z:
      return 'Z';
  }
  return '?';
}

std::uint64_t sample_measurement(const StateVector& state,
                                 std::span<const PauliBasis> bases, Rng& rng) {
  if (static_cast<int>(bases.size()) != state.num_qubits())
    throw std::invalid_argument("need one basis per qubit");
  StateVector rotated = state;
  const GateMatrix h = make_gate(GateId::h);
  const GateMatrix sdg = make_gate(GateId::sdg);
  for (int q = 0; q < rotated.num_qubits(); ++q) {
    const int t[1] = {q};
    switch (bases[q]) {
      case PauliBasis::x:
        rotated.apply(h, t);
        break;
      case PauliBasis::y:
        rotated.apply(sdg, t);
        rotated.apply(h, t);
        break;
      case PauliBasis::z:
        break;
    }
  }
  std::vector<double> p = rotated.probabilities();
  std::partial_sum(p.begin(), p.end(), p.begin());
  const double u = rng.uniform() * p.back();
  const auto it = std::upper_bound(p.begin(), p.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - p.begin());
  if (idx >= p.size()) idx = p.size() - 1;
  return idx;
}

}  // namespace qkad
