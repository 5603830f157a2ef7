#include <doctest.h>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "qkad/qstate.hpp"
#include "qkad/rng.hpp"
#include "support/oracles.hpp"

using namespace qkad;
using oracle::Mat2;
using oracle::Mat4;

namespace {

GateMatrix gate(GateId id) { return make_gate(id); }
GateMatrix gate(GateId id, double th) {
  const double p[] = {th};
  return make_gate(id, p);
}
void apply1(StateVector& s, const GateMatrix& g, int q) {
  const int t[] = {q};
  s.apply(g, t);
}
void apply2(StateVector& s, const GateMatrix& g, int a, int b) {
  const int t[] = {a, b};
  s.apply(g, t);
}

Mat2 lib2(const GateMatrix& g) {
  Mat2 m;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) m[r * 2 + c] = g.at(r, c);
  return m;
}

Mat4 lib4(const GateMatrix& g) {
  Mat4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m[r * 4 + c] = g.at(r, c);
  return m;
}

StateVector random_state(int qubits, Rng& rng) {
  std::vector<cd> amps(std::size_t{1} << qubits);
  double norm = 0.0;
  for (cd& a : amps) {
    a = {rng.normal(), rng.normal()};
    norm += std::norm(a);
  }
  norm = std::sqrt(norm);
  for (cd& a : amps) a /= norm;
  return StateVector::from_amplitudes(std::move(amps));
}

constexpr Mat2 kI2 = {cd(1, 0), cd(0, 0), cd(0, 0), cd(1, 0)};

}  // namespace

TEST_CASE("rotation gates match the closed forms") {
  for (double th : {0.0, 0.3, -1.2, kPi, 2.7, -5.0}) {
    CHECK(oracle::max_abs_diff(lib2(gate(GateId::rx, th)), oracle::rot_x(th)) <=
          1e-15);
    CHECK(oracle::max_abs_diff(lib2(gate(GateId::rz, th)), oracle::rot_z(th)) <=
          1e-15);
    CHECK(oracle::max_abs_diff(lib4(gate(GateId::rxx, th)),
                               oracle::rot_xx(th)) <= 1e-15);
  }
}

TEST_CASE("fixed gates satisfy their defining algebra") {
  const Mat2 h = lib2(gate(GateId::h));
  const Mat2 x = lib2(gate(GateId::x));
  const Mat2 sx = lib2(gate(GateId::sx));
  const Mat2 sdg = lib2(gate(GateId::sdg));

  CHECK(oracle::max_abs_diff(oracle::mul2(h, h), kI2) <= 1e-15);
  CHECK(oracle::max_abs_diff(oracle::mul2(x, x), kI2) <= 1e-15);
  CHECK(oracle::max_abs_diff(oracle::mul2(sx, sx), x) <= 1e-15);
  const Mat2 z = {cd(1, 0), cd(0, 0), cd(0, 0), cd(-1, 0)};
  CHECK(oracle::max_abs_diff(oracle::mul2(sdg, sdg), z) <= 1e-15);
  // H X H = Z
  CHECK(oracle::max_abs_diff(oracle::mul2(h, oracle::mul2(x, h)), z) <= 1e-15);
}

TEST_CASE("cx permutes basis states with the first target as control") {
  const GateMatrix cx = gate(GateId::cx);
  // basis index 2 * bit_first + bit_second
  const int expect[4] = {0, 1, 3, 2};
  for (int col = 0; col < 4; ++col)
    for (int row = 0; row < 4; ++row)
      CHECK(cx.at(row, col) == (row == expect[col] ? cd(1, 0) : cd(0, 0)));
}

TEST_CASE("ecr equals its echoed cross resonance composition") {
  const Mat4 echo = oracle::mul4(
      oracle::rot_zx(-kPi / 4),
      oracle::mul4(oracle::kron(oracle::rot_x(kPi), kI2),
                   oracle::rot_zx(kPi / 4)));
  const Mat4 direct = lib4(gate(GateId::ecr));
  CHECK(oracle::equal_up_to_phase(echo, direct, 1e-12));
  // its square is the identity up to a global phase
  const Mat4 sq = oracle::mul4(direct, direct);
  Mat4 eye{};
  for (int i = 0; i < 4; ++i) eye[i * 4 + i] = 1.0;
  CHECK(oracle::equal_up_to_phase(eye, sq, 1e-12));
}

TEST_CASE("gate construction validates names and parameter counts") {
  CHECK_THROWS_AS((void)make_gate("CNOT"), std::invalid_argument);
  CHECK_THROWS_AS((void)make_gate(GateId::rx), std::invalid_argument);
  const double p[] = {0.5};
  CHECK_THROWS_AS((void)make_gate(GateId::h, p), std::invalid_argument);
  CHECK(gate_info("ECR").arity == 2);
  CHECK(gate_info("RX").num_params == 1);
  CHECK(gate_info(GateId::rxx).name == "RXX");
}

TEST_CASE("non-unitary matrices are rejected") {
  CHECK_THROWS_AS(
      GateMatrix::one_qubit({cd(1, 0), cd(0, 0), cd(0, 0), cd(0.5, 0)}),
      std::invalid_argument);
}

TEST_CASE("statevector starts at |0...0> and validates amplitudes") {
  const StateVector s(3);
  CHECK(s.dim() == 8);
  CHECK(s.amplitude(0) == cd(1, 0));
  for (std::size_t i = 1; i < 8; ++i) CHECK(s.amplitude(i) == cd(0, 0));
  CHECK(s.norm() == doctest::Approx(1.0));

  CHECK_THROWS_AS(StateVector::from_amplitudes({cd(1, 0), cd(0, 0), cd(0, 0)}),
                  std::invalid_argument);  // not a power of two
  CHECK_THROWS_AS(StateVector::from_amplitudes({cd(1, 0), cd(1, 0)}),
                  std::invalid_argument);  // not normalized
}

TEST_CASE("h then cx prepares the bell state") {
  StateVector s(2);
  apply1(s, gate(GateId::h), 0);
  apply2(s, gate(GateId::cx), 0, 1);
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(s.amplitude(0) - cd(inv, 0)) <= 1e-15);
  CHECK(std::abs(s.amplitude(1)) <= 1e-15);
  CHECK(std::abs(s.amplitude(2)) <= 1e-15);
  CHECK(std::abs(s.amplitude(3) - cd(inv, 0)) <= 1e-15);

  for (int q : {0, 1}) {
    const OneQubitRdm rdm = partial_trace_one_qubit(s, q);
    CHECK(std::abs(rdm.at(0, 0) - cd(0.5, 0)) <= 1e-15);
    CHECK(std::abs(rdm.at(0, 1)) <= 1e-15);
    CHECK(std::abs(rdm.at(1, 1) - cd(0.5, 0)) <= 1e-15);
  }

  const std::vector<double> probs = s.probabilities();
  CHECK(probs[0] == doctest::Approx(0.5));
  CHECK(probs[1] == doctest::Approx(0.0));
  CHECK(probs[2] == doctest::Approx(0.0));
  CHECK(probs[3] == doctest::Approx(0.5));
}

TEST_CASE("two-qubit application on (0,1) matches the tensor oracle") {
  Rng rng(child_seed(7, "qstate/tensor"));
  for (int rep = 0; rep < 5; ++rep) {
    const StateVector in = random_state(2, rng);
    for (GateId id : {GateId::cx, GateId::ecr, GateId::rxx}) {
      const double th = rng.uniform(-3.0, 3.0);
      const GateMatrix g =
          gate_info(id).num_params == 1 ? gate(id, th) : gate(id);
      StateVector out = in;
      apply2(out, g, 0, 1);

      // Library amplitude index i: bit0 = qubit0. Gate basis index
      // k = 2 * bit_first + bit_second with first target = qubit 0.
      const Mat4 m = lib4(g);
      std::array<cd, 4> expected{};
      for (int b0 = 0; b0 < 2; ++b0)
        for (int b1 = 0; b1 < 2; ++b1) {
          const int k = 2 * b0 + b1;
          for (int c0 = 0; c0 < 2; ++c0)
            for (int c1 = 0; c1 < 2; ++c1)
              expected[b0 + 2 * b1] +=
                  m[k * 4 + (2 * c0 + c1)] * in.amplitude(c0 + 2 * c1);
        }
      for (std::size_t i = 0; i < 4; ++i)
        CHECK(std::abs(out.amplitude(i) - expected[i]) <= 1e-14);
    }
  }
}

TEST_CASE("cx on arbitrary qubit pairs is the xor permutation") {
  Rng rng(child_seed(7, "qstate/cxperm"));
  const StateVector in = random_state(3, rng);
  const int control = 2, target = 0;
  StateVector out = in;
  apply2(out, gate(GateId::cx), control, target);
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t j =
        (i >> control) & 1 ? i ^ (std::size_t{1} << target) : i;
    CHECK(std::abs(out.amplitude(j) - in.amplitude(i)) <= 1e-15);
  }
}

TEST_CASE("rxx on arbitrary qubit pairs rotates amplitude pairs") {
  Rng rng(child_seed(7, "qstate/rxxpairs"));
  const StateVector in = random_state(3, rng);
  const double th = 1.234;
  StateVector out = in;
  apply2(out, gate(GateId::rxx, th), 1, 2);
  const double c = std::cos(th / 2), s = std::sin(th / 2);
  for (std::size_t i = 0; i < 8; ++i) {
    const std::size_t partner = i ^ 0b110;
    const cd expected = c * in.amplitude(i) - cd(0, s) * in.amplitude(partner);
    CHECK(std::abs(out.amplitude(i) - expected) <= 1e-14);
  }
}

TEST_CASE("random circuits preserve the norm") {
  Rng rng(child_seed(7, "qstate/norm"));
  StateVector s = random_state(4, rng);
  for (int step = 0; step < 40; ++step) {
    const int q = (int)rng.below(4);
    switch (rng.below(4)) {
      case 0:
        apply1(s, gate(GateId::h), q);
        break;
      case 1:
        apply1(s, gate(GateId::rx, rng.uniform(-3.0, 3.0)), q);
        break;
      case 2:
        apply1(s, gate(GateId::rz, rng.uniform(-3.0, 3.0)), q);
        break;
      default: {
        const int p = (q + 1 + (int)rng.below(3)) % 4;
        apply2(s, gate(GateId::cx), q, p);
        break;
      }
    }
  }
  CHECK(std::abs(s.norm() - 1.0) <= 1e-12);
}

TEST_CASE("partial trace of a product state recovers the factors") {
  StateVector s(2);
  const double th = 0.7;
  apply1(s, gate(GateId::rx, th), 0);
  const OneQubitRdm q0 = partial_trace_one_qubit(s, 0);
  const OneQubitRdm q1 = partial_trace_one_qubit(s, 1);

  // RX(0.7)|0> = (cos(0.35), -i sin(0.35))
  const double c = std::cos(th / 2), sn = std::sin(th / 2);
  CHECK(std::abs(q0.at(0, 0) - cd(c * c, 0)) <= 1e-15);
  CHECK(std::abs(q0.at(0, 1) - cd(0, c * sn)) <= 1e-15);  // a conj(b)
  CHECK(std::abs(q0.at(1, 0) - cd(0, -c * sn)) <= 1e-15);
  CHECK(std::abs(q0.at(1, 1) - cd(sn * sn, 0)) <= 1e-15);

  CHECK(std::abs(q1.at(0, 0) - cd(1, 0)) <= 1e-15);
  CHECK(std::abs(q1.at(1, 1)) <= 1e-15);
}

TEST_CASE("rdm validation distinguishes exact from estimated") {
  // trace 1, hermitian, eigenvalues {1.5, -0.5}: fine as an estimate,
  // rejected as an exact state.
  const std::array<cd, 4> indefinite = {cd(1.5, 0), cd(0, 0), cd(0, 0),
                                        cd(-0.5, 0)};
  CHECK_NOTHROW(OneQubitRdm(indefinite, RdmKind::estimated));
  CHECK_THROWS_AS(OneQubitRdm(indefinite, RdmKind::exact),
                  std::invalid_argument);

  // eigenvalues {2.6, -1.6} fall outside even the snapshot range
  const std::array<cd, 4> wild = {cd(2.6, 0), cd(0, 0), cd(0, 0),
                                  cd(-1.6, 0)};
  CHECK_THROWS_AS(OneQubitRdm(wild, RdmKind::estimated),
                  std::invalid_argument);

  const std::array<cd, 4> not_hermitian = {cd(0.5, 0), cd(0.5, 0), cd(0, 0),
                                           cd(0.5, 0)};
  CHECK_THROWS_AS(OneQubitRdm(not_hermitian, RdmKind::estimated),
                  std::invalid_argument);
  const std::array<cd, 4> bad_trace = {cd(0.9, 0), cd(0, 0), cd(0, 0),
                                       cd(0.2, 0)};
  CHECK_THROWS_AS(OneQubitRdm(bad_trace, RdmKind::exact),
                  std::invalid_argument);
}

TEST_CASE("rdm coordinates round trip and carry the frobenius metric") {
  const OneQubitRdm a({cd(1, 0), cd(0, 0), cd(0, 0), cd(0, 0)}, RdmKind::exact);
  const OneQubitRdm half({cd(0.5, 0), cd(0, 0), cd(0, 0), cd(0.5, 0)},
                         RdmKind::exact);
  CHECK(frobenius_distance(a, half) == doctest::Approx(std::sqrt(0.5)));

  const auto ac = a.coords();
  const auto hc = half.coords();
  double sq = 0.0;
  for (int i = 0; i < 8; ++i) sq += (ac[i] - hc[i]) * (ac[i] - hc[i]);
  CHECK(std::sqrt(sq) == doctest::Approx(frobenius_distance(a, half)));

  const OneQubitRdm back = OneQubitRdm::from_coords(ac, RdmKind::exact);
  CHECK(back.at(0, 0) == a.at(0, 0));
  CHECK(back.at(1, 1) == a.at(1, 1));
}

TEST_CASE("measurement sampling in rotated bases") {
  StateVector plus(1);
  apply1(plus, gate(GateId::h), 0);

  Rng rng(child_seed(7, "qstate/sample"));
  // X basis on |+>: H|+> = |0>, outcome always 0.
  const PauliBasis bx[] = {PauliBasis::x};
  for (int i = 0; i < 200; ++i) CHECK(sample_measurement(plus, bx, rng) == 0);

  // Y basis on (|0> + i|1>)/sqrt(2): deterministic 0 as well.
  const StateVector plus_i = StateVector::from_amplitudes(
      {cd(1.0 / std::sqrt(2.0), 0), cd(0, 1.0 / std::sqrt(2.0))});
  const PauliBasis by[] = {PauliBasis::y};
  for (int i = 0; i < 200; ++i)
    CHECK(sample_measurement(plus_i, by, rng) == 0);

  // Z basis on |+>: a fair coin.
  const PauliBasis bz[] = {PauliBasis::z};
  long long ones = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i)
    ones += (long long)sample_measurement(plus, bz, rng);
  // 5 sigma band around n/2
  CHECK(std::abs((double)ones - n / 2.0) <= 5.0 * std::sqrt(n / 4.0));
}

TEST_CASE("basis characters round trip") {
  for (char c : {'X', 'Y', 'Z'})
    CHECK(pauli_basis_char(pauli_basis_from_char(c)) == c);
  // lowercase input is accepted and canonicalized to uppercase
  CHECK(pauli_basis_char(pauli_basis_from_char('x')) == 'X');
  CHECK_THROWS_AS(pauli_basis_from_char('q'), std::invalid_argument);
}
