#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "qkad/matrix.hpp"
#include "qkad/qstate.hpp"

namespace qkad {

enum class KernelKind { rbf, qrbf };

std::string_view kernel_kind_name(KernelKind k);
KernelKind kernel_kind_from_name(std::string_view name);

struct RdmProvenance {
  RdmKind kind = RdmKind::exact;
  long long shots = 0;   // estimated only
  std::uint64_t seed = 0;  // estimated only
};

// One-qubit RDMs for a sample set, stored as flat coordinate rows of
// 8 * num_qubits doubles (see OneQubitRdm::coords). The squared euclidean
// distance between two rows equals the summed squared Frobenius distance
// over qubits, which is exactly what the projected kernel exponentiates.
class RdmSet {
 public:
  RdmSet(int num_qubits, RdmProvenance prov);

  void add_row(std::span<const OneQubitRdm> rdms);
  void set_row(std::size_t i, std::span<const OneQubitRdm> rdms);
  void resize(std::size_t rows);

  std::size_t size() const { return coords_.rows(); }
  int num_qubits() const { return num_qubits_; }
  const RdmProvenance& provenance() const { return prov_; }
  std::span<const double> row(std::size_t i) const { return coords_.row(i); }
  OneQubitRdm rdm(std::size_t sample, int qubit) const;

 private:
  friend RdmSet load_rdms(const std::string& path);

  int num_qubits_;
  RdmProvenance prov_;
  FeatureMatrix coords_;
};

// exp(-gamma |a - b|^2)
double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma);

// exp(-gamma sum_q |rho_q(a) - rho_q(b)|_F^2); spans are coordinate rows.
double qrbf_kernel(std::span<const double> row_a, std::span<const double> row_b,
                   double gamma);
double qrbf_kernel(std::span<const OneQubitRdm> a,
                   std::span<const OneQubitRdm> b, double gamma);

// Symmetric kernel matrix with unit diagonal.
class KernelMatrix {
 public:
  static KernelMatrix from_values(std::size_t n, std::vector<double> values,
                                  double gamma, KernelKind kind);
  // Skips the symmetry check; exists so solver error paths stay testable.
  static KernelMatrix from_values_unchecked(std::size_t n,
                                            std::vector<double> values,
                                            double gamma, KernelKind kind);

  std::size_t size() const { return n_; }
  double at(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return {v_.data() + i * n_, n_};
  }
  double gamma() const { return gamma_; }
  KernelKind kind() const { return kind_; }
  bool is_symmetric(double tol) const;

 private:
  KernelMatrix() = default;

  std::size_t n_ = 0;
  double gamma_ = 0.0;
  KernelKind kind_ = KernelKind::rbf;
  std::vector<double> v_;
};

KernelMatrix gram_matrix(const FeatureMatrix& x, double gamma);
KernelMatrix gram_matrix(const RdmSet& x, double gamma);

// rows(i, j) = k(test_i, train_j); row i is the kernel row used to score
// test sample i against a model trained on `train`.
FeatureMatrix cross_gram(const FeatureMatrix& test, const FeatureMatrix& train,
                         double gamma);
FeatureMatrix cross_gram(const RdmSet& test, const RdmSet& train,
                         double gamma);

// JSON unless the path ends in .bin, then a little-endian binary block.
// Both round-trip coordinates bit-exactly.
void save_rdms(const std::string& path, const RdmSet& set);
RdmSet load_rdms(const std::string& path);

void write_kernel_csv(std::ostream& out, const KernelMatrix& k);

}  // namespace qkad
