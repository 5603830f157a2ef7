#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkad/kernel.hpp"

namespace qkad {

struct SolverSettings {
  double kkt_tolerance = 1e-6;
  long long max_iterations = 10000000;
  // alpha within this of a bound counts as at the bound when classifying
  // support vectors.
  double alpha_tol = 1e-8;
};

struct SolverDiagnostics {
  long long iterations = 0;
  double kkt_violation = 0.0;
  double objective = 0.0;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverDiagnostics diag)
      : std::runtime_error(what), diagnostics(diag) {}
  SolverDiagnostics diagnostics;
};

// Fitted one-class model: minimize (1/2) a^T K a subject to 0 <= a_i <= 1 and
// sum a_i = nu * l. Decision value for a sample with kernel row k is
// sum_j a_j k_j - rho; non-negative means normal (+1).
class OcsvmModel {
 public:
  double nu() const { return nu_; }
  double rho() const { return rho_; }
  const std::vector<double>& alphas() const { return alphas_; }
  const std::vector<std::size_t>& support_indices() const {
    return support_;
  }
  double gamma() const { return gamma_; }
  KernelKind kernel_kind() const { return kind_; }
  const SolverDiagnostics& diagnostics() const { return diag_; }

 private:
  friend OcsvmModel fit(const KernelMatrix&, double, const SolverSettings&);
  friend OcsvmModel model_from_parts(double nu, double rho,
                                     std::vector<double> alphas, double gamma,
                                     KernelKind kind, double alpha_tol);

  double nu_ = 0.0;
  double rho_ = 0.0;
  double gamma_ = 0.0;
  KernelKind kind_ = KernelKind::rbf;
  std::vector<double> alphas_;
  std::vector<std::size_t> support_;
  SolverDiagnostics diag_;
};

OcsvmModel fit(const KernelMatrix& k, double nu,
               const SolverSettings& settings = {});

// Offset from the stationarity conditions: mean of (K alpha)_i over free
// support vectors; with none free, the midpoint of the bound-derived
// interval.
double compute_rho(std::span<const double> alphas, const KernelMatrix& k,
                   double alpha_tol = 1e-8);

double decision_value(const OcsvmModel& model,
                      std::span<const double> kernel_row);

// +1 normal, -1 anomaly; ties (exactly 0) count as normal.
int predict(const OcsvmModel& model, std::span<const double> kernel_row);

double dual_objective(std::span<const double> alphas, const KernelMatrix& k);

std::string model_to_json(const OcsvmModel& model);
OcsvmModel model_from_json(const std::string& text);

}  // namespace qkad
