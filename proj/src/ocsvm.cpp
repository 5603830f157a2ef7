#include "qkad/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "qkad/simd/simd.hpp"

namespace qkad {

namespace {

// Guard for a numerically non-positive curvature along the working pair.
constexpr double kTau = 1e-12;

std::vector<double> gradient(std::span<const double> alphas,
                             const KernelMatrix& k) {
  const std::size_t l = k.size();
  std::vector<double> g(l);
  for (std::size_t i = 0; i < l; ++i)
    g[i] = simd::dot(k.row(i).data(), alphas.data(), l);
  return g;
}

}  // namespace

OcsvmModel model_from_parts(double nu, double rho, std::vector<double> alphas,
                            double gamma, KernelKind kind, double alpha_tol) {
  OcsvmModel m;
  m.nu_ = nu;
  m.rho_ = rho;
  m.gamma_ = gamma;
  m.kind_ = kind;
  for (std::size_t i = 0; i < alphas.size(); ++i)
    if (alphas[i] > alpha_tol) m.support_.push_back(i);
  m.alphas_ = std::move(alphas);
  return m;
}

OcsvmModel fit(const KernelMatrix& k, double nu,
               const SolverSettings& settings) {
  const std::size_t l = k.size();
  if (l == 0) throw std::invalid_argument("empty kernel matrix");
  if (!(nu > 0.0) || nu > 1.0)
    throw std::invalid_argument("nu must lie in (0, 1]");
  if (!(settings.kkt_tolerance > 0.0))
    throw std::invalid_argument("kkt_tolerance must be positive");
  if (!k.is_symmetric(1e-12))
    throw std::invalid_argument("kernel matrix is not symmetric");

  // Uniform start keeps the equality constraint sum(alpha) = nu * l exact.
  std::vector<double> alpha(l, nu);
  std::vector<double> g(l);
  for (std::size_t i = 0; i < l; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < l; ++j) s += k.at(i, j);
    g[i] = nu * s;
  }

  // Two-coordinate descent on the maximal violating pair: push weight onto
  // the smallest gradient from the largest until no feasible pair violates
  // the KKT gap.
  long long iter = 0;
  double viol = 0.0;
  for (;;) {
    std::size_t up = l, down = l;
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < l; ++t) {
      if (alpha[t] < 1.0 && g[t] < gmin) {
        gmin = g[t];
        up = t;
      }
      if (alpha[t] > 0.0 && g[t] > gmax) {
        gmax = g[t];
        down = t;
      }
    }
    viol = (up < l && down < l) ? gmax - gmin : 0.0;
    if (viol <= settings.kkt_tolerance) break;

    if (iter >= settings.max_iterations) {
      SolverDiagnostics diag{iter, viol, dual_objective(alpha, k)};
      throw SolverError("solver hit the iteration limit before reaching the "
                        "KKT tolerance",
                        diag);
    }

    double quad = k.at(up, up) + k.at(down, down) - 2.0 * k.at(up, down);
    if (quad <= 0.0) quad = kTau;
    const double head_i = 1.0 - alpha[up];
    const double head_j = alpha[down];
    double delta = viol / quad;
    if (delta > head_i) delta = head_i;
    if (delta > head_j) delta = head_j;
    alpha[up] = delta == head_i ? 1.0 : alpha[up] + delta;
    alpha[down] = delta == head_j ? 0.0 : alpha[down] - delta;

    simd::axpy(delta, k.row(up).data(), g.data(), l);
    simd::axpy(-delta, k.row(down).data(), g.data(), l);
    ++iter;
  }

  const double rho = compute_rho(alpha, k, settings.alpha_tol);
  OcsvmModel m = model_from_parts(nu, rho, std::move(alpha), k.gamma(),
                                  k.kind(), settings.alpha_tol);
  m.diag_.iterations = iter;
  m.diag_.kkt_violation = viol;
  m.diag_.objective = dual_objective(m.alphas(), k);
  return m;
}

double compute_rho(std::span<const double> alphas, const KernelMatrix& k,
                   double alpha_tol) {
  if (alphas.size() != k.size())
    throw std::invalid_argument("alpha length does not match kernel size");
  const std::vector<double> g = gradient(alphas, k);
  double sum_free = 0.0;
  std::size_t n_free = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] > alpha_tol && alphas[i] < 1.0 - alpha_tol) {
      sum_free += g[i];
      ++n_free;
    } else if (alphas[i] >= 1.0 - alpha_tol) {
      lo = std::max(lo, g[i]);
    } else {
      hi = std::min(hi, g[i]);
    }
  }
  if (n_free > 0) return sum_free / static_cast<double>(n_free);
  if (std::isinf(lo)) return hi;
  if (std::isinf(hi)) return lo;
  return (lo + hi) / 2.0;
}

double decision_value(const OcsvmModel& model,
                      std::span<const double> kernel_row) {
  if (kernel_row.size() != model.alphas().size())
    throw std::invalid_argument("kernel row length does not match the model");
  return simd::dot(model.alphas().data(), kernel_row.data(),
                   kernel_row.size()) -
         model.rho();
}

int predict(const OcsvmModel& model, std::span<const double> kernel_row) {
  return decision_value(model, kernel_row) < 0.0 ? -1 : 1;
}

double dual_objective(std::span<const double> alphas, const KernelMatrix& k) {
  if (alphas.size() != k.size())
    throw std::invalid_argument("alpha length does not match kernel size");
  const std::vector<double> g = gradient(alphas, k);
  return 0.5 * simd::dot(alphas.data(), g.data(), alphas.size());
}

std::string model_to_json(const OcsvmModel& model) {
  nlohmann::json j;
  j["schema"] = "ocsvm/1";
  j["nu"] = model.nu();
  j["rho"] = model.rho();
  j["gamma"] = model.gamma();
  j["kernel"] = std::string(kernel_kind_name(model.kernel_kind()));
  j["alphas"] = model.alphas();
  j["support_indices"] = model.support_indices();
  return j.dump();
}

OcsvmModel model_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (!j.contains("schema") || j["schema"] != "ocsvm/1")
    throw std::runtime_error("unsupported model schema, expected ocsvm/1");
  OcsvmModel m = model_from_parts(
      j.at("nu").get<double>(), j.at("rho").get<double>(),
      j.at("alphas").get<std::vector<double>>(), j.at("gamma").get<double>(),
      kernel_kind_from_name(j.at("kernel").get<std::string>()), 1e-8);
  return m;
}

}  // namespace qkad
