#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

Mat2 mul2(const Mat2& a, const Mat2& b) {
  Mat2 out{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out[i * 2 + j] += a[i * 2 + k] * b[k * 2 + j];
  return out;
}

Mat4 mul4(const Mat4& a, const Mat4& b) {
  Mat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) out[i * 4 + j] += a[i * 4 + k] * b[k * 4 + j];
  return out;
}

Mat4 kron(const Mat2& first, const Mat2& second) {
  Mat4 out{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          out[(2 * a + b) * 4 + (2 * c + d)] =
              first[a * 2 + c] * second[b * 2 + d];
  return out;
}

double max_abs_diff(std::span<const cd> a, std::span<const cd> b) {
  if (a.size() != b.size()) throw std::invalid_argument("size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool equal_up_to_phase(std::span<const cd> a, std::span<const cd> b,
                       double tol) {
  if (a.size() != b.size()) return false;
  std::size_t ref = 0;
  double best = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i]) > best) {
      best = std::abs(a[i]);
      ref = i;
    }
  }
  if (best <= tol) return max_abs_diff(a, b) <= tol;
  const cd phase = b[ref] / a[ref];
  if (std::abs(std::abs(phase) - 1.0) > tol) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(b[i] - phase * a[i]) > tol) return false;
  return true;
}

Mat2 rot_x(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  return {cd(c, 0), cd(0, -s), cd(0, -s), cd(c, 0)};
}

Mat2 rot_z(double theta) {
  return {std::exp(cd(0, -theta / 2)), cd(0, 0), cd(0, 0),
          std::exp(cd(0, theta / 2))};
}

Mat4 rot_xx(double theta) {
  const double c = std::cos(theta / 2), s = std::sin(theta / 2);
  Mat4 out{};
  for (int i = 0; i < 4; ++i) {
    out[i * 4 + i] = cd(c, 0);
    out[i * 4 + (3 - i)] = cd(0, -s);
  }
  return out;
}

Mat4 rot_zx(double theta) {
  const Mat2 top = rot_x(theta);     // first-factor bit 0
  const Mat2 bottom = rot_x(-theta);  // first-factor bit 1
  Mat4 out{};
  for (int b = 0; b < 2; ++b)
    for (int d = 0; d < 2; ++d) {
      out[(0 + b) * 4 + (0 + d)] = top[b * 2 + d];
      out[(2 + b) * 4 + (2 + d)] = bottom[b * 2 + d];
    }
  return out;
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a,
                                          std::size_t n) {
  if (a.size() != n * n) throw std::invalid_argument("bad matrix size");
  auto at = [&](std::size_t i, std::size_t j) -> double& {
    return a[i * n + j];
  };
  double norm = 0.0;
  for (double v : a) norm += v * v;
  norm = std::sqrt(norm);
  const double stop = 1e-15 * (norm + 1.0);

  for (int sweep = 0; sweep < 200; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
    if (std::sqrt(2.0 * off) <= stop) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (std::abs(apq) <= stop / (double)(n * n)) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t =
            (theta >= 0 ? 1.0 : -1.0) /
            (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = c * akp - s * akq;
          at(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = at(p, k), aqk = at(q, k);
          at(p, k) = c * apk - s * aqk;
          at(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

namespace {

double adapt(const std::function<double(double)>& f, double a, double b,
             double fa, double fm, double fb, double whole, double tol,
             int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double both = left + right;
  if (depth <= 0 || std::abs(both - whole) <= 15.0 * tol)
    return both + (both - whole) / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adapt(f, a, b, fa, fm, fb, whole, tol, 60);
}

namespace {

// Projection onto {0 <= x_i <= 1, sum x = s} by bisecting the shift.
std::vector<double> project_box_sum(std::vector<double> v, double s) {
  const auto mass = [&](double shift) {
    double total = 0.0;
    for (double x : v) total += std::clamp(x - shift, 0.0, 1.0);
    return total;
  };
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mass(mid) >= s ? lo : hi) = mid;
  }
  const double shift = 0.5 * (lo + hi);
  for (double& x : v) x = std::clamp(x - shift, 0.0, 1.0);
  // Nudge the sum exactly onto s through the interior coordinates.
  double gap = s;
  for (double x : v) gap -= x;
  for (std::size_t i = 0; i < v.size() && std::abs(gap) > 0.0; ++i) {
    const double next = std::clamp(v[i] + gap, 0.0, 1.0);
    gap -= next - v[i];
    v[i] = next;
  }
  return v;
}

}  // namespace

QpSolution solve_box_sum_qp(const std::vector<double>& k, std::size_t n,
                            double s, long long max_iter) {
  if (k.size() != n * n) throw std::invalid_argument("bad gram size");
  if (s < 0.0 || s > (double)n) throw std::invalid_argument("infeasible sum");

  const auto grad = [&](const std::vector<double>& x) {
    std::vector<double> g(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i] += k[i * n + j] * x[j];
    return g;
  };
  const auto objective = [&](const std::vector<double>& x) {
    const std::vector<double> g = grad(x);
    double f = 0.0;
    for (std::size_t i = 0; i < n; ++i) f += x[i] * g[i];
    return 0.5 * f;
  };

  double lipschitz = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += std::abs(k[i * n + j]);
    lipschitz = std::max(lipschitz, row);
  }
  if (lipschitz == 0.0) lipschitz = 1.0;
  const double step = 1.0 / lipschitz;

  std::vector<double> x = project_box_sum(std::vector<double>(n, s / n), s);
  std::vector<double> y = x, x_prev = x;
  double t = 1.0;
  double f_prev = objective(x);

  for (long long it = 0; it < max_iter; ++it) {
    std::vector<double> g = grad(y);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = y[i] - step * g[i];
    x_prev = x;
    x = project_box_sum(std::move(z), s);

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i)
      y[i] = x[i] + beta * (x[i] - x_prev[i]);
    t = t_next;

    if ((it & 63) == 63) {
      const double f = objective(x);
      if (f > f_prev) {  // momentum overshoot: restart
        y = x;
        t = 1.0;
      }
      if (std::abs(f_prev - f) <= 1e-17 * (std::abs(f) + 1.0) && it > 256)
        break;
      f_prev = f;
    }
  }

  QpSolution sol;
  sol.x = x;
  sol.objective = objective(x);

  const std::vector<double> g = grad(x);
  const double at_tol = 1e-9;
  double rho = 0.0;
  std::size_t free_count = 0;
  double upper_max = -1e300, zero_min = 1e300;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > at_tol && x[i] < 1.0 - at_tol) {
      rho += g[i];
      ++free_count;
    } else if (x[i] >= 1.0 - at_tol) {
      upper_max = std::max(upper_max, g[i]);
    } else {
      zero_min = std::min(zero_min, g[i]);
    }
  }
  if (free_count > 0) {
    rho /= (double)free_count;
  } else {
    const double lo = upper_max > -1e300 ? upper_max : zero_min;
    const double hi = zero_min < 1e300 ? zero_min : upper_max;
    rho = 0.5 * (lo + hi);
  }
  double residual = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += x[i];
    if (x[i] > at_tol && x[i] < 1.0 - at_tol)
      residual = std::max(residual, std::abs(g[i] - rho));
    else if (x[i] >= 1.0 - at_tol)
      residual = std::max(residual, std::max(0.0, g[i] - rho));
    else
      residual = std::max(residual, std::max(0.0, rho - g[i]));
  }
  residual = std::max(residual, std::abs(total - s));
  sol.kkt_residual = residual;
  return sol;
}

double mean(std::span<const double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / (double)v.size();
}

double sample_std(std::span<const double> v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (double)(v.size() - 1));
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  const double mx = mean(x), my = mean(y);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

}  // namespace oracle
