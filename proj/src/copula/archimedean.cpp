#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dcop/copula.hpp"
#include "dcop/error.hpp"
#include "dcop/special.hpp"

namespace dcop::copula {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kIndependenceTol = 1e-12;
constexpr double kUpper = 1.0 - 0x1.0p-53;

double nudge(double u, bool* flagged) {
  if (u > 0.0 && u <= kUpper) return u;
  if (flagged) *flagged = true;
  if (!(u > 0.0)) return std::numeric_limits<double>::min();
  return kUpper;
}

// log(1 + sum_j expm1(t_j) + extra) for t_j >= 0 and extra >= 0.
double log1p_expm1_sum(const double* t, std::size_t n, double extra) {
  double tmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) tmax = std::max(tmax, t[j]);
  if (tmax < 30.0) {
    double s = extra;
    for (std::size_t j = 0; j < n; ++j) s += std::expm1(t[j]);
    return std::log1p(s);
  }
  if (std::isinf(tmax) || std::isinf(extra)) return kInf;
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) acc += std::exp(t[j] - tmax);
  return tmax + std::log(acc + (1.0 + extra - static_cast<double>(n)) * std::exp(-tmax));
}

constexpr std::size_t kStackDim = 128;

}  // namespace

// ---------------------------------------------------------------- Clayton

Clayton::Clayton(double theta) : theta_(theta), independent_(theta < kIndependenceTol) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::domain_error("Clayton theta must be positive");
  log_coeff_.resize(65);
  log_coeff_[0] = 0.0;
  for (std::size_t k = 1; k < log_coeff_.size(); ++k)
    log_coeff_[k] = log_coeff_[k - 1] + std::log1p(static_cast<double>(k - 1) * theta_);
}

double Clayton::log_coeff(std::size_t k) const {
  if (k < log_coeff_.size()) return log_coeff_[k];
  double s = log_coeff_.back();
  for (std::size_t i = log_coeff_.size() - 1; i < k; ++i) s += std::log1p(static_cast<double>(i) * theta_);
  return s;
}

double Clayton::generator(double u) const {
  if (independent_) return -std::log(u);
  return std::expm1(-theta_ * std::log(u));
}

double Clayton::generator_sum(std::span<const double> tail) const {
  double s = 0.0;
  for (double b : tail) s += generator(b);
  return s;
}

double Clayton::log_d_with_tail(std::span<const double> front, double tail_sum, bool* flagged) const {
  const std::size_t K = front.size();
  if (independent_) return -tail_sum;
  double t_stack[kStackDim];
  std::vector<double> t_heap;
  double* t = t_stack;
  if (K > kStackDim) {
    t_heap.resize(K);
    t = t_heap.data();
  }
  double sum_log = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    const double lu = std::log(nudge(front[j], flagged));
    sum_log += lu;
    t[j] = -theta_ * lu;
  }
  const double l1s = log1p_expm1_sum(t, K, tail_sum);
  if (std::isinf(l1s)) return -kInf;
  return log_coeff(K) - (1.0 + theta_) * sum_log - (1.0 / theta_ + static_cast<double>(K)) * l1s;
}

double Clayton::log_d(std::span<const double> front, std::span<const double> tail, bool* flagged) const {
  double tail_sum = 0.0;
  for (double b : tail) {
    if (!(b > 0.0)) {
      if (flagged) *flagged = true;
      return -kInf;
    }
    tail_sum += generator(std::min(b, 1.0));
  }
  return log_d_with_tail(front, tail_sum, flagged);
}

double Clayton::cdf(std::span<const double> u, bool* flagged) const {
  for (double x : u)
    if (!(x > 0.0)) {
      if (flagged) *flagged = true;
      return 0.0;
    }
  return std::clamp(std::exp(log_d({}, u, flagged)), 0.0, 1.0);
}

double Clayton::log_density(std::span<const double> u, bool* flagged) const { return log_d(u, {}, flagged); }

double Clayton::density(std::span<const double> u, bool* flagged) const { return std::exp(log_density(u, flagged)); }

double Clayton::conditional_cdf(std::size_t j, double v, std::span<const double> u) const {
  if (j >= u.size()) throw std::out_of_range("margin index");
  if (!(v > 0.0)) return 0.0;
  if (v >= 1.0) return 1.0;
  if (independent_) return v;
  const double K = static_cast<double>(u.size() - 1);
  double rest = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (i != j) rest += generator(nudge(u[i], nullptr));
  const double p = 1.0 / theta_ + K;
  const double g = generator(v);
  return std::exp(-p * (std::log1p(rest + g) - std::log1p(rest)));
}

double Clayton::conditional_inverse(std::size_t j, double w, std::span<const double> u) const {
  if (j >= u.size()) throw std::out_of_range("margin index");
  if (!(w > 0.0)) return 0.0;
  if (w >= 1.0) return 1.0;
  if (independent_) return w;
  const double K = static_cast<double>(u.size() - 1);
  double rest = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (i != j) rest += generator(nudge(u[i], nullptr));
  const double p = 1.0 / theta_ + K;
  // Closed form: g(v) = (1 + rest) * (w^(-1/p) - 1).
  const double g = (1.0 + rest) * std::expm1(-std::log(w) / p);
  return std::exp(-std::log1p(g) / theta_);
}

// ----------------------------------------------------------------- Gumbel

std::vector<std::vector<double>> gumbel_log_coefficient_table(std::size_t max_dim, double theta) {
  const double alpha = 1.0 / theta;
  const double log_alpha = std::log(alpha);
  std::vector<std::vector<double>> la;
  if (max_dim == 0) return la;
  la.push_back({log_alpha});
  for (std::size_t K = 1; K < max_dim; ++K) {
    const auto& prev = la.back();
    std::vector<double> next(K + 1, -kInf);
    for (std::size_t k = 1; k <= K + 1; ++k) {
      const double from_lower = k >= 2 ? log_alpha + prev[k - 2] : -kInf;
      double from_same = -kInf;
      if (k <= K) {
        const double w = static_cast<double>(K) - alpha * static_cast<double>(k);
        if (w > 0.0) from_same = std::log(w) + prev[k - 1];
      }
      next[k - 1] = log_add_exp(from_lower, from_same);
    }
    la.push_back(std::move(next));
  }
  return la;
}

double generalized_binomial(double x, std::size_t K) {
  double log_abs = -std::lgamma(static_cast<double>(K) + 1.0);
  int sign = 1;
  for (std::size_t i = 0; i < K; ++i) {
    const double f = x - static_cast<double>(i);
    if (f == 0.0) return 0.0;
    if (f < 0.0) sign = -sign;
    log_abs += std::log(std::abs(f));
  }
  return sign * std::exp(log_abs);
}

double gumbel_coefficient_explicit(std::size_t K, std::size_t k, double theta) {
  if (k == 0 || k > K) throw std::out_of_range("coefficient index");
  const double alpha = 1.0 / theta;
  std::vector<double> logs;
  std::vector<int> signs;
  for (std::size_t j = 0; j <= k; ++j) {
    const double x = static_cast<double>(j) * alpha;
    double log_abs = std::lgamma(static_cast<double>(k) + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
                     std::lgamma(static_cast<double>(k - j) + 1.0) - std::lgamma(static_cast<double>(K) + 1.0);
    int sign = ((K - j) % 2 == 0) ? 1 : -1;
    bool zero = false;
    for (std::size_t i = 0; i < K; ++i) {
      const double f = x - static_cast<double>(i);
      if (f == 0.0) {
        zero = true;
        break;
      }
      if (f < 0.0) sign = -sign;
      log_abs += std::log(std::abs(f));
    }
    if (zero) continue;
    logs.push_back(log_abs);
    signs.push_back(sign);
  }
  if (logs.empty()) return 0.0;
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (std::size_t q = 0; q < logs.size(); ++q) sum += signs[q] * std::exp(logs[q] - top);
  if (!(std::abs(sum) * 1e8 >= 1.0))
    throw PrecisionLossError("Gumbel coefficient a(" + std::to_string(K) + "," + std::to_string(k) +
                             ") lost more than 8 digits to cancellation");
  return sum * std::exp(std::lgamma(static_cast<double>(K) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) + top);
}

Gumbel::Gumbel(double theta, std::size_t max_dim)
    : theta_(theta), alpha_(1.0 / theta), independent_(theta - 1.0 < kIndependenceTol), max_dim_(max_dim) {
  if (!(theta >= 1.0) || !std::isfinite(theta)) throw std::domain_error("Gumbel theta must be >= 1");
  // One extra row for derivative-of-D evaluations.
  if (!independent_) log_coeff_ = gumbel_log_coefficient_table(max_dim + 1, theta);
}

std::span<const double> Gumbel::log_coefficients(std::size_t K) const {
  if (independent_) throw std::logic_error("independence Gumbel has no polynomial");
  if (K == 0 || K > log_coeff_.size()) throw std::out_of_range("Gumbel dimension exceeds coefficient table");
  return log_coeff_[K - 1];
}

double Gumbel::log_poly(std::size_t K, double x_log) const {
  const auto la = log_coefficients(K);
  double top = -kInf;
  for (std::size_t k = 0; k < K; ++k) top = std::max(top, la[k] + static_cast<double>(k + 1) * x_log);
  double acc = 0.0;
  for (std::size_t k = 0; k < K; ++k) acc += std::exp(la[k] + static_cast<double>(k + 1) * x_log - top);
  return top + std::log(acc);
}

double Gumbel::log_psi_derivative(std::size_t K, double s) const {
  if (K == 0) return -std::pow(s, alpha_);
  if (!(s > 0.0)) return kInf;
  const double ls = std::log(s);
  const double x_log = alpha_ * ls;
  return -std::exp(x_log) - static_cast<double>(K) * ls + log_poly(K, x_log);
}

double Gumbel::generator(double u) const {
  if (independent_) return -std::log(u);
  return std::exp(theta_ * std::log(-std::log(u)));
}

double Gumbel::generator_sum(std::span<const double> tail) const {
  double s = 0.0;
  for (double b : tail) s += b >= 1.0 ? 0.0 : generator(b);
  return s;
}

double Gumbel::log_d_with_tail(std::span<const double> front, double tail_sum, bool* flagged) const {
  const std::size_t K = front.size();
  if (independent_) return -tail_sum;
  double s = tail_sum;
  double sum_front = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    const double lu = std::log(nudge(front[j], flagged));
    const double l = std::log(-lu);
    s += std::exp(theta_ * l);
    sum_front += (theta_ - 1.0) * l - lu;
  }
  if (std::isinf(s)) return -kInf;
  return log_psi_derivative(K, s) + static_cast<double>(K) * std::log(theta_) + sum_front;
}

double Gumbel::log_d(std::span<const double> front, std::span<const double> tail, bool* flagged) const {
  double tail_sum = 0.0;
  for (double b : tail) {
    if (!(b > 0.0)) {
      if (flagged) *flagged = true;
      return -kInf;
    }
    if (b < 1.0) tail_sum += generator(b);
  }
  return log_d_with_tail(front, tail_sum, flagged);
}

double Gumbel::cdf(std::span<const double> u, bool* flagged) const {
  for (double x : u)
    if (!(x > 0.0)) {
      if (flagged) *flagged = true;
      return 0.0;
    }
  return std::clamp(std::exp(log_d({}, u, flagged)), 0.0, 1.0);
}

double Gumbel::log_density(std::span<const double> u, bool* flagged) const { return log_d(u, {}, flagged); }

double Gumbel::density(std::span<const double> u, bool* flagged) const { return std::exp(log_density(u, flagged)); }

double Gumbel::conditional_cdf(std::size_t j, double v, std::span<const double> u) const {
  if (j >= u.size()) throw std::out_of_range("margin index");
  if (!(v > 0.0)) return 0.0;
  if (v >= 1.0) return 1.0;
  if (independent_) return v;
  const std::size_t K = u.size() - 1;
  double rest = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (i != j) rest += generator(nudge(u[i], nullptr));
  return std::min(1.0, std::exp(log_psi_derivative(K, rest + generator(v)) - log_psi_derivative(K, rest)));
}

double Gumbel::conditional_inverse(std::size_t j, double w, std::span<const double> u) const {
  if (j >= u.size()) throw std::out_of_range("margin index");
  if (!(w > 0.0)) return 0.0;
  if (w >= 1.0) return 1.0;
  if (independent_) return w;
  const std::size_t K = u.size() - 1;
  double rest = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (i != j) rest += generator(nudge(u[i], nullptr));
  const double base = log_psi_derivative(K, rest);
  const double log_w = std::log(w);

  // Safeguarded Newton on v; h is increasing with h(0)=0, h(1)=1.
  double lo = 0.0;
  double hi = 1.0;
  double v = w;
  for (int iter = 0; iter < 200; ++iter) {
    const double lv = std::log(v);
    const double l = std::log(-lv);
    const double s = rest + std::exp(theta_ * l);
    const double log_h = log_psi_derivative(K, s) - base;
    const double h = std::exp(log_h);
    const double f = h - w;
    if (f > 0.0)
      hi = v;
    else
      lo = v;
    if (std::abs(log_h - log_w) < 1e-14 || hi - lo < 1e-15) return v;
    // dh/dv = h * exp(F_{K+1}(s) - F_K(s)) * theta (-log v)^(theta-1) / v
    const double log_dh =
        log_h + log_psi_derivative(K + 1, s) - log_psi_derivative(K, s) + std::log(theta_) + (theta_ - 1.0) * l - lv;
    double next = v - f / std::exp(log_dh);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - v) < 1e-15 * std::max(v, 1e-300)) return next;
    v = next;
  }
  throw NumericalError("Gumbel conditional inverse did not converge");
}

}  // namespace dcop::copula
