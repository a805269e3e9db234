#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dcop/likelihood.hpp"
#include "dcop/special.hpp"

namespace dcop::lik {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Streaming log-mean-exp.
class LogMeanExp {
 public:
  void add(double x) {
    ++count_;
    if (x == kNegInf) return;
    if (x > top_) {
      sum_ = sum_ * std::exp(top_ - x) + 1.0;
      top_ = x;
    } else {
      sum_ += std::exp(x - top_);
    }
  }
  double value() const {
    if (count_ == 0 || top_ == kNegInf) return kNegInf;
    return top_ + std::log(sum_ / static_cast<double>(count_));
  }

 private:
  double top_ = kNegInf;
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

template <class Arch>
double archimedean_kernel(const ObservationBounds& bounds, const Arch& model, PointBlock points, bool reduce) {
  const std::size_t J = bounds.dim();
  std::vector<std::size_t> integrate;
  std::vector<double> fixed;
  double tail_sum = 0.0;
  double log_width = 0.0;
  double log_f = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    if (!bounds.discrete[j]) {
      fixed.push_back(bounds.upper[j]);
      log_f += bounds.log_density[j];
      continue;
    }
    const double w = bounds.upper[j] - bounds.lower[j];
    if (!(w > 0.0)) return kNegInf;
    if (reduce && bounds.lower[j] == 0.0) {
      if (bounds.upper[j] < 1.0) tail_sum += model.generator(bounds.upper[j]);
    } else {
      integrate.push_back(j);
      log_width += std::log(w);
    }
  }
  const std::size_t K = integrate.size();
  std::vector<double> front(K + fixed.size());
  std::copy(fixed.begin(), fixed.end(), front.begin() + static_cast<std::ptrdiff_t>(K));
  if (K == 0) return model.log_d_with_tail(front, tail_sum) + log_f;
  if (points.rows == 0) throw std::invalid_argument("estimator needs at least one point");
  LogMeanExp acc;
  for (std::size_t i = 0; i < points.rows; ++i) {
    const double* p = points.row(i);
    for (std::size_t q = 0; q < K; ++q) {
      const std::size_t j = integrate[q];
      front[q] = bounds.lower[j] + (bounds.upper[j] - bounds.lower[j]) * p[q];
    }
    acc.add(model.log_d_with_tail(front, tail_sum));
  }
  return acc.value() + log_width + log_f;
}

template <class F>
double visit_archimedean(const copula::Model& model, F&& f) {
  if (const auto* c = std::get_if<copula::Clayton>(&model)) return f(*c);
  if (const auto* g = std::get_if<copula::Gumbel>(&model)) return f(*g);
  throw std::invalid_argument("Archimedean estimator called with a Gaussian model");
}

}  // namespace

double archimedean_log_estimate(const ObservationBounds& bounds, const copula::Model& model, PointBlock points) {
  return visit_archimedean(model, [&](const auto& m) { return archimedean_kernel(bounds, m, points, true); });
}

double rectangle_estimate(const ObservationBounds& bounds, const copula::Model& model, PointBlock points) {
  if (!bounds.all_discrete()) throw std::invalid_argument("rectangle_estimate needs all-discrete margins");
  return std::exp(visit_archimedean(model, [&](const auto& m) { return archimedean_kernel(bounds, m, points, false); }));
}

double reduced_rectangle_estimate(const ObservationBounds& bounds, const copula::Model& model, PointBlock points) {
  if (!bounds.all_discrete()) throw std::invalid_argument("reduced_rectangle_estimate needs all-discrete margins");
  return std::exp(archimedean_log_estimate(bounds, model, points));
}

}  // namespace dcop::lik
