#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "dcop/error.hpp"
#include "dcop/likelihood.hpp"
#include "../parallel.hpp"

namespace dcop::lik {

double sum_log_terms(std::span<const double> terms) {
  std::vector<double> sorted(terms.begin(), terms.end());
  for (double x : sorted)
    if (std::isnan(x)) throw NumericalError("NaN in per-observation log-likelihood");
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (double x : sorted) s += x;
  return s;
}

Likelihood::Likelihood(copula::Family family, std::vector<ObservationBounds> data)
    : family_(family), data_(std::move(data)) {
  if (data_.empty()) throw DataError("no observations");
  dim_ = data_.front().dim();
  used_.resize(data_.size());
  for (std::size_t t = 0; t < data_.size(); ++t) {
    const auto& b = data_[t];
    if (b.dim() != dim_) throw DataError("observation " + std::to_string(t) + " has the wrong dimension");
    std::uint32_t k = 0;
    if (family_ == copula::Family::Gaussian) {
      for (auto d : b.discrete) k += d;
      k = k > 0 ? k - 1 : 0;
    } else {
      for (std::size_t j = 0; j < dim_; ++j) k += (b.discrete[j] && b.lower[j] > 0.0) ? 1 : 0;
    }
    used_[t] = k;
  }
}

std::shared_ptr<const AuxLayout> Likelihood::layout(std::size_t points) const {
  if (points == 0) throw ConfigError("point count must be positive");
  auto layout = std::make_shared<AuxLayout>();
  layout->n = data_.size();
  layout->points = points;
  layout->used = used_;
  layout->dim = std::max<std::size_t>(1, *std::max_element(used_.begin(), used_.end()));
  if ((points & (points - 1)) == 0) {
    const unsigned m = qmc::ceil_log2(points);
    layout->net = std::make_shared<const std::vector<std::uint32_t>>(qmc::net_digits(m, static_cast<unsigned>(layout->dim)));
  }
  return layout;
}

AuxStream Likelihood::make_aux(StreamKind kind, std::size_t points, std::uint64_t seed, bool gaussian_normals) const {
  if (kind == StreamKind::RQMC) points = std::size_t{1} << qmc::ceil_log2(points);
  return AuxStream::fresh(kind, layout(points), seed, gaussian_normals);
}

double Likelihood::log_observation(const copula::Model& model, std::size_t t, PointBlock points) const {
  if (family_ == copula::Family::Gaussian) return mixed_log_density(data_[t], std::get<copula::GaussianFactor>(model), points);
  return archimedean_log_estimate(data_[t], model, points);
}

LikelihoodEstimate Likelihood::finish(const AuxStream& aux, std::vector<double> per_obs) const {
  LikelihoodEstimate out;
  out.points = aux.points();
  out.stream = aux.kind();
  out.stream_seed = aux.seed();
  for (std::size_t t = 0; t < per_obs.size(); ++t)
    if (per_obs[t] == -std::numeric_limits<double>::infinity()) {
      out.zero_index = static_cast<std::ptrdiff_t>(t);
      break;
    }
  out.log_total = sum_log_terms(per_obs);
  out.per_observation = std::move(per_obs);
  return out;
}

LikelihoodEstimate Likelihood::evaluate(const copula::Model& model, const AuxStream& aux) const {
  if (aux.n() != data_.size()) throw std::invalid_argument("aux stream sized for a different data set");
  if (copula::family_of(model) != family_) throw std::invalid_argument("model family mismatch");
  std::vector<double> per(data_.size());
  const auto n = static_cast<std::ptrdiff_t>(data_.size());
  detail::ExceptionSlot failure;
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t t = 0; t < n; ++t) {
      const auto tt = static_cast<std::size_t>(t);
      failure.run([&] { per[tt] = log_observation(model, tt, aux.block(tt, scratch)); });
    }
  }
  failure.rethrow();
  return finish(aux, std::move(per));
}

LikelihoodEstimate Likelihood::evaluate_serial(const copula::Model& model, const AuxStream& aux) const {
  if (aux.n() != data_.size()) throw std::invalid_argument("aux stream sized for a different data set");
  if (copula::family_of(model) != family_) throw std::invalid_argument("model family mismatch");
  std::vector<double> per(data_.size());
  std::vector<double> scratch;
  for (std::size_t t = 0; t < data_.size(); ++t) per[t] = log_observation(model, t, aux.block(t, scratch));
  return finish(aux, std::move(per));
}

}  // namespace dcop::lik
