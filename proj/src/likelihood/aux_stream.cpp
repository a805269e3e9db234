#include <cmath>
#include <cstring>
#include <stdexcept>

#include "dcop/error.hpp"
#include "dcop/likelihood.hpp"
#include "dcop/rng.hpp"
#include "dcop/special.hpp"
#include "../parallel.hpp"

namespace dcop::lik {

const char* stream_name(StreamKind kind) { return kind == StreamKind::MC ? "mc" : "rqmc"; }

StreamKind parse_stream(const char* name) {
  if (std::strcmp(name, "mc") == 0) return StreamKind::MC;
  if (std::strcmp(name, "rqmc") == 0) return StreamKind::RQMC;
  throw ConfigError(std::string("unknown stream kind '") + name + "'");
}

AuxStream AuxStream::fresh(StreamKind kind, std::shared_ptr<const AuxLayout> layout, std::uint64_t seed,
                           bool gaussian_normals, std::size_t cache_budget) {
  if (!layout || layout->points == 0) throw std::invalid_argument("aux layout needs points");
  if (layout->used.size() != layout->n) throw std::invalid_argument("aux layout size mismatch");
  if (kind == StreamKind::RQMC) {
    if ((layout->points & (layout->points - 1)) != 0) throw std::invalid_argument("RQMC needs a power-of-two point count");
    if (!layout->net) throw std::invalid_argument("RQMC layout lacks a net");
    if (gaussian_normals) throw std::invalid_argument("normal-scale aux applies to MC streams only");
  }
  AuxStream aux;
  aux.kind_ = kind;
  aux.normals_ = gaussian_normals;
  aux.seed_ = seed;
  aux.layout_ = std::move(layout);
  std::size_t total = 0;
  for (auto u : aux.layout_->used) total += u;
  aux.caching_ = total * aux.layout_->points <= cache_budget;
  aux.capsules_.resize(aux.layout_->n);
  const auto n = static_cast<std::ptrdiff_t>(aux.layout_->n);
  detail::ExceptionSlot failure;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t t = 0; t < n; ++t)
    failure.run([&] {
      const auto tt = static_cast<std::size_t>(t);
      aux.capsules_[tt] = aux.make_capsule(tt, derive_seed(seed, static_cast<std::uint64_t>(t)));
    });
  failure.rethrow();
  aux.regenerated_ = aux.layout_->n;
  return aux;
}

AuxStream::Capsule AuxStream::make_capsule(std::size_t t, std::uint64_t seed) const {
  Capsule c;
  c.seed = seed;
  const std::size_t M = layout_->points;
  const std::size_t used = layout_->used[t];
  if (kind_ == StreamKind::RQMC) c.tree.emplace(seed);
  if (normals_) {
    auto z = std::make_shared<std::vector<double>>(M * used);
    for (std::size_t k = 0; k < z->size(); ++k) (*z)[k] = norm_quantile(bits_to_open_unit(hash64(seed, k)));
    c.normals = std::move(z);
  }
  if (caching_ && used > 0) {
    auto pts = std::make_shared<std::vector<double>>(M * used);
    materialize(c, t, *pts);
    c.points = std::move(pts);
  }
  return c;
}

void AuxStream::materialize(const Capsule& c, std::size_t t, std::span<double> out) const {
  const std::size_t M = layout_->points;
  const std::size_t used = layout_->used[t];
  const std::size_t dim = layout_->dim;
  if (kind_ == StreamKind::RQMC) {
    qmc::scramble_block(*layout_->net, M, dim, used, *c.tree, out);
    return;
  }
  if (normals_) {
    for (std::size_t k = 0; k < M * used; ++k) out[k] = norm_cdf((*c.normals)[k]);
    return;
  }
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < used; ++j) out[i * used + j] = bits_to_unit(hash64(c.seed, i * dim + j));
}

PointBlock AuxStream::block(std::size_t t, std::vector<double>& scratch) const {
  const Capsule& c = capsules_[t];
  const std::size_t M = layout_->points;
  const std::size_t used = layout_->used[t];
  if (c.points) return {c.points->data(), M, used};
  scratch.resize(M * used);
  materialize(c, t, scratch);
  return {scratch.data(), M, used};
}

AuxStream AuxStream::refreshed(std::size_t begin, std::size_t end, std::uint64_t seed) const {
  if (begin > end || end > n()) throw std::out_of_range("refresh range");
  AuxStream out = *this;
  out.seed_ = seed;
  const auto b = static_cast<std::ptrdiff_t>(begin);
  const auto e = static_cast<std::ptrdiff_t>(end);
  detail::ExceptionSlot failure;
#pragma omp parallel for schedule(dynamic, 8) if (end - begin > 16)
  for (std::ptrdiff_t t = b; t < e; ++t)
    failure.run([&] {
      const auto tt = static_cast<std::size_t>(t);
      out.capsules_[tt] = out.make_capsule(tt, derive_seed(seed, static_cast<std::uint64_t>(t)));
    });
  failure.rethrow();
  out.regenerated_ = end - begin;
  return out;
}

AuxStream AuxStream::correlated(qmc::CorrDepth depth, std::uint64_t seed) const {
  if (kind_ != StreamKind::RQMC) throw std::logic_error("correlated scrambling needs an RQMC stream");
  AuxStream out = *this;
  out.seed_ = seed;
  if (depth.is_infinite()) {
    out.regenerated_ = 0;
    return out;
  }
  const auto n = static_cast<std::ptrdiff_t>(this->n());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    Capsule c;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    c.tree = capsules_[tt].tree->correlated(depth, c.seed);
    out.capsules_[tt] = c;
    if (out.caching_ && layout_->used[tt] > 0) {
      auto pts = std::make_shared<std::vector<double>>(layout_->points * layout_->used[tt]);
      out.materialize(out.capsules_[tt], tt, *pts);
      out.capsules_[tt].points = std::move(pts);
    }
  }
  out.regenerated_ = this->n();
  return out;
}

AuxStream AuxStream::autoregressive(double phi, std::uint64_t seed) const {
  if (!normals_) throw std::logic_error("autoregressive update needs a normal-scale MC stream");
  if (!(phi >= 0.0 && phi <= 1.0)) throw std::invalid_argument("phi must lie in [0,1]");
  AuxStream out = *this;
  out.seed_ = seed;
  if (phi == 1.0) {
    out.regenerated_ = 0;
    return out;
  }
  const double innov = std::sqrt(1.0 - phi * phi);
  const auto n = static_cast<std::ptrdiff_t>(this->n());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    const auto tt = static_cast<std::size_t>(t);
    Capsule c;
    c.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    const auto& z = *capsules_[tt].normals;
    auto next = std::make_shared<std::vector<double>>(z.size());
    for (std::size_t k = 0; k < z.size(); ++k)
      (*next)[k] = phi * z[k] + innov * norm_quantile(bits_to_open_unit(hash64(c.seed, k)));
    c.normals = std::move(next);
    out.capsules_[tt] = c;
    if (out.caching_ && layout_->used[tt] > 0) {
      auto pts = std::make_shared<std::vector<double>>(z.size());
      out.materialize(out.capsules_[tt], tt, *pts);
      out.capsules_[tt].points = std::move(pts);
    }
  }
  out.regenerated_ = this->n();
  return out;
}

}  // namespace dcop::lik
