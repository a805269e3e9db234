#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "dcop/copula.hpp"
#include "dcop/marginals.hpp"
#include "dcop/qmc.hpp"

namespace dcop::lik {

struct ObservationBounds {
  // Discrete margins: (lower, upper] = (F(x-), F(x)]. Continuous margins:
  // lower == upper == F(x) and log_density holds log f(x).
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<double> log_density;
  std::vector<std::uint8_t> discrete;

  std::size_t dim() const { return lower.size(); }
  bool all_discrete() const;
};

ObservationBounds bounds_from_data(std::span<const double> x, std::span<const Marginal> margins);

// Row-major block of M points; only the first `cols` coordinates are read.
struct PointBlock {
  const double* data = nullptr;
  std::size_t rows = 0;
  std::size_t stride = 0;

  const double* row(std::size_t i) const { return data + i * stride; }
};

// Unbiased estimate of Pr(rectangle) by integrating the copula density over
// all J discrete margins. Archimedean models only.
double rectangle_estimate(const ObservationBounds& bounds, const copula::Model& model, PointBlock points);

// Same probability with margins whose lower bound is 0 collapsed into the
// D-function; uses the first K point coordinates.
double reduced_rectangle_estimate(const ObservationBounds& bounds, const copula::Model& model, PointBlock points);

struct GenzBretzStats {
  double mean = 0.0;
  double variance = 0.0;  // across the M points
  bool clamped = false;
};

// Sequential-conditioning estimate of Pr(a < Z <= b) for Z ~ N(0, L L').
// Uses the first J-1 point coordinates.
double genz_bretz(const Eigen::MatrixXd& chol, std::span<const double> a, std::span<const double> b, PointBlock points,
                  GenzBretzStats* stats = nullptr);

// log p(x) for a Gaussian factor copula with any mix of discrete and
// continuous margins. Uses the first (#discrete - 1) point coordinates.
double mixed_log_density(const ObservationBounds& bounds, const copula::GaussianFactor& model, PointBlock points);

// Archimedean log estimate for discrete or mixed margins (reduced form).
double archimedean_log_estimate(const ObservationBounds& bounds, const copula::Model& model, PointBlock points);

enum class StreamKind { MC, RQMC };

const char* stream_name(StreamKind kind);
StreamKind parse_stream(const char* name);

struct AuxLayout {
  std::size_t n = 0;
  std::size_t points = 0;  // M, a power of 2 for RQMC
  std::size_t dim = 0;     // coordinates available per point
  std::vector<std::uint32_t> used;  // coordinates read for each observation
  std::shared_ptr<const std::vector<std::uint32_t>> net;  // raw Sobol digits, points x dim
};

// Auxiliary randomness u = {u^(t)}: one capsule per observation carrying
// the seed or scrambling tree that regenerates its M x dim block.
class AuxStream {
 public:
  struct Capsule {
    std::uint64_t seed = 0;
    std::optional<qmc::ScrambleTree> tree;
    std::shared_ptr<const std::vector<double>> normals;  // correlated MC only
    std::shared_ptr<const std::vector<double>> points;   // materialization cache
  };

  static AuxStream fresh(StreamKind kind, std::shared_ptr<const AuxLayout> layout, std::uint64_t seed,
                         bool gaussian_normals = false, std::size_t cache_budget = kDefaultCacheBudget);

  StreamKind kind() const { return kind_; }
  bool uses_normals() const { return normals_; }
  const AuxLayout& layout() const { return *layout_; }
  std::shared_ptr<const AuxLayout> layout_ptr() const { return layout_; }
  std::size_t n() const { return layout_->n; }
  std::size_t points() const { return layout_->points; }
  std::uint64_t seed() const { return seed_; }
  const Capsule& capsule(std::size_t t) const { return capsules_[t]; }

  // Row-major M x used(t) block for observation t. Uses the cache when
  // present, otherwise fills scratch.
  PointBlock block(std::size_t t, std::vector<double>& scratch) const;

  // New stream with observations [begin, end) regenerated from seed.
  AuxStream refreshed(std::size_t begin, std::size_t end, std::uint64_t seed) const;
  // Every tree replaced by tree.correlated(depth, fresh); RQMC only.
  AuxStream correlated(qmc::CorrDepth depth, std::uint64_t seed) const;
  // u' = phi u + sqrt(1 - phi^2) u* on the normal scale; MC normals only.
  AuxStream autoregressive(double phi, std::uint64_t seed) const;

  // Capsules regenerated when this stream was derived from its parent.
  std::size_t regenerated() const { return regenerated_; }

  static constexpr std::size_t kDefaultCacheBudget = std::size_t{1} << 25;  // doubles

 private:
  AuxStream() = default;
  Capsule make_capsule(std::size_t t, std::uint64_t seed) const;
  void materialize(const Capsule& c, std::size_t t, std::span<double> out) const;

  StreamKind kind_ = StreamKind::MC;
  bool normals_ = false;
  bool caching_ = true;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const AuxLayout> layout_;
  std::vector<Capsule> capsules_;
  std::size_t regenerated_ = 0;
};

struct LikelihoodEstimate {
  double log_total = 0.0;
  std::vector<double> per_observation;  // log L_t
  std::size_t points = 0;
  StreamKind stream = StreamKind::MC;
  std::uint64_t stream_seed = 0;
  std::ptrdiff_t zero_index = -1;  // first observation with L_t = 0
};

// Order-independent sum of per-observation log terms.
double sum_log_terms(std::span<const double> terms);

// Log-likelihood estimator for a fixed data set: a parallel map over
// observations followed by an ordered reduction.
class Likelihood {
 public:
  Likelihood(copula::Family family, std::vector<ObservationBounds> data);

  copula::Family family() const { return family_; }
  std::size_t n() const { return data_.size(); }
  std::size_t dim() const { return dim_; }
  const std::vector<ObservationBounds>& data() const { return data_; }

  std::shared_ptr<const AuxLayout> layout(std::size_t points) const;
  AuxStream make_aux(StreamKind kind, std::size_t points, std::uint64_t seed, bool gaussian_normals = false) const;

  LikelihoodEstimate evaluate(const copula::Model& model, const AuxStream& aux) const;
  // Single-threaded reference; bit-identical to evaluate().
  LikelihoodEstimate evaluate_serial(const copula::Model& model, const AuxStream& aux) const;

  double log_observation(const copula::Model& model, std::size_t t, PointBlock points) const;

 private:
  LikelihoodEstimate finish(const AuxStream& aux, std::vector<double> per_obs) const;

  copula::Family family_;
  std::size_t dim_ = 0;
  std::vector<ObservationBounds> data_;
  std::vector<std::uint32_t> used_;
};

}  // namespace dcop::lik
