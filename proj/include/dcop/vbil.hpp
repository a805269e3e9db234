#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dcop/likelihood.hpp"
#include "dcop/pm.hpp"
#include "dcop/rng.hpp"

namespace dcop::vbil {

// Column-stacked lower triangle of a square matrix and its inverse.
Eigen::VectorXd vech(const Eigen::MatrixXd& a);
Eigen::MatrixXd unvech(const Eigen::VectorXd& v, std::size_t d);
// D_d with D_d vech(A) = vec(A) for symmetric A, and its Moore-Penrose inverse.
Eigen::MatrixXd duplication(std::size_t d);
Eigen::MatrixXd duplication_pinv(std::size_t d);

// Variational density over the target's eta (or a monotone transform of it).
class Family {
 public:
  virtual ~Family() = default;
  virtual std::unique_ptr<Family> clone() const = 0;
  virtual std::string name() const = 0;

  virtual std::size_t size() const = 0;  // length of lambda
  virtual Eigen::VectorXd params() const = 0;
  virtual bool feasible(const Eigen::VectorXd& lambda) const = 0;
  virtual void set_params(const Eigen::VectorXd& lambda) = 0;
  virtual std::vector<std::string> param_names() const = 0;

  virtual std::vector<double> sample_eta(CounterRng& rng) const = 0;
  // log q and its lambda-score at a point given on the eta scale.
  virtual double log_q(std::span<const double> eta) const = 0;
  virtual Eigen::VectorXd score(std::span<const double> eta) const = 0;
  virtual Eigen::MatrixXd fisher() const = 0;
  virtual Eigen::VectorXd natural_gradient(const Eigen::VectorXd& h) const;
  // True when q is a density in eta; false when it is a density in exp(eta),
  // in which case the log prior drops the log Jacobian.
  virtual bool density_in_eta() const = 0;
};

// Inverse gamma on theta* = exp(eta): theta (Clayton) or theta - 1 (Gumbel).
class InverseGamma final : public Family {
 public:
  InverseGamma(double a = 2.0, double b = 1.0);

  double a() const { return a_; }
  double b() const { return b_; }
  double log_pdf(double x) const;
  Eigen::Vector2d score_at(double x) const;
  Eigen::Matrix2d fisher_matrix() const;
  double sample(CounterRng& rng) const;
  double mean() const;      // b / (a - 1), infinite for a <= 1
  double variance() const;  // infinite for a <= 2

  std::unique_ptr<Family> clone() const override { return std::make_unique<InverseGamma>(*this); }
  std::string name() const override { return "inverse-gamma"; }
  std::size_t size() const override { return 2; }
  Eigen::VectorXd params() const override;
  bool feasible(const Eigen::VectorXd& lambda) const override;
  void set_params(const Eigen::VectorXd& lambda) override;
  std::vector<std::string> param_names() const override { return {"a", "b"}; }
  std::vector<double> sample_eta(CounterRng& rng) const override;
  double log_q(std::span<const double> eta) const override;
  Eigen::VectorXd score(std::span<const double> eta) const override;
  Eigen::MatrixXd fisher() const override { return fisher_matrix(); }
  bool density_in_eta() const override { return false; }

 private:
  double a_;
  double b_;
};

// Multivariate normal on eta in natural parameters
// lambda = (Sigma^-1 mu, -0.5 D_d' vec(Sigma^-1)).
class Gaussian final : public Family {
 public:
  Gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma);
  static Gaussian from_natural(const Eigen::VectorXd& lambda, std::size_t d);

  std::size_t dim() const { return d_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  Eigen::VectorXd lambda1() const;
  Eigen::VectorXd lambda2() const;
  // Inverse Fisher information in closed form.
  Eigen::MatrixXd fisher_inverse() const;

  std::unique_ptr<Family> clone() const override { return std::make_unique<Gaussian>(*this); }
  std::string name() const override { return "gaussian"; }
  std::size_t size() const override { return d_ + d_ * (d_ + 1) / 2; }
  Eigen::VectorXd params() const override;
  bool feasible(const Eigen::VectorXd& lambda) const override;
  void set_params(const Eigen::VectorXd& lambda) override;
  std::vector<std::string> param_names() const override;
  std::vector<double> sample_eta(CounterRng& rng) const override;
  double log_q(std::span<const double> eta) const override;
  Eigen::VectorXd score(std::span<const double> eta) const override;
  Eigen::MatrixXd fisher() const override;
  Eigen::VectorXd natural_gradient(const Eigen::VectorXd& h) const override;
  bool density_in_eta() const override { return true; }

 private:
  void refresh();

  std::size_t d_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd precision_;
  double log_det_ = 0.0;
};

enum class Schedule { Ratio, Harmonic, Constant };

struct VBILConfig {
  std::size_t samples = 50;
  Schedule schedule = Schedule::Ratio;  // Ratio: a0 tau/(tau+t); Harmonic: a0/(tau+t)
  double a0 = 1.0;
  double tau = 10.0;
  std::size_t window = 5;
  double epsilon = 1e-4;
  std::size_t max_iterations = 200;
  std::size_t points = 64;
  lik::StreamKind stream = lik::StreamKind::RQMC;
  bool control_variate = true;
  bool common_randomness = true;
  double divergence_drop = 1e3;
  std::uint64_t seed = 1;

  double rate(std::size_t t) const;
  void validate() const;
};

struct GradientEstimate {
  Eigen::VectorXd gradient;   // H-hat
  Eigen::VectorXd control;    // c computed from these draws
  double lower_bound = 0.0;   // mean of h - log q over usable draws
  std::size_t usable = 0;
  std::size_t zero_estimates = 0;
};

// One gradient estimate at the family's current lambda. `control` is the
// coefficient from the previous iteration (zero vector to disable).
GradientEstimate estimate_gradient(const Family& q, const pm::Target& target, const VBILConfig& config,
                                   const Eigen::VectorXd& control, std::uint64_t seed);

struct TraceRow {
  std::size_t iteration = 0;
  std::vector<double> lambda;
  double lower_bound = 0.0;        // per observation
  double lower_bound_total = 0.0;
  double windowed = 0.0;           // NaN before the window fills
  double gradient_norm = 0.0;
  double rate = 0.0;
};

struct VBILResult {
  std::unique_ptr<Family> family;
  std::vector<TraceRow> trace;
  bool converged = false;
  std::size_t iterations = 0;
  double seconds = 0.0;
  std::vector<double> mean;  // implied posterior mean on the natural scale
  std::vector<double> sd;
};

VBILResult run(const Family& init, const pm::Target& target, const VBILConfig& config, std::size_t n_obs);

// Posterior moments of the natural parameters implied by q.
void natural_moments(const Family& q, const pm::Target& target, std::size_t draws, std::uint64_t seed,
                     std::vector<double>& mean, std::vector<double>& sd);

}  // namespace dcop::vbil
