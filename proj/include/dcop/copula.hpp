#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dcop::copula {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Family { Clayton, Gumbel, Gaussian };

std::string_view family_name(Family f);
Family parse_family(std::string_view name);

// Densities and D-functions nudge boundary inputs into (0,1) and set
// *flagged when they do. CDFs return the limit at u_j = 0.

class Clayton {
 public:
  explicit Clayton(double theta);

  double theta() const { return theta_; }
  bool independent() const { return independent_; }

  double cdf(std::span<const double> u, bool* flagged = nullptr) const;
  double log_density(std::span<const double> u, bool* flagged = nullptr) const;
  double density(std::span<const double> u, bool* flagged = nullptr) const;

  // Generator u^-theta - 1 and its sum over a tail block.
  double generator(double u) const;
  double generator_sum(std::span<const double> tail) const;

  // log of d^K C / du_1..du_K at (front, tail).
  double log_d(std::span<const double> front, std::span<const double> tail, bool* flagged = nullptr) const;
  double log_d_with_tail(std::span<const double> front, double tail_generator_sum, bool* flagged = nullptr) const;

  // Conditional CDF of margin j given the others, with u[j] ignored.
  double conditional_cdf(std::size_t j, double v, std::span<const double> u) const;
  double conditional_inverse(std::size_t j, double w, std::span<const double> u) const;

 private:
  double log_coeff(std::size_t k) const;  // sum_{i<k} log(1 + i theta)

  double theta_;
  bool independent_;
  std::vector<double> log_coeff_;
};

class Gumbel {
 public:
  explicit Gumbel(double theta, std::size_t max_dim = 64);

  double theta() const { return theta_; }
  bool independent() const { return independent_; }

  double cdf(std::span<const double> u, bool* flagged = nullptr) const;
  double log_density(std::span<const double> u, bool* flagged = nullptr) const;
  double density(std::span<const double> u, bool* flagged = nullptr) const;

  // Generator (-log u)^theta.
  double generator(double u) const;
  double generator_sum(std::span<const double> tail) const;

  double log_d(std::span<const double> front, std::span<const double> tail, bool* flagged = nullptr) const;
  double log_d_with_tail(std::span<const double> front, double tail_generator_sum, bool* flagged = nullptr) const;

  double conditional_cdf(std::size_t j, double v, std::span<const double> u) const;
  double conditional_inverse(std::size_t j, double w, std::span<const double> u) const;

  // log a_{K,k}, k = 1..K, of the derivative polynomial.
  std::span<const double> log_coefficients(std::size_t K) const;

 private:
  // log of (-1)^K psi^(K)(s) with psi(s) = exp(-s^(1/theta)).
  double log_psi_derivative(std::size_t K, double s) const;
  double log_poly(std::size_t K, double x_log) const;

  double theta_;
  double alpha_;
  bool independent_;
  std::size_t max_dim_;
  std::vector<std::vector<double>> log_coeff_;  // [K-1][k-1]
};

// Stable nonnegative recursion for log a_{K,k}; entries may be -inf.
std::vector<std::vector<double>> gumbel_log_coefficient_table(std::size_t max_dim, double theta);

// Alternating closed form (K!/k!) sum_j C(k,j) C(j/theta,K) (-1)^(K-j).
// Throws PrecisionLossError when cancellation exceeds 1e8.
double gumbel_coefficient_explicit(std::size_t K, std::size_t k, double theta);

// Generalized binomial coefficient C(x, K).
double generalized_binomial(double x, std::size_t K);

class GaussianFactor {
 public:
  // Loadings are J x k, lower triangular in the top k rows, positive diagonal.
  explicit GaussianFactor(Eigen::MatrixXd loadings);
  static GaussianFactor independence(std::size_t dim);

  std::size_t dim() const { return static_cast<std::size_t>(loadings_.rows()); }
  std::size_t factors() const { return static_cast<std::size_t>(loadings_.cols()); }
  const Eigen::MatrixXd& loadings() const { return loadings_; }
  const Eigen::MatrixXd& sigma() const { return sigma_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  // sqrt(sigma_jj)
  const Eigen::VectorXd& scale() const { return scale_; }

  double log_density(std::span<const double> u, bool* flagged = nullptr) const;
  double density(std::span<const double> u, bool* flagged = nullptr) const;

  double conditional_cdf(std::size_t j, double v, std::span<const double> u) const;
  double conditional_inverse(std::size_t j, double w, std::span<const double> u) const;
  // Conditional law of z_j given the other z's on the latent scale.
  void conditional_moments(std::size_t j, std::span<const double> z, double& mean, double& sd) const;

 private:
  Eigen::MatrixXd loadings_;
  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd chol_;
  Eigen::MatrixXd precision_;
  Eigen::VectorXd scale_;
  double log_det_corr_ = 0.0;
  Eigen::MatrixXd corr_inv_minus_identity_;
};

struct SigmaFactor {
  Eigen::MatrixXd sigma;
  Eigen::MatrixXd chol;
};

SigmaFactor gaussian_sigma(const Eigen::MatrixXd& loadings);

// Validates the loading-matrix shape constraints; throws ConfigError.
void check_loadings(const Eigen::MatrixXd& loadings);

using Model = std::variant<Clayton, Gumbel, GaussianFactor>;

Family family_of(const Model& model);
double log_density(const Model& model, std::span<const double> u, bool* flagged = nullptr);
double conditional_cdf(const Model& model, std::size_t j, double v, std::span<const double> u);
double conditional_inverse(const Model& model, std::size_t j, double w, std::span<const double> u);

// n i.i.d. draws; dim is required for the Archimedean families.
RowMatrix sample_copula(const Model& model, std::size_t n, std::size_t dim, std::uint64_t seed);

struct InverseGammaPrior {
  double alpha = 2.2;
  double beta = 1.1;
};
struct UniformPrior {
  double lo = 0.0;
  double hi = 1000.0;
};
struct NormalLoadingsPrior {
  double mean = 0.0;
  double variance = 10.0;
};
using PriorSpec = std::variant<InverseGammaPrior, UniformPrior, NormalLoadingsPrior>;

PriorSpec default_prior(Family family);
void check_prior(Family family, const PriorSpec& prior);

double inverse_gamma_log_pdf(double x, double alpha, double beta);

// Maps unconstrained eta to model parameters: log theta (Clayton),
// log(theta - 1) (Gumbel), free loadings with log diagonal (Gaussian).
class Parameterization {
 public:
  Parameterization(Family family, std::size_t dim, std::size_t factors = 0);

  Family family() const { return family_; }
  std::size_t dim() const { return dim_; }
  std::size_t factors() const { return factors_; }
  std::size_t size() const { return size_; }
  std::vector<std::string> names() const;

  Model model(std::span<const double> eta) const;
  // Also accepts boundary values such as Gumbel theta = 1.
  Model model_natural(std::span<const double> natural) const;
  std::vector<double> natural(std::span<const double> eta) const;
  std::vector<double> eta(std::span<const double> natural) const;
  std::vector<double> eta_of(const Model& model) const;
  double log_jacobian(std::span<const double> eta) const;

  double log_prior_natural(const PriorSpec& prior, std::span<const double> natural) const;
  // Includes the log Jacobian.
  double log_prior(const PriorSpec& prior, std::span<const double> eta) const;

  Eigen::MatrixXd loadings(std::span<const double> natural) const;

 private:
  bool is_diagonal(std::size_t index) const { return diag_mask_[index]; }

  Family family_;
  std::size_t dim_;
  std::size_t factors_;
  std::size_t size_;
  std::vector<bool> diag_mask_;
  std::vector<std::pair<std::size_t, std::size_t>> cells_;
};

}  // namespace dcop::copula
