#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dcop::lik {

// Marginal law of one observed column. Discrete margins expose F(x-) and
// F(x); continuous ones expose F(x) and log f(x).
class Marginal {
 public:
  enum class Kind { Bernoulli, Fixed, EmpiricalDiscrete, EmpiricalContinuous, Gaussian };

  static Marginal bernoulli(double p);
  static Marginal fixed(std::vector<double> support, std::vector<double> probs);
  // Poisson(rate) on {0..max_value}; the upper tail mass sits on max_value.
  static Marginal poisson(double rate, int max_value);
  static Marginal empirical_discrete(std::span<const double> sample);
  // F(x) = #{x_i <= x} / (n + 1); log f is taken as 0.
  static Marginal empirical_continuous(std::span<const double> sample);
  static Marginal gaussian(double mean, double sd);

  Kind kind() const { return kind_; }
  std::string kind_name() const;
  bool discrete() const { return kind_ != Kind::EmpiricalContinuous && kind_ != Kind::Gaussian; }

  // (F(x-), F(x)) for discrete margins; throws DataError off the support.
  std::pair<double, double> interval(double x) const;
  double cdf(double x) const;
  double log_pdf(double x) const;
  // Smallest x with F(x) >= u (discrete) or F^-1(u) (continuous).
  double quantile(double u) const;

  const std::vector<double>& support() const { return support_; }
  const std::vector<double>& cumulative() const { return cumulative_; }
  double mean_param() const { return mean_; }
  double sd_param() const { return sd_; }

 private:
  Marginal() = default;
  static Marginal from_pmf(Kind kind, std::vector<double> support, std::vector<double> probs);

  Kind kind_ = Kind::Fixed;
  std::vector<double> support_;     // sorted support or sorted sample
  std::vector<double> cumulative_;  // F at each support point, last = 1
  double mean_ = 0.0;
  double sd_ = 1.0;
};

}  // namespace dcop::lik
