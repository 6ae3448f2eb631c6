#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace epinet {

struct PoissonSpec {
  double mean = 5.0;
  friend bool operator==(const PoissonSpec&, const PoissonSpec&) = default;
};

// A fraction `low_fraction` of nodes draws a Poisson(low_mean) degree, the rest
// have degree `high_degree`.
struct BimodalSpec {
  double low_mean = 3.0;
  int high_degree = 13;
  double low_fraction = 0.8;
  friend bool operator==(const BimodalSpec&, const BimodalSpec&) = default;
};

struct RegularSpec {
  int degree = 5;
  friend bool operator==(const RegularSpec&, const RegularSpec&) = default;
};

// p_k ∝ k^-exponent · exp(-k / cutoff) on k >= 1. With max_degree == 0 the
// support is cut where the normalized tail drops below 1e-10; otherwise the
// support is exactly [1, max_degree].
struct PowerLawSpec {
  double exponent = 1.474;
  double cutoff = 100.0;
  int max_degree = 0;
  friend bool operator==(const PowerLawSpec&, const PowerLawSpec&) = default;
};

using DistributionSpec = std::variant<PoissonSpec, BimodalSpec, RegularSpec, PowerLawSpec>;

std::string family_name(const DistributionSpec& spec);

/// Degree law on the finite support [0, k_max].
///
/// The pmf is validated on construction: entries are non-negative, they sum to
/// one within 1e-12 and the mean is positive. Immutable afterwards, so it can
/// be shared freely between threads.
class DegreeDistribution {
 public:
  DegreeDistribution(std::vector<double> pmf, std::string label);

  std::span<const double> pmf() const { return pmf_; }
  double operator[](int k) const;
  int k_max() const { return static_cast<int>(pmf_.size()) - 1; }
  const std::string& label() const { return label_; }

  double mean() const { return mean_; }

  // E[k (k-1) ... (k-order+1)], i.e. the order-th derivative of psi at 1.
  double factorial_moment(int order) const;

  // Probability generating function and its derivatives, z in [0, 1].
  double psi(double z, int order = 0) const;

 private:
  std::vector<double> pmf_;
  std::string label_;
  double mean_ = 0.0;
};

DegreeDistribution build_distribution(const DistributionSpec& spec);

// Degree of the endpoint of a uniformly chosen half-edge: pmf'(k) = k pmf(k) / mean.
DegreeDistribution size_biased(const DegreeDistribution& dist);

/// Degree weight of the vaccination rate, pi_t(k) = xi(k) pi_t.
///
/// Affine `slope * k + intercept` unless `table` is non-empty, in which case
/// xi(k) = table[k] (and table.back() beyond its end).
struct XiSpec {
  double slope = 1.0;
  double intercept = 0.0;
  std::vector<double> table;

  static XiSpec degree_proportional() { return {1.0, 0.0, {}}; }
  static XiSpec uniform(double value) { return {0.0, value, {}}; }

  double operator()(int k) const;
  bool is_affine() const { return table.empty(); }

  // xi >= 0 and nondecreasing on [0, k_max].
  void validate(int k_max) const;

  friend bool operator==(const XiSpec&, const XiSpec&) = default;
};

enum class GPartial { value, d_alpha, d_theta, d_alpha_alpha, d_alpha_theta };

struct GDerivatives {
  double g = 0.0;
  double a = 0.0;    // d/d alpha
  double t = 0.0;    // d/d theta
  double aa = 0.0;
  double at = 0.0;
  double tt = 0.0;
  double aaa = 0.0;
  double aat = 0.0;
  double att = 0.0;
};

/// g(alpha, theta) = sum_k S0 pmf(k) alpha^k theta^xi(k), the generating function
/// of the initially susceptible degree measure thinned by infection (alpha) and
/// vaccination (theta) survival.
class GFunction {
 public:
  GFunction(const DegreeDistribution& dist, const XiSpec& xi, double susceptible_mass);

  // All partials up to third order that the closed system and its Jacobian use.
  GDerivatives derivatives(double alpha, double theta) const;

  double operator()(double alpha, double theta, GPartial which = GPartial::value) const;

  double susceptible_mass() const { return s0_; }

 private:
  struct Term {
    int k;
    double weight;  // S0 * pmf(k)
    double xi;
  };
  std::vector<Term> terms_;
  double s0_;
};

}  // namespace epinet
