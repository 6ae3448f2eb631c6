#include "epinet/degree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "epinet/error.hpp"

namespace epinet {

namespace {

// Power-law tails are cut at 1e-10. Poisson tails are cut at round-off level
// so that low moments come out exact in double precision.
constexpr double kPowerLawTail = 1e-10;
constexpr double kPoissonTail = 1e-17;

double falling(int k, int order) {
  double f = 1.0;
  for (int j = 0; j < order; ++j) f *= static_cast<double>(k - j);
  return f;
}

// Smallest K >= min_k such that the mass strictly above K is below tol * total.
int tail_cut(const std::vector<double>& w, int min_k, double tol) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  double tail = 0.0;
  int k = static_cast<int>(w.size()) - 1;
  while (k > min_k && tail + w[k] < tol * total) {
    tail += w[k];
    --k;
  }
  return k;
}

std::vector<double> normalized(std::vector<double> w, int k_max) {
  w.resize(static_cast<std::size_t>(k_max) + 1);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) throw ValidationError("degree distribution has empty support");
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> poisson_terms(double mean, int k_hard) {
  std::vector<double> w(static_cast<std::size_t>(k_hard) + 1);
  for (int k = 0; k <= k_hard; ++k)
    w[k] = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
  return w;
}

int poisson_hard_limit(double mean) {
  return static_cast<int>(std::ceil(mean + 40.0 * std::sqrt(mean) + 40.0));
}

std::vector<double> build_pmf(const PoissonSpec& s) {
  if (!(s.mean > 0.0)) throw ValidationError("poisson: mean must be > 0");
  auto w = poisson_terms(s.mean, poisson_hard_limit(s.mean));
  return normalized(w, tail_cut(w, 1, kPoissonTail));
}

std::vector<double> build_pmf(const BimodalSpec& s) {
  if (!(s.low_mean > 0.0)) throw ValidationError("bimodal: lambda must be > 0");
  if (s.high_degree <= 0) throw ValidationError("bimodal: L must be > 0");
  if (!(s.low_fraction >= 0.0 && s.low_fraction <= 1.0))
    throw ValidationError("bimodal: p must lie in [0, 1]");
  const int k_hard = std::max(poisson_hard_limit(s.low_mean), s.high_degree);
  auto w = poisson_terms(s.low_mean, k_hard);
  for (double& x : w) x *= s.low_fraction;
  w[s.high_degree] += 1.0 - s.low_fraction;
  return normalized(w, tail_cut(w, s.high_degree, kPoissonTail));
}

std::vector<double> build_pmf(const RegularSpec& s) {
  if (s.degree <= 0) throw ValidationError("regular: degree must be > 0");
  std::vector<double> w(static_cast<std::size_t>(s.degree) + 1, 0.0);
  w[s.degree] = 1.0;
  return w;
}

std::vector<double> build_pmf(const PowerLawSpec& s) {
  if (!(s.exponent > 0.0)) throw ValidationError("powerlaw: alpha must be > 0");
  if (!(s.cutoff > 0.0)) throw ValidationError("powerlaw: kappa must be > 0");
  if (s.max_degree < 0) throw ValidationError("powerlaw: kmax must be >= 0");
  const int k_hard =
      s.max_degree > 0 ? s.max_degree
                       : static_cast<int>(std::min(1e6, std::ceil(60.0 * s.cutoff) + 1000.0));
  std::vector<double> w(static_cast<std::size_t>(k_hard) + 1, 0.0);
  for (int k = 1; k <= k_hard; ++k)
    w[k] = std::exp(-s.exponent * std::log(static_cast<double>(k)) - k / s.cutoff);
  const int k_max = s.max_degree > 0 ? s.max_degree : tail_cut(w, 1, kPowerLawTail);
  return normalized(w, k_max);
}

std::string label_of(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        auto fmt = [](double x) {
          std::string out = std::to_string(x);
          out.erase(out.find_last_not_of('0') + 1);
          if (!out.empty() && out.back() == '.') out.pop_back();
          return out;
        };
        if constexpr (std::is_same_v<T, PoissonSpec>) {
          return "poisson(" + fmt(s.mean) + ")";
        } else if constexpr (std::is_same_v<T, BimodalSpec>) {
          return "bimodal(" + fmt(s.low_mean) + "," + std::to_string(s.high_degree) + "," +
                 fmt(s.low_fraction) + ")";
        } else if constexpr (std::is_same_v<T, RegularSpec>) {
          return "regular(" + std::to_string(s.degree) + ")";
        } else {
          std::string out = "powerlaw(" + fmt(s.exponent) + "," + fmt(s.cutoff);
          if (s.max_degree > 0) out += ",kmax=" + std::to_string(s.max_degree);
          return out + ")";
        }
      },
      spec);
}

}  // namespace

std::string family_name(const DistributionSpec& spec) {
  static constexpr const char* names[] = {"poisson", "bimodal", "regular", "powerlaw"};
  return names[spec.index()];
}

DegreeDistribution::DegreeDistribution(std::vector<double> pmf, std::string label)
    : pmf_(std::move(pmf)), label_(std::move(label)) {
  if (pmf_.empty()) throw ValidationError("degree distribution has empty support");
  double total = 0.0;
  for (double p : pmf_) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw ValidationError("degree pmf entries must be finite and >= 0");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("degree pmf must sum to 1 (got " + std::to_string(total) + ")");
  mean_ = factorial_moment(1);
  if (!(mean_ > 0.0)) throw ValidationError("degree distribution must have mean degree > 0");
}

double DegreeDistribution::operator[](int k) const {
  return (k < 0 || k > k_max()) ? 0.0 : pmf_[k];
}

double DegreeDistribution::factorial_moment(int order) const {
  double m = 0.0;
  for (int k = order; k <= k_max(); ++k) m += pmf_[k] * falling(k, order);
  return m;
}

double DegreeDistribution::psi(double z, int order) const {
  if (!(z >= 0.0 && z <= 1.0)) throw ValidationError("psi: z must lie in [0, 1]");
  if (order < 0) throw ValidationError("psi: derivative order must be >= 0");
  double sum = 0.0;
  double zp = 1.0;  // z^(k - order)
  for (int k = order; k <= k_max(); ++k) {
    sum += pmf_[k] * falling(k, order) * zp;
    zp *= z;
  }
  return sum;
}

DegreeDistribution build_distribution(const DistributionSpec& spec) {
  auto pmf = std::visit([](const auto& s) { return build_pmf(s); }, spec);
  return DegreeDistribution(std::move(pmf), label_of(spec));
}

DegreeDistribution size_biased(const DegreeDistribution& dist) {
  const double mean = dist.mean();
  if (!(mean > 0.0)) throw ValidationError("size_biased: zero mean degree");
  std::vector<double> pmf(dist.pmf().begin(), dist.pmf().end());
  for (int k = 0; k <= dist.k_max(); ++k) pmf[k] *= k / mean;
  const double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  for (double& p : pmf) p /= total;
  return DegreeDistribution(std::move(pmf), "sizebiased:" + dist.label());
}

double XiSpec::operator()(int k) const {
  if (table.empty()) return slope * k + intercept;
  if (k < 0) return table.front();
  return static_cast<std::size_t>(k) < table.size() ? table[k] : table.back();
}

void XiSpec::validate(int k_max) const {
  double prev = (*this)(0);
  for (int k = 0; k <= k_max; ++k) {
    const double x = (*this)(k);
    if (!std::isfinite(x) || x < 0.0)
      throw ValidationError("xi(k) must be finite and >= 0 (fails at k=" + std::to_string(k) + ")");
    if (x < prev)
      throw ValidationError("xi(k) must be nondecreasing in k (fails at k=" + std::to_string(k) +
                            ")");
    prev = x;
  }
}

GFunction::GFunction(const DegreeDistribution& dist, const XiSpec& xi, double susceptible_mass)
    : s0_(susceptible_mass) {
  if (!(susceptible_mass > 0.0 && susceptible_mass <= 1.0))
    throw ValidationError("initial susceptible mass must lie in (0, 1]");
  xi.validate(dist.k_max());
  for (int k = 0; k <= dist.k_max(); ++k)
    if (dist[k] > 0.0) terms_.push_back({k, susceptible_mass * dist[k], xi(k)});
}

GDerivatives GFunction::derivatives(double alpha, double theta) const {
  if (!(alpha > 0.0) || !(theta > 0.0))
    throw ValidationError("g: alpha and theta must be > 0");
  const double la = std::log(alpha);
  const double lt = std::log(theta);
  const double ia = 1.0 / alpha;
  const double it = 1.0 / theta;
  GDerivatives d;
  for (const Term& term : terms_) {
    const double k = term.k;
    const double x = term.xi;
    const double w = term.weight * std::exp(k * la + x * lt);
    const double wk = w * k * ia;
    const double wkk = wk * (k - 1.0) * ia;
    d.g += w;
    d.a += wk;
    d.aa += wkk;
    d.aaa += wkk * (k - 2.0) * ia;
    d.t += w * x * it;
    d.tt += w * x * (x - 1.0) * it * it;
    d.at += wk * x * it;
    d.aat += wkk * x * it;
    d.att += wk * x * (x - 1.0) * it * it;
  }
  return d;
}

double GFunction::operator()(double alpha, double theta, GPartial which) const {
  const GDerivatives d = derivatives(alpha, theta);
  switch (which) {
    case GPartial::value: return d.g;
    case GPartial::d_alpha: return d.a;
    case GPartial::d_theta: return d.t;
    case GPartial::d_alpha_alpha: return d.aa;
    case GPartial::d_alpha_theta: return d.at;
  }
  return d.g;
}

}  // namespace epinet
