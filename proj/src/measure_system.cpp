#include "epinet/measure_system.hpp"

#include <algorithm>
#include <cmath>

namespace epinet {

namespace kernels {

namespace {

constexpr double kRowCutoff = 1e-17;
constexpr int kBlockRows = 64;
constexpr int kParallelMinRows = 256;

std::vector<double> log_factorials(int n) {
  std::vector<double> lf(static_cast<std::size_t>(std::max(n, 0)) + 1, 0.0);
  for (int j = 1; j <= n; ++j) lf[j] = lf[j - 1] + std::log(static_cast<double>(j));
  return lf;
}

void add_row(int trials, double weight, double p, const std::vector<double>& lf,
             std::span<double> out) {
  if (weight == 0.0 || trials < 0) return;
  const int limit = std::min<int>(trials, static_cast<int>(out.size()) - 1);
  if (p <= 0.0) {
    out[0] += weight;
    return;
  }
  if (p >= 1.0) {
    if (trials <= limit) out[trials] += weight;
    return;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  auto term = [&](int i) { return std::exp(lf[trials] - lf[i] - lf[trials - i] + i * lp + (trials - i) * lq); };
  const int mode = std::min(trials, static_cast<int>(std::floor((trials + 1) * p)));
  const double peak = term(mode);
  const double cut = peak * kRowCutoff;
  for (int i = mode; i <= trials; ++i) {
    const double v = i == mode ? peak : term(i);
    if (v < cut) break;
    if (i <= limit) out[i] += weight * v;
  }
  for (int i = mode - 1; i >= 0; --i) {
    const double v = term(i);
    if (v < cut) break;
    if (i <= limit) out[i] += weight * v;
  }
}

}  // namespace

void binomial_inflow_serial(std::span<const double> weights, int shift, double p,
                            std::span<double> out) {
  const int rows = static_cast<int>(weights.size());
  const auto lf = log_factorials(rows);
  for (int k = shift; k < rows; ++k) add_row(k - shift, weights[k], p, lf, out);
}

void binomial_inflow(std::span<const double> weights, int shift, double p, std::span<double> out) {
  const int rows = static_cast<int>(weights.size());
  const auto lf = log_factorials(rows);
  const int blocks = (rows + kBlockRows - 1) / kBlockRows;
  std::vector<std::vector<double>> partial(blocks, std::vector<double>(out.size(), 0.0));
#pragma omp parallel for schedule(dynamic, 1) if (rows >= kParallelMinRows)
  for (int b = 0; b < blocks; ++b) {
    const int end = std::min(rows, (b + 1) * kBlockRows);
    for (int k = std::max(shift, b * kBlockRows); k < end; ++k)
      add_row(k - shift, weights[k], p, lf, partial[b]);
  }
  for (const auto& part : partial)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
}

}  // namespace kernels

namespace {

// State layout: alpha, theta, I, V, mu_IS[0..K], mu_RS[0..K], mu_VS[0..K].
struct Layout {
  int K;
  std::size_t is() const { return 4; }
  std::size_t rs() const { return 4 + (K + 1); }
  std::size_t vs() const { return 4 + 2 * static_cast<std::size_t>(K + 1); }
  std::size_t size() const { return 4 + 3 * static_cast<std::size_t>(K + 1); }
};

struct Aggregates {
  double S = 0, NS = 0, M2 = 0, MX = 0, XS = 0;
  double NIS = 0, NRS = 0, NVS = 0;
};

class MeasureSystem {
 public:
  MeasureSystem(const EpidemicParams& params, const DegreeDistribution& dist, const XiSpec& xi,
                int K)
      : params_(params), lay_{K}, s0_(1.0 - params.epsilon) {
    for (int k = 0; k <= K; ++k) {
      weight_.push_back(s0_ * dist[k]);
      xi_.push_back(xi(k));
    }
    muS_.resize(K + 1);
    wI_.resize(K + 1);
    wV_.resize(K + 1);
  }

  const Layout& layout() const { return lay_; }

  std::vector<double> initial() const {
    std::vector<double> x(lay_.size(), 0.0);
    x[0] = x[1] = 1.0;
    x[2] = params_.epsilon;
    for (int k = 0; k <= lay_.K; ++k) x[lay_.is() + k] = params_.epsilon * weight_[k] / s0_;
    return x;
  }

  Aggregates aggregates(const std::vector<double>& x) {
    Aggregates a;
    const double la = std::log(x[0]);
    const double lt = std::log(x[1]);
    for (int k = 0; k <= lay_.K; ++k) {
      muS_[k] = weight_[k] == 0.0 ? 0.0 : weight_[k] * std::exp(k * la + xi_[k] * lt);
      a.S += muS_[k];
      a.NS += k * muS_[k];
      a.M2 += k * (k - 1.0) * muS_[k];
      a.MX += xi_[k] * k * muS_[k];
      a.XS += xi_[k] * muS_[k];
      a.NIS += k * x[lay_.is() + k];
      a.NRS += k * x[lay_.rs() + k];
      a.NVS += k * x[lay_.vs() + k];
    }
    return a;
  }

  std::vector<double> rhs(const std::vector<double>& x, double pi) {
    const Aggregates ag = aggregates(x);
    std::vector<double> d(x.size(), 0.0);
    const int K = lay_.K;
    const double gamma = params_.gamma;
    const double r = ag.NIS < kExtinctionFloor ? 0.0 : params_.r;
    const double pI = ag.NS > 0.0 ? ag.NIS / ag.NS : 0.0;
    const double pS = ag.NS > 0.0 ? std::clamp((ag.NS - ag.NIS - ag.NRS - ag.NVS) / ag.NS, 0.0, 1.0) : 0.0;

    d[0] = -r * pI * x[0];
    d[1] = -pi * x[1];
    d[2] = -gamma * x[2] + r * ag.NIS;
    d[3] = pi * ag.XS;

    for (int k = 0; k <= K; ++k) {
      wI_[k] = r * pI * k * muS_[k];
      wV_[k] = pi * xi_[k] * muS_[k];
    }
    std::span<double> dIS(d.data() + lay_.is(), K + 1);
    std::span<double> dRS(d.data() + lay_.rs(), K + 1);
    std::span<double> dVS(d.data() + lay_.vs(), K + 1);
    if (r > 0.0) kernels::binomial_inflow(wI_, 1, pS, dIS);
    if (pi > 0.0) kernels::binomial_inflow(wV_, 0, pS, dVS);

    double cI = 0.0, cR = 0.0;
    if (ag.NS > 0.0) {
      cR = (r * pI * ag.M2 + pi * ag.MX) / ag.NS;
      cI = cR + r;
    }
    auto shift = [K](const double* mu, std::span<double> out, double c) {
      for (int i = 0; i <= K; ++i) {
        const double up = i < K ? (i + 1) * mu[i + 1] : 0.0;
        out[i] += c * (up - i * mu[i]);
      }
    };
    const double* muIS = x.data() + lay_.is();
    const double* muRS = x.data() + lay_.rs();
    const double* muVS = x.data() + lay_.vs();
    for (int i = 0; i <= K; ++i) {
      dIS[i] -= gamma * muIS[i];
      dRS[i] += gamma * muIS[i];
    }
    shift(muIS, dIS, cI);
    shift(muRS, dRS, cR);
    shift(muVS, dVS, cR);
    return d;
  }

 private:
  EpidemicParams params_;
  Layout lay_;
  double s0_;
  std::vector<double> weight_, xi_, muS_, wI_, wV_;
};

}  // namespace

MeasureTrajectory solve_measure_system(const EpidemicParams& params, const DegreeDistribution& dist,
                                       const VaccinationPolicy& policy, int k_max) {
  params.validate();
  policy.schedule.validate(params.nu);
  policy.xi.validate(dist.k_max());
  const int K = k_max < 0 ? dist.k_max() : k_max;
  if (K < dist.k_max()) throw ValidationError("measure system k_max must cover the degree support");

  MeasureSystem sys(params, dist, policy.xi, K);
  auto f = [&](const std::vector<double>& x, double pi) { return sys.rhs(x, pi); };
  auto post = [](std::vector<double>& x, double t) {
    x[0] = ode::clamp_checked(x[0], 0.0, 1.0, "alpha", t);
    x[1] = ode::clamp_checked(x[1], 0.0, 1.0, "theta", t);
    for (std::size_t i = 2; i < x.size(); ++i) x[i] = ode::clamp_checked(x[i], 0.0, 1.0, "measure", t);
  };
  const auto xs =
      ode::integrate_grid(sys.initial(), policy.schedule, params.dt, params.steps(), f, post);

  MeasureTrajectory out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const auto& x = xs[i];
    const Aggregates ag = sys.aggregates(x);
    out.t.push_back(static_cast<double>(i) * params.dt);
    out.S.push_back(ag.S);
    out.I.push_back(x[2]);
    out.V.push_back(x[3]);
    out.R.push_back(1.0 - ag.S - x[2] - x[3]);
    out.N_S.push_back(ag.NS);
    out.N_IS.push_back(ag.NIS);
    out.N_RS.push_back(ag.NRS);
    out.N_VS.push_back(ag.NVS);
    out.alpha.push_back(x[0]);
    out.theta.push_back(x[1]);
  }
  return out;
}

}  // namespace epinet
