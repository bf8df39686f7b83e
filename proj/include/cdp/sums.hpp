// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cdp/distributions.hpp"
#include "cdp/errors.hpp"
#include "cdp/numeric.hpp"
#include "cdp/partitions.hpp"
#include "cdp/phase_type.hpp"

namespace cdp {

// ---------------------------------------------------------------------------
// Exact finite-mixture law of S_n = X_1 + ... + X_n for DP-exchangeable
// X_i: one component per partition v in Delta_n, carrying its Ewens
// log-weight. Gaussian bases give Gaussian components N(mu n, sigma^2
// sum_j j^2 v_j); phase-type bases give the chained block construction.
// ---------------------------------------------------------------------------

enum class SnBaseKind { gaussian, phase_type };

struct GaussianComponent {
  double mean = 0.0;
  double variance = 1.0;
};

struct SnComponent {
  double log_weight = 0.0;
  std::variant<GaussianComponent, BlockPhaseType> law;
};

class SnMixture {
 public:
  SnMixture(int n, double alpha, SnBaseKind kind,
            std::vector<SnComponent> components, double discarded_mass = 0.0)
      : n_(n),
        alpha_(alpha),
        kind_(kind),
        components_(std::move(components)),
        discarded_mass_(discarded_mass) {}

  int n() const { return n_; }
  double alpha() const { return alpha_; }
  SnBaseKind kind() const { return kind_; }
  const std::vector<SnComponent>& components() const { return components_; }
  double discarded_mass() const { return discarded_mass_; }

  // log-sum-exp of the component log-weights; -discarded mass short of 0.
  double total_log_weight() const {
    std::vector<double> lw;
    lw.reserve(components_.size());
    for (const auto& c : components_) lw.push_back(c.log_weight);
    return log_sum_exp(lw);
  }

  double density(double s) const {
    double acc = 0.0;
    for (const auto& c : components_) {
      const double w = std::exp(c.log_weight);
      if (std::holds_alternative<GaussianComponent>(c.law)) {
        const auto& g = std::get<GaussianComponent>(c.law);
        acc += w * normal_pdf(s, g.mean, g.variance);
      } else {
        acc += w * std::get<BlockPhaseType>(c.law).ph.density(s);
      }
    }
    return acc;
  }

  double cdf(double s) const {
    double acc = 0.0;
    for (const auto& c : components_) {
      const double w = std::exp(c.log_weight);
      if (std::holds_alternative<GaussianComponent>(c.law)) {
        const auto& g = std::get<GaussianComponent>(c.law);
        acc += w * normal_cdf(s, g.mean, g.variance);
      } else {
        acc += w * std::get<BlockPhaseType>(c.law).ph.cdf(s);
      }
    }
    return acc;
  }

  // Drop components whose weight falls below epsilon times the largest;
  // the removed mass is reported, and |full cdf - truncated cdf| is bounded
  // by it pointwise.
  SnMixture truncated_epsilon(double epsilon) const {
    if (epsilon < 0.0 || epsilon >= 1.0)
      throw domain_error("SnMixture: epsilon must lie in [0, 1)");
    if (epsilon == 0.0 || components_.empty()) return *this;
    double max_lw = kNegInf;
    for (const auto& c : components_) max_lw = std::max(max_lw, c.log_weight);
    const double cut = max_lw + std::log(epsilon);
    std::vector<SnComponent> kept;
    std::vector<double> dropped;
    for (const auto& c : components_) {
      if (c.log_weight >= cut)
        kept.push_back(c);
      else
        dropped.push_back(c.log_weight);
    }
    const double extra =
        dropped.empty() ? 0.0 : std::exp(log_sum_exp(dropped));
    return SnMixture(n_, alpha_, kind_, std::move(kept),
                     discarded_mass_ + extra);
  }

  // Keep only the k heaviest components.
  SnMixture truncated_top_k(int k) const {
    if (k < 1) throw domain_error("SnMixture: top-k requires k >= 1");
    if (static_cast<std::size_t>(k) >= components_.size()) return *this;
    std::vector<SnComponent> sorted = components_;
    std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end(),
                     [](const SnComponent& a, const SnComponent& b) {
                       return a.log_weight > b.log_weight;
                     });
    std::vector<double> dropped;
    for (std::size_t i = static_cast<std::size_t>(k); i < sorted.size(); ++i)
      dropped.push_back(sorted[i].log_weight);
    sorted.resize(static_cast<std::size_t>(k));
    const double extra =
        dropped.empty() ? 0.0 : std::exp(log_sum_exp(dropped));
    return SnMixture(n_, alpha_, kind_, std::move(sorted),
                     discarded_mass_ + extra);
  }

 private:
  int n_;
  double alpha_;
  SnBaseKind kind_;
  std::vector<SnComponent> components_;
  double discarded_mass_;
};

// Law of S_n for Gaussian G0 = N(mu, sigma2): component for partition v is
// N(mu n, sigma^2 sum_j j^2 v_j) with Ewens weight p_v(n).
inline SnMixture sn_mixture_gaussian(int n, double alpha, double mu,
                                     double sigma2,
                                     int cap = kDefaultPartitionCap) {
  if (n < 1) throw domain_error("sn_mixture_gaussian: n must be >= 1");
  if (sigma2 <= 0.0)
    throw domain_error("sn_mixture_gaussian: variance must be positive");
  if (alpha <= 0.0)
    throw domain_error("sn_mixture_gaussian: alpha must be positive");
  std::vector<SnComponent> comps;
  for (auto& pm : enumerate_partitions(n, cap)) {
    const double lw = ewens_log_prob_value(pm, alpha);
    double q = 0.0;
    for (int j = 1; j <= n; ++j)
      q += static_cast<double>(j) * j * pm.v[static_cast<std::size_t>(j) - 1];
    comps.push_back(
        SnComponent{lw, GaussianComponent{mu * n, sigma2 * q}});
  }
  return SnMixture(n, alpha, SnBaseKind::gaussian, std::move(comps));
}

// Law of S_n for phase-type G0: one chained block component per partition.
inline SnMixture sn_mixture_phasetype(int n, double alpha,
                                      const PhaseType& base,
                                      int cap = kDefaultPartitionCap,
                                      int dim_cap = kDefaultPhaseDimCap) {
  if (n < 1) throw domain_error("sn_mixture_phasetype: n must be >= 1");
  if (alpha <= 0.0)
    throw domain_error("sn_mixture_phasetype: alpha must be positive");
  std::vector<SnComponent> comps;
  for (auto& pm : enumerate_partitions(n, cap)) {
    const double lw = ewens_log_prob_value(pm, alpha);
    comps.push_back(SnComponent{lw, ph_partition_block(base, pm, dim_cap)});
  }
  return SnMixture(n, alpha, SnBaseKind::phase_type, std::move(comps));
}

inline double sn_cdf(const SnMixture& mix, double s) { return mix.cdf(s); }
inline double sn_density(const SnMixture& mix, double s) {
  return mix.density(s);
}

// ---------------------------------------------------------------------------
// Renewal-counter pmf through the sum/counter duality: P(N_t >= n) equals
// P(S_n <= t), so P(N_t = n) = P(S_n <= t) - P(S_{n+1} <= t) with the
// empty sum S_0 = 0.
// ---------------------------------------------------------------------------

template <typename MixBuilder>
double counting_pmf(MixBuilder&& interarrival_mixture, double t, int n) {
  if (t <= 0.0) throw domain_error("counting_pmf: t must be positive");
  if (n < 0) throw domain_error("counting_pmf: n must be non-negative");
  const double upper = n == 0 ? 1.0 : interarrival_mixture(n).cdf(t);
  const double lower = interarrival_mixture(n + 1).cdf(t);
  return std::max(0.0, upper - lower);
}

// Convenience overload for a DP interarrival prior whose base has an exact
// phase-type form (exponential, Erlang gamma, PH).
inline double counting_pmf(const DirichletPrior& time_prior, double t, int n,
                           int cap = kDefaultPartitionCap,
                           int dim_cap = kDefaultPhaseDimCap) {
  if (auto atom = as_point_mass(time_prior.base)) {
    // all draws identical: S_n = n * atom
    if (t <= 0.0) throw domain_error("counting_pmf: t must be positive");
    if (n < 0) throw domain_error("counting_pmf: n must be non-negative");
    const double a = *atom;
    return (n * a <= t && t < (n + 1) * a) ? 1.0 : 0.0;
  }
  auto ph = as_phase_type(time_prior.base);
  if (!ph)
    throw capability_error(
        "counting_pmf: time base has no exact phase-type form; use the "
        "Monte Carlo route in the process module");
  return counting_pmf(
      [&](int m) {
        return sn_mixture_phasetype(m, time_prior.alpha, *ph, cap, dim_cap);
      },
      t, n);
}

// ---------------------------------------------------------------------------
// Moment generating function of S_n,
//   M(t) = n!/(alpha)_n sum_v prod_j (1/v_j!) [alpha M_X(t j) / j]^{v_j},
// evaluated in log space (MGF values are positive). Templated on the
// floating type so tests can difference it in extended precision.
// ---------------------------------------------------------------------------

namespace detail {

template <typename Real>
Real ewens_log_prob_t(const PartitionMultiplicity& pm, Real alpha) {
  Real lp = std::lgamma(Real(pm.n) + Real(1)) -
            (std::lgamma(alpha + Real(pm.n)) - std::lgamma(alpha));
  const Real log_alpha = std::log(alpha);
  for (int i = 1; i <= pm.n; ++i) {
    const int vi = pm.v[static_cast<std::size_t>(i) - 1];
    if (vi == 0) continue;
    lp += Real(vi) * (log_alpha - std::log(Real(i)));
    lp -= std::lgamma(Real(vi) + Real(1));
  }
  return lp;
}

}  // namespace detail

template <typename Real = double, typename MgfFn>
Real mgf_sn(int n, double alpha, MgfFn&& base_mgf, Real t,
            int cap = kDefaultPartitionCap) {
  if (n < 1) throw domain_error("mgf_sn: n must be >= 1");
  if (alpha <= 0.0) throw domain_error("mgf_sn: alpha must be positive");
  // base MGF at t*j for every part size that can appear
  std::vector<Real> log_m(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    Real value;
    try {
      value = base_mgf(t * Real(j));
    } catch (const domain_error&) {
      throw domain_error("mgf_sn: base mgf diverges at argument t*j with j=" +
                         std::to_string(j));
    }
    if (!std::isfinite(static_cast<double>(value)) || value <= Real(0))
      throw domain_error("mgf_sn: base mgf not finite at argument t*j with j=" +
                         std::to_string(j));
    log_m[static_cast<std::size_t>(j) - 1] = std::log(value);
  }
  Real max_term = -std::numeric_limits<Real>::infinity();
  std::vector<Real> terms;
  for (const auto& pm : enumerate_partitions(n, cap)) {
    Real term = detail::ewens_log_prob_t<Real>(pm, Real(alpha));
    for (int j = 1; j <= n; ++j) {
      const int vj = pm.v[static_cast<std::size_t>(j) - 1];
      if (vj != 0) term += Real(vj) * log_m[static_cast<std::size_t>(j) - 1];
    }
    terms.push_back(term);
    max_term = std::max(max_term, term);
  }
  Real acc = Real(0);
  for (Real term : terms) acc += std::exp(term - max_term);
  return std::exp(max_term + std::log(acc));
}

// ---------------------------------------------------------------------------
// First three moments of S under DP-exchangeable summands, expressed in the
// moments of the counter (mu_N,k = E N^k) and the base (mu_X,k = E X^k).
// For fixed n, mu_N,k = n^k. The k=2,3 mixed terms carry the urn tie
// probabilities 1/(alpha+1), 2/((alpha+1)(alpha+2)).
// ---------------------------------------------------------------------------

struct MomentTriple {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
};

inline MomentTriple moments_from_counts(double mu_n1, double mu_n2,
                                        double mu_n3, double alpha, double mx1,
                                        double mx2, double mx3) {
  if (alpha <= 0.0)
    throw domain_error("moments: alpha must be positive");
  MomentTriple out;
  out.m1 = mu_n1 * mx1;
  const double pair_term = (alpha * mx1 * mx1 + mx2) / (alpha + 1.0);
  out.m2 = (mu_n2 - mu_n1) * pair_term + mu_n1 * mx2;
  const double triple_term =
      (alpha * alpha * mx1 * mx1 * mx1 + 3.0 * alpha * mx2 * mx1 + 2.0 * mx3) /
      ((alpha + 1.0) * (alpha + 2.0));
  const double mixed_term = (alpha * mx1 * mx2 + mx3) / (alpha + 1.0);
  out.m3 = (mu_n3 - 3.0 * mu_n2 + 2.0 * mu_n1) * triple_term +
           3.0 * (mu_n2 - mu_n1) * mixed_term + mu_n1 * mx3;
  return out;
}

inline MomentTriple moments_sn(int n, double alpha, double mx1, double mx2,
                               double mx3) {
  if (n < 1) throw domain_error("moments_sn: n must be >= 1");
  const double nn = static_cast<double>(n);
  return moments_from_counts(nn, nn * nn, nn * nn * nn, alpha, mx1, mx2, mx3);
}

}  // namespace cdp
