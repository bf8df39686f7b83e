// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cdp/errors.hpp"
#include "cdp/numeric.hpp"
#include "cdp/phase_type.hpp"
#include "cdp/rng.hpp"

namespace cdp {

struct GaussianBase {
  double mean = 0.0;
  double variance = 1.0;
};

struct GammaBase {
  double shape = 1.0;
  double rate = 1.0;
};

struct ExponentialBase {
  double rate = 1.0;
};

struct PhaseTypeBaseHolder {
  std::shared_ptr<const PhaseType> ph;
};

struct EmpiricalBase {
  std::vector<std::pair<double, double>> atoms;  // (value, weight), weights sum to 1
};

// The bases a prior can start from.
using PrimitiveBase = std::variant<GaussianBase, GammaBase, ExponentialBase,
                                   PhaseTypeBaseHolder, EmpiricalBase>;

// Conjugate-posterior base measure: the prior base with weight
// alpha/(alpha+n) mixed with the observed atoms, weight 1/(alpha+n) each
// (repeats accumulate). Chained updates flatten into one of these, so the
// parent is always a primitive base.
struct DpPosteriorBase {
  double parent_weight = 1.0;
  PrimitiveBase parent = GaussianBase{};
  std::vector<std::pair<double, double>> atoms;  // (value, weight), sorted by value
};

using BaseDistribution = std::variant<GaussianBase, GammaBase, ExponentialBase,
                                      PhaseTypeBaseHolder, EmpiricalBase,
                                      DpPosteriorBase>;

inline PhaseTypeBaseHolder make_phase_type_base(PhaseType ph) {
  return PhaseTypeBaseHolder{std::make_shared<const PhaseType>(std::move(ph))};
}

inline BaseDistribution widen(const PrimitiveBase& base) {
  return std::visit([](const auto& b) -> BaseDistribution { return b; }, base);
}

namespace detail {

inline void validate_atoms(const std::vector<std::pair<double, double>>& atoms,
                           double expected_total) {
  double total = 0.0;
  for (const auto& [value, weight] : atoms) {
    (void)value;
    if (weight < 0.0) throw domain_error("base: atom weights must be non-negative");
    total += weight;
  }
  if (std::fabs(total - expected_total) > 1e-9)
    throw domain_error("base: atom weights must sum to " +
                       std::to_string(expected_total));
}

inline void validate_leaf(const GaussianBase& b) {
  if (b.variance <= 0.0)
    throw domain_error("gaussian base: variance must be positive");
}
inline void validate_leaf(const GammaBase& b) {
  if (b.shape <= 0.0 || b.rate <= 0.0)
    throw domain_error("gamma base: shape and rate must be positive");
}
inline void validate_leaf(const ExponentialBase& b) {
  if (b.rate <= 0.0)
    throw domain_error("exponential base: rate must be positive");
}
inline void validate_leaf(const PhaseTypeBaseHolder& b) {
  if (!b.ph) throw domain_error("phase-type base: missing parameters");
}
inline void validate_leaf(const EmpiricalBase& b) {
  if (b.atoms.empty())
    throw domain_error("empirical base: needs at least one atom");
  validate_atoms(b.atoms, 1.0);
}

inline double sample_leaf(const GaussianBase& b, Rng& rng) {
  return rng.normal(b.mean, std::sqrt(b.variance));
}
inline double sample_leaf(const GammaBase& b, Rng& rng) {
  return rng.gamma(b.shape, b.rate);
}
inline double sample_leaf(const ExponentialBase& b, Rng& rng) {
  return rng.exponential(b.rate);
}
inline double sample_leaf(const PhaseTypeBaseHolder& b, Rng& rng) {
  return b.ph->sample(rng);
}
inline double sample_leaf(const EmpiricalBase& b, Rng& rng) {
  double u = rng.uniform();
  for (const auto& [value, weight] : b.atoms) {
    u -= weight;
    if (u <= 0.0) return value;
  }
  return b.atoms.back().first;
}

inline double raw_moment_leaf(const GaussianBase& b, int k) {
  const double m = b.mean, s2 = b.variance;
  if (k == 1) return m;
  if (k == 2) return m * m + s2;
  return m * m * m + 3.0 * m * s2;
}
inline double raw_moment_leaf(const GammaBase& b, int k) {
  double out = 1.0;
  for (int i = 0; i < k; ++i) out *= (b.shape + i) / b.rate;
  return out;
}
inline double raw_moment_leaf(const ExponentialBase& b, int k) {
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out *= i / b.rate;
  return out;
}
inline double raw_moment_leaf(const PhaseTypeBaseHolder& b, int k) {
  return b.ph->raw_moment(k);
}
inline double raw_moment_leaf(const EmpiricalBase& b, int k) {
  double out = 0.0;
  for (const auto& [value, weight] : b.atoms)
    out += weight * std::pow(value, k);
  return out;
}

inline double mgf_leaf(const GaussianBase& b, double t) {
  return std::exp(t * b.mean + 0.5 * t * t * b.variance);
}
inline double mgf_leaf(const GammaBase& b, double t) {
  if (t >= b.rate)
    throw domain_error("gamma mgf diverges at t=" + std::to_string(t));
  return std::pow(1.0 - t / b.rate, -b.shape);
}
inline double mgf_leaf(const ExponentialBase& b, double t) {
  if (t >= b.rate)
    throw domain_error("exponential mgf diverges at t=" + std::to_string(t));
  return b.rate / (b.rate - t);
}
inline double mgf_leaf(const PhaseTypeBaseHolder& b, double t) {
  return b.ph->mgf(t);
}
inline double mgf_leaf(const EmpiricalBase& b, double t) {
  double out = 0.0;
  for (const auto& [value, weight] : b.atoms)
    out += weight * std::exp(t * value);
  return out;
}

inline double cdf_leaf(const GaussianBase& b, double x) {
  return normal_cdf(x, b.mean, b.variance);
}
inline double cdf_leaf(const GammaBase& b, double x) {
  return gamma_cdf(x, b.shape, b.rate);
}
inline double cdf_leaf(const ExponentialBase& b, double x) {
  return x <= 0.0 ? 0.0 : 1.0 - std::exp(-b.rate * x);
}
inline double cdf_leaf(const PhaseTypeBaseHolder& b, double x) {
  return b.ph->cdf(x);
}
inline double cdf_leaf(const EmpiricalBase& b, double x) {
  double out = 0.0;
  for (const auto& [value, weight] : b.atoms)
    if (value <= x) out += weight;
  return out;
}

inline bool positive_support_leaf(const GaussianBase&) { return false; }
inline bool positive_support_leaf(const GammaBase&) { return true; }
inline bool positive_support_leaf(const ExponentialBase&) { return true; }
inline bool positive_support_leaf(const PhaseTypeBaseHolder&) { return true; }
inline bool positive_support_leaf(const EmpiricalBase& b) {
  for (const auto& [value, weight] : b.atoms)
    if (weight > 0.0 && value <= 0.0) return false;
  return true;
}

}  // namespace detail

inline void validate(const BaseDistribution& base) {
  std::visit(
      [](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, DpPosteriorBase>) {
          if (b.parent_weight < 0.0 || b.parent_weight > 1.0)
            throw domain_error("posterior base: parent weight outside [0,1]");
          detail::validate_atoms(b.atoms, 1.0 - b.parent_weight);
          std::visit([](const auto& p) { detail::validate_leaf(p); }, b.parent);
        } else {
          detail::validate_leaf(b);
        }
      },
      base);
}

inline double sample(const BaseDistribution& base, Rng& rng) {
  return std::visit(
      [&rng](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, DpPosteriorBase>) {
          double u = rng.uniform();
          if (u < b.parent_weight)
            return std::visit(
                [&rng](const auto& p) { return detail::sample_leaf(p, rng); },
                b.parent);
          u -= b.parent_weight;
          for (const auto& [value, weight] : b.atoms) {
            u -= weight;
            if (u <= 0.0) return value;
          }
          return b.atoms.back().first;
        } else {
          return detail::sample_leaf(b, rng);
        }
      },
      base);
}

// k-th raw moment, k in {1,2,3}.
inline double raw_moment(const BaseDistribution& base, int k) {
  if (k < 1 || k > 3) throw domain_error("raw_moment: k must be 1, 2 or 3");
  return std::visit(
      [k](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, DpPosteriorBase>) {
          double out =
              b.parent_weight *
              std::visit([k](const auto& p) { return detail::raw_moment_leaf(p, k); },
                         b.parent);
          for (const auto& [value, weight] : b.atoms)
            out += weight * std::pow(value, k);
          return out;
        } else {
          return detail::raw_moment_leaf(b, k);
        }
      },
      base);
}

inline double mean(const BaseDistribution& base) { return raw_moment(base, 1); }

// Moment generating function; throws domain_error where it diverges.
inline double mgf(const BaseDistribution& base, double t) {
  return std::visit(
      [t](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, DpPosteriorBase>) {
          double out =
              b.parent_weight *
              std::visit([t](const auto& p) { return detail::mgf_leaf(p, t); },
                         b.parent);
          for (const auto& [value, weight] : b.atoms)
            out += weight * std::exp(t * value);
          return out;
        } else {
          return detail::mgf_leaf(b, t);
        }
      },
      base);
}

inline double cdf(const BaseDistribution& base, double x) {
  return std::visit(
      [x](const auto& b) -> double {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, DpPosteriorBase>) {
          double out =
              b.parent_weight *
              std::visit([x](const auto& p) { return detail::cdf_leaf(p, x); },
                         b.parent);
          for (const auto& [value, weight] : b.atoms)
            if (value <= x) out += weight;
          return out;
        } else {
          return detail::cdf_leaf(b, x);
        }
      },
      base);
}

// True when the base puts no mass on (-inf, 0]; interarrival-time priors
// must satisfy this.
inline bool positive_support(const BaseDistribution& base) {
  return std::visit(
      [](const auto& b) -> bool {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, DpPosteriorBase>) {
          if (b.parent_weight > 0.0 &&
              !std::visit([](const auto& p) {
                return detail::positive_support_leaf(p);
              }, b.parent))
            return false;
          for (const auto& [value, weight] : b.atoms)
            if (weight > 0.0 && value <= 0.0) return false;
          return true;
        } else {
          return detail::positive_support_leaf(b);
        }
      },
      base);
}

// Exact phase-type representation where one exists: PH itself, the
// exponential, and integer-shape (Erlang) gammas. Enables the analytic
// partition-mixture route for these bases.
inline std::optional<PhaseType> as_phase_type(const BaseDistribution& base) {
  if (const auto* ph = std::get_if<PhaseTypeBaseHolder>(&base)) return *ph->ph;
  if (const auto* ex = std::get_if<ExponentialBase>(&base))
    return exponential_ph(ex->rate);
  if (const auto* ga = std::get_if<GammaBase>(&base)) {
    const double rounded = std::round(ga->shape);
    if (std::fabs(ga->shape - rounded) < 1e-12 && rounded >= 1.0 &&
        rounded <= 64.0)
      return erlang_ph(static_cast<int>(rounded), ga->rate);
  }
  return std::nullopt;
}

// Single-atom empirical bases make every urn draw identical, so sums are
// deterministic; the process module special-cases them.
inline std::optional<double> as_point_mass(const BaseDistribution& base) {
  if (const auto* em = std::get_if<EmpiricalBase>(&base)) {
    if (em->atoms.size() == 1) return em->atoms.front().first;
  }
  return std::nullopt;
}

}  // namespace cdp
