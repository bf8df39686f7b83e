// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "cdp/distributions.hpp"
#include "cdp/errors.hpp"
#include "cdp/partitions.hpp"
#include "cdp/rng.hpp"

namespace cdp {

// DP(alpha, G0) prior.
struct DirichletPrior {
  double alpha = 1.0;
  BaseDistribution base = GaussianBase{};
};

inline void validate(const DirichletPrior& prior) {
  if (prior.alpha <= 0.0)
    throw domain_error("dirichlet prior: alpha must be positive");
  validate(prior.base);
}

struct UrnSample {
  std::vector<double> values;
  std::vector<int> labels;  // cluster label per draw, assigned at draw time
  PartitionMultiplicity partition;
};

namespace detail {

inline PartitionMultiplicity partition_from_labels(std::span<const int> labels) {
  const int n = static_cast<int>(labels.size());
  std::map<int, int> sizes;
  for (int lab : labels) ++sizes[lab];
  PartitionMultiplicity pm;
  pm.n = n;
  pm.v.assign(static_cast<std::size_t>(n), 0);
  for (const auto& [lab, size] : sizes) ++pm.v[static_cast<std::size_t>(size) - 1];
  return pm;
}

}  // namespace detail

// Generalized Polya urn: draw k is fresh from the base with probability
// alpha/(alpha+k-1) and otherwise copies a uniformly chosen earlier draw.
// Ties are tracked by cluster label, not floating-point equality, so a
// continuous base still induces the right partition.
inline UrnSample polya_urn_sample(const DirichletPrior& prior, int n, Rng& rng) {
  if (n < 1) throw domain_error("polya_urn_sample: n must be >= 1");
  validate(prior);
  UrnSample out;
  out.values.reserve(static_cast<std::size_t>(n));
  out.labels.reserve(static_cast<std::size_t>(n));
  int next_label = 0;
  for (int k = 1; k <= n; ++k) {
    const double p_new = prior.alpha / (prior.alpha + k - 1);
    if (rng.uniform() < p_new) {
      out.values.push_back(sample(prior.base, rng));
      out.labels.push_back(next_label++);
    } else {
      const std::size_t pick = rng.uniform_index(out.values.size());
      out.values.push_back(out.values[pick]);
      out.labels.push_back(out.labels[pick]);
    }
  }
  out.partition = detail::partition_from_labels(out.labels);
  return out;
}

// Mean number of distinct values among n urn draws,
// sum_{i=1}^{n} alpha/(alpha+i-1); grows like alpha log n.
inline double expected_distinct(double alpha, int n) {
  if (alpha <= 0.0) throw domain_error("expected_distinct: alpha must be positive");
  if (n < 1) throw domain_error("expected_distinct: n must be >= 1");
  double s = 0.0;
  for (int i = 1; i <= n; ++i) s += alpha / (alpha + i - 1);
  return s;
}

struct PosteriorDp {
  double alpha_post = 0.0;
  BaseDistribution base_post = GaussianBase{};
};

// Conjugate update: DP(alpha, G0) given n observations becomes
// DP(alpha + n, alpha/(alpha+n) G0 + sum_i 1/(alpha+n) delta_{x_i}).
// Updating an already-updated prior flattens into a single mixture, so
// split-sample updates agree with the single-shot posterior exactly.
inline PosteriorDp posterior_update(const DirichletPrior& prior,
                                    std::span<const double> observations) {
  if (observations.empty())
    throw domain_error("posterior_update: observations must be non-empty");
  validate(prior);
  const double n = static_cast<double>(observations.size());
  const double alpha_post = prior.alpha + n;

  PrimitiveBase parent;
  double parent_weight;
  std::map<double, double> atom_weights;
  if (const auto* post = std::get_if<DpPosteriorBase>(&prior.base)) {
    parent = post->parent;
    parent_weight = prior.alpha / alpha_post * post->parent_weight;
    const double rescale = prior.alpha / alpha_post;
    for (const auto& [value, weight] : post->atoms)
      atom_weights[value] += rescale * weight;
  } else {
    parent = std::visit(
        [](const auto& b) -> PrimitiveBase {
          using T = std::decay_t<decltype(b)>;
          if constexpr (std::is_same_v<T, DpPosteriorBase>) {
            throw domain_error("unreachable");
            return GaussianBase{};
          } else {
            return b;
          }
        },
        prior.base);
    parent_weight = prior.alpha / alpha_post;
  }
  for (double x : observations) atom_weights[x] += 1.0 / alpha_post;

  DpPosteriorBase mixed;
  mixed.parent_weight = parent_weight;
  mixed.parent = std::move(parent);
  mixed.atoms.assign(atom_weights.begin(), atom_weights.end());
  return PosteriorDp{alpha_post, std::move(mixed)};
}

// The posterior as a prior again, for further updating or prediction.
inline DirichletPrior to_prior(const PosteriorDp& post) {
  return DirichletPrior{post.alpha_post, post.base_post};
}

}  // namespace cdp
