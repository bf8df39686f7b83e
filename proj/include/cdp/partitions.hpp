// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "cdp/errors.hpp"
#include "cdp/numeric.hpp"

namespace cdp {

inline constexpr int kDefaultPartitionCap = 40;

// Multiplicity encoding of an integer partition of n: v[i-1] counts the
// parts of size i, so sum_i i*v_i = n. This is the index set over which
// every partition-mixture law in the library is summed.
struct PartitionMultiplicity {
  int n = 0;
  std::vector<int> v;  // length n, v[i-1] = number of parts of size i

  int block_count() const {
    return std::accumulate(v.begin(), v.end(), 0);
  }

  // Part sizes in non-increasing order, e.g. v=(1,0,1) -> {3,1}.
  std::vector<int> parts() const {
    std::vector<int> out;
    for (int i = n; i >= 1; --i)
      for (int k = 0; k < v[static_cast<std::size_t>(i) - 1]; ++k) out.push_back(i);
    return out;
  }

  bool operator==(const PartitionMultiplicity& other) const {
    return n == other.n && v == other.v;
  }
};

inline void validate(const PartitionMultiplicity& pm) {
  if (pm.n < 1) throw domain_error("partition: n must be positive");
  if (static_cast<int>(pm.v.size()) != pm.n)
    throw domain_error("partition: v must have length n");
  long long total = 0;
  for (int i = 1; i <= pm.n; ++i) {
    const int vi = pm.v[static_cast<std::size_t>(i) - 1];
    if (vi < 0) throw domain_error("partition: multiplicities must be non-negative");
    total += static_cast<long long>(i) * vi;
  }
  if (total != pm.n)
    throw domain_error("partition: sum of i*v_i must equal n");
}

namespace detail {

// Visit partitions of n as non-increasing part lists in descending
// lexicographic order ([n], [n-1,1], ..., [1,...,1]), with at most
// `max_parts` parts. Parts are passed as a reusable scratch vector.
inline void visit_partitions(int n, int max_parts,
                             std::vector<int>& scratch,
                             const std::function<void(const std::vector<int>&)>& fn) {
  if (n == 0) {
    fn(scratch);
    return;
  }
  if (max_parts == 0) return;
  const int max_first = scratch.empty() ? n : std::min(n, scratch.back());
  for (int k = max_first; k >= 1; --k) {
    // remaining parts each at most k; bail when n no longer fits
    if (static_cast<long long>(k) * max_parts < n) break;
    scratch.push_back(k);
    visit_partitions(n - k, max_parts - 1, scratch, fn);
    scratch.pop_back();
  }
}

inline PartitionMultiplicity to_multiplicity(int n, const std::vector<int>& parts) {
  PartitionMultiplicity pm;
  pm.n = n;
  pm.v.assign(static_cast<std::size_t>(n), 0);
  for (int p : parts) ++pm.v[static_cast<std::size_t>(p) - 1];
  return pm;
}

}  // namespace detail

// All of Delta_n in descending-lexicographic order on the part sizes.
inline std::vector<PartitionMultiplicity> enumerate_partitions(
    int n, int cap = kDefaultPartitionCap) {
  if (n < 1) throw domain_error("enumerate_partitions: n must be >= 1");
  if (n > cap)
    throw domain_error("enumerate_partitions: n=" + std::to_string(n) +
                       " exceeds the partition cap " + std::to_string(cap));
  std::vector<PartitionMultiplicity> out;
  std::vector<int> scratch;
  detail::visit_partitions(n, n, scratch, [&](const std::vector<int>& parts) {
    out.push_back(detail::to_multiplicity(n, parts));
  });
  return out;
}

// As above but restricted to partitions with at most max_parts blocks.
// Used by the truncated large-n evaluators in the process module.
inline std::vector<PartitionMultiplicity> enumerate_partitions_max_blocks(
    int n, int max_parts) {
  if (n < 1) throw domain_error("enumerate_partitions: n must be >= 1");
  std::vector<PartitionMultiplicity> out;
  std::vector<int> scratch;
  detail::visit_partitions(n, max_parts, scratch,
                           [&](const std::vector<int>& parts) {
                             out.push_back(detail::to_multiplicity(n, parts));
                           });
  return out;
}

struct EwensWeight {
  double log_prob = 0.0;
  PartitionMultiplicity partition;
  double alpha = 0.0;
};

// log p_v(n) under the Ewens sampling formula,
//   p_v(n) = n! / (alpha (alpha+1) ... (alpha+n-1)) * prod_i alpha^{v_i} / (i^{v_i} v_i!).
// Everything runs through lgamma so n up to the cap is safe at any
// reasonable alpha.
inline double ewens_log_prob_value(const PartitionMultiplicity& pm, double alpha) {
  if (alpha <= 0.0) throw domain_error("ewens_log_prob: alpha must be positive");
  double lp = std::lgamma(pm.n + 1.0) - log_rising_factorial(alpha, pm.n);
  const double log_alpha = std::log(alpha);
  for (int i = 1; i <= pm.n; ++i) {
    const int vi = pm.v[static_cast<std::size_t>(i) - 1];
    if (vi == 0) continue;
    lp += vi * (log_alpha - std::log(static_cast<double>(i)));
    lp -= std::lgamma(vi + 1.0);
  }
  return lp;
}

inline EwensWeight ewens_log_prob(const PartitionMultiplicity& pm, double alpha) {
  validate(pm);
  return EwensWeight{ewens_log_prob_value(pm, alpha), pm, alpha};
}

struct EwensTable {
  std::vector<std::pair<PartitionMultiplicity, double>> entries;  // weight space
  double discarded_mass = 0.0;
};

// Full or thresholded Ewens weight table over Delta_n. Entries keep their
// untruncated weights; everything below epsilon * max-weight is dropped and
// accounted for in discarded_mass, so entries + discarded_mass sum to one.
inline EwensTable ewens_weight_table(int n, double alpha, double epsilon,
                                     int cap = kDefaultPartitionCap) {
  if (epsilon < 0.0 || epsilon >= 1.0)
    throw domain_error("ewens_weight_table: epsilon must lie in [0, 1)");
  auto parts = enumerate_partitions(n, cap);
  std::vector<double> logw(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i)
    logw[i] = ewens_log_prob_value(parts[i], alpha);
  const double log_max = *std::max_element(logw.begin(), logw.end());
  const double log_cut = epsilon > 0.0 ? log_max + std::log(epsilon) : kNegInf;

  EwensTable table;
  std::vector<double> dropped;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (logw[i] >= log_cut)
      table.entries.emplace_back(std::move(parts[i]), std::exp(logw[i]));
    else
      dropped.push_back(logw[i]);
  }
  table.discarded_mass =
      dropped.empty() ? 0.0 : std::exp(log_sum_exp(dropped));
  return table;
}

}  // namespace cdp
