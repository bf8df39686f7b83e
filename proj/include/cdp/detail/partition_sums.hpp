// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "cdp/errors.hpp"
#include "cdp/numeric.hpp"

namespace cdp::detail {

// ---------------------------------------------------------------------------
// Scalable Ewens partition sums. The explicit mixtures in sums.hpp stop at
// the partition cap (p(40) is already 37k terms). The evaluators here push
// the partition-mixture laws to a few hundred summands by exploiting two
// structures:
//
//  * For Gaussian bases the component law depends on v only through
//    q(v) = sum_j j^2 v_j, and the Ewens distribution of q obeys an
//    O(n^2)-per-row recurrence (exponential formula), giving the exact
//    mixture without enumerating Delta_n.
//
//  * For positive bases, partitions with many blocks contribute little to
//    P(S_n <= t) at fixed t: P(sum of blocks <= t) is at most the product
//    of the per-block CDFs. The same recurrence, marked by block count,
//    turns that into a computable remainder bound for enumeration limited
//    to partitions with at most K blocks.
//
// Both recurrences run in probability scale. With e_n(x) the partition sum
// prod_j x_j^{v_j}/v_j! and h_n = (n!/(alpha)_n) e_n, the exponential
// formula n e_n = sum_m m x_m e_{n-m} becomes
//    h_n = sum_m f(m) * r(n, m) * h_{n-m},   x_m = alpha f(m)/m,
// with the bounded transfer ratio
//    r(n, m) = alpha (n-1)!/(n-m)! * (alpha)_{n-m}/(alpha)_n.
// ---------------------------------------------------------------------------

class EwensTransfer {
 public:
  EwensTransfer(int n_max, double alpha) : log_fact_(n_max + 1), log_rising_(n_max + 1) {
    if (alpha <= 0.0) throw domain_error("ewens transfer: alpha must be positive");
    log_alpha_ = std::log(alpha);
    log_fact_[0] = 0.0;
    for (int i = 1; i <= n_max; ++i)
      log_fact_[static_cast<std::size_t>(i)] =
          log_fact_[static_cast<std::size_t>(i) - 1] + std::log(static_cast<double>(i));
    for (int i = 0; i <= n_max; ++i)
      log_rising_[static_cast<std::size_t>(i)] = log_rising_factorial(alpha, i);
  }

  // r(n, m) for 1 <= m <= n.
  double ratio(int n, int m) const {
    return std::exp(log_alpha_ + log_fact_[static_cast<std::size_t>(n) - 1] -
                    log_fact_[static_cast<std::size_t>(n - m)] +
                    log_rising_[static_cast<std::size_t>(n - m)] -
                    log_rising_[static_cast<std::size_t>(n)]);
  }

 private:
  double log_alpha_;
  std::vector<double> log_fact_;
  std::vector<double> log_rising_;
};

// Exact Ewens law of q(v) = sum_j j^2 v_j for every n up to n_max. Row n
// sums to one; the Gaussian S_n mixture is then
// sum_q P(q) N(mu n, sigma^2 q).
class EwensVarianceTable {
 public:
  EwensVarianceTable(int n_max, double alpha) : rows_(static_cast<std::size_t>(n_max) + 1) {
    if (n_max < 0) throw domain_error("variance table: n_max must be >= 0");
    EwensTransfer transfer(std::max(n_max, 1), alpha);
    std::vector<std::vector<double>> dense(static_cast<std::size_t>(n_max) + 1);
    dense[0] = {1.0};
    for (int n = 1; n <= n_max; ++n) {
      auto& row = dense[static_cast<std::size_t>(n)];
      row.assign(static_cast<std::size_t>(n) * n + 1, 0.0);
      for (int m = 1; m <= n; ++m) {
        const double w = transfer.ratio(n, m);  // f(m) = 1
        const auto& prev = dense[static_cast<std::size_t>(n - m)];
        const int shift = m * m;
        for (std::size_t q = 0; q < prev.size(); ++q) {
          if (prev[q] != 0.0) row[q + static_cast<std::size_t>(shift)] += w * prev[q];
        }
      }
    }
    for (int n = 0; n <= n_max; ++n) {
      auto& out = rows_[static_cast<std::size_t>(n)];
      const auto& row = dense[static_cast<std::size_t>(n)];
      for (std::size_t q = 0; q < row.size(); ++q)
        if (row[q] > 0.0) out.emplace_back(static_cast<long long>(q), row[q]);
    }
  }

  // (q, probability) pairs for the given n.
  const std::vector<std::pair<long long, double>>& row(int n) const {
    return rows_.at(static_cast<std::size_t>(n));
  }

  int n_max() const { return static_cast<int>(rows_.size()) - 1; }

 private:
  std::vector<std::vector<std::pair<long long, double>>> rows_;
};

// Block-count-marked partition sums for a per-part-size factor f(j) in
// [0, 1]: row n holds sum over partitions with exactly k blocks of
// p_v(n) prod_j f(j)^{v_j}. With f(j) = F(t/j) for a positive base CDF F,
//   P(S_n <= t restricted to partitions with > K blocks) <= tail(n, K),
// because the CDF of an independent sum is dominated by the product of the
// block CDFs.
class BlockCountTable {
 public:
  BlockCountTable(int n_max, double alpha, const std::function<double(int)>& f,
                  int k_cap)
      : k_cap_(k_cap), table_(static_cast<std::size_t>(n_max) + 1) {
    if (n_max < 1) throw domain_error("block count table: n_max must be >= 1");
    if (k_cap < 1) throw domain_error("block count table: k_cap must be >= 1");
    EwensTransfer transfer(n_max, alpha);
    std::vector<double> factor(static_cast<std::size_t>(n_max) + 1, 0.0);
    for (int m = 1; m <= n_max; ++m) factor[static_cast<std::size_t>(m)] = f(m);
    table_[0].assign(1, 1.0);  // k = 0 only
    for (int n = 1; n <= n_max; ++n) {
      auto& row = table_[static_cast<std::size_t>(n)];
      row.assign(static_cast<std::size_t>(std::min(n, k_cap)) + 1, 0.0);
      for (int m = 1; m <= n; ++m) {
        const double w = factor[static_cast<std::size_t>(m)] * transfer.ratio(n, m);
        if (w == 0.0) continue;
        const auto& prev = table_[static_cast<std::size_t>(n - m)];
        const std::size_t kmax = std::min(prev.size(), row.size() - 1);
        for (std::size_t k = 0; k < kmax; ++k)
          if (prev[k] != 0.0) row[k + 1] += w * prev[k];
      }
    }
  }

  // sum over partitions with more than K blocks (capped tally; partitions
  // with more than k_cap blocks are *not* represented, see total()).
  double tail(int n, int blocks_above) const {
    const auto& row = table_.at(static_cast<std::size_t>(n));
    double s = 0.0;
    for (std::size_t k = static_cast<std::size_t>(blocks_above) + 1; k < row.size(); ++k)
      s += row[k];
    return s;
  }

  // Everything the capped table tracks for this n.
  double total(int n) const {
    const auto& row = table_.at(static_cast<std::size_t>(n));
    double s = 0.0;
    for (std::size_t k = 1; k < row.size(); ++k) s += row[k];
    return s;
  }

  int k_cap() const { return k_cap_; }

 private:
  int k_cap_;
  std::vector<std::vector<double>> table_;
};

// Mass the capped block-count table cannot see: the Ewens probability of
// partitions with more than k_cap blocks (f == 1 restricted). Added on top
// of tail() to keep every reported remainder a true upper bound.
class BlockCountMass {
 public:
  BlockCountMass(int n_max, double alpha, int k_cap)
      : table_(n_max, alpha, [](int) { return 1.0; }, k_cap) {}

  // Upper bound on Ewens mass of partitions of n with more than k_cap blocks.
  double beyond_cap(int n) const { return std::max(0.0, 1.0 - table_.total(n)); }

 private:
  BlockCountTable table_;
};

}  // namespace cdp::detail
