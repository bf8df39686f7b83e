// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cdp/errors.hpp"
#include "cdp/partitions.hpp"
#include "cdp/rng.hpp"

namespace cdp {

inline constexpr int kDefaultPhaseDimCap = 512;

// exp(M) by scaling and squaring with a diagonal Pade approximant
// (Higham 2005). Order is picked from the 1-norm; matrices with larger
// norms are scaled down by a power of two and squared back up.
inline Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& m,
                                          int dim_cap = kDefaultPhaseDimCap) {
  if (m.rows() != m.cols())
    throw domain_error("matrix_exponential: input must be square");
  if (m.rows() > dim_cap)
    throw resource_error("matrix_exponential: dimension " +
                         std::to_string(m.rows()) + " exceeds cap " +
                         std::to_string(dim_cap));
  if (!m.allFinite())
    throw domain_error("matrix_exponential: input has non-finite entries");

  const Eigen::Index p = m.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(p, p);
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();  // 1-norm

  const auto pade = [&](const Eigen::MatrixXd& a,
                        const std::vector<double>& b) -> Eigen::MatrixXd {
    const Eigen::MatrixXd a2 = a * a;
    Eigen::MatrixXd u = b[1] * id;
    Eigen::MatrixXd v = b[0] * id;
    Eigen::MatrixXd pow = a2;
    for (std::size_t k = 2; k + 1 < b.size(); k += 2) {
      v += b[k] * pow;
      u += b[k + 1] * pow;
      if (k + 3 < b.size()) pow = pow * a2;
    }
    u = a * u;
    return (v - u).partialPivLu().solve(v + u);
  };

  static const std::vector<double> b3 = {120, 60, 12, 1};
  static const std::vector<double> b5 = {30240, 15120, 3360, 420, 30, 1};
  static const std::vector<double> b7 = {17297280, 8648640, 1995840, 277200,
                                         25200, 1512, 56, 1};
  static const std::vector<double> b9 = {17643225600., 8821612800., 2075673600.,
                                         302702400., 30270240., 2162160.,
                                         110880., 3960., 90., 1.};

  if (norm <= 1.495585217958292e-2) return pade(m, b3);
  if (norm <= 2.539398330063230e-1) return pade(m, b5);
  if (norm <= 9.504178996162932e-1) return pade(m, b7);
  if (norm <= 2.097847961257068e0) return pade(m, b9);

  // Pade 13 with scaling
  static const std::vector<double> b13 = {
      64764752532480000., 32382376266240000., 7771770303897600.,
      1187353796428800.,  129060195264000.,   10559470521600.,
      670442572800.,      33522128640.,       1323241920.,
      40840800.,          960960.,            16380.,
      182.,               1.};
  const double theta13 = 5.371920351148152;
  int squarings = 0;
  Eigen::MatrixXd a = m;
  if (norm > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    a /= std::ldexp(1.0, squarings);
  }
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a4 = a2 * a2;
  const Eigen::MatrixXd a6 = a2 * a4;
  Eigen::MatrixXd u =
      a * (a6 * (b13[13] * a6 + b13[11] * a4 + b13[9] * a2) + b13[7] * a6 +
           b13[5] * a4 + b13[3] * a2 + b13[1] * id);
  Eigen::MatrixXd v = a6 * (b13[12] * a6 + b13[10] * a4 + b13[8] * a2) +
                      b13[6] * a6 + b13[4] * a4 + b13[2] * a2 + b13[0] * id;
  Eigen::MatrixXd r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

// Phase-type distribution PH(pi, T): the absorption time of a Markov jump
// process with initial row vector pi over the transient states and
// subgenerator T. Density pi e^{Tu} t with exit vector t = -T 1.
class PhaseType {
 public:
  PhaseType(Eigen::RowVectorXd pi, Eigen::MatrixXd t,
            int dim_cap = kDefaultPhaseDimCap)
      : pi_(std::move(pi)), t_(std::move(t)) {
    check_invariants(dim_cap);
  }

  int dim() const { return static_cast<int>(pi_.size()); }
  const Eigen::RowVectorXd& initial() const { return pi_; }
  const Eigen::MatrixXd& subgenerator() const { return t_; }
  Eigen::VectorXd exit_rates() const {
    return -t_ * Eigen::VectorXd::Ones(dim());
  }

  // f(u) = pi e^{Tu} t, zero for u < 0.
  double density(double u) const {
    if (u < 0.0) return 0.0;
    return pi_ * matrix_exponential(t_ * u) * exit_rates();
  }

  // F(u) = 1 - pi e^{Tu} 1.
  double cdf(double u) const {
    if (u < 0.0) return 0.0;
    const double surv =
        pi_ * matrix_exponential(t_ * u) * Eigen::VectorXd::Ones(dim());
    return std::min(1.0, std::max(0.0, 1.0 - surv));
  }

  // E[X^k] = k! pi (-T)^{-k} 1.
  double raw_moment(int k) const {
    if (k < 1) throw domain_error("PhaseType::raw_moment: k must be >= 1");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu((-t_).eval());
    Eigen::VectorXd w = Eigen::VectorXd::Ones(dim());
    double factorial = 1.0;
    for (int i = 1; i <= k; ++i) {
      w = lu.solve(w);
      factorial *= i;
    }
    return factorial * (pi_ * w).value();
  }

  double mean() const { return raw_moment(1); }

  // E[e^{sX}] = pi (-(T + sI))^{-1} t, finite for s below the spectral
  // abscissa of -T. Divergence is reported as a domain error.
  double mgf(double s) const {
    if (s >= mgf_abscissa()) {
      throw domain_error("PhaseType::mgf: diverges at argument " +
                         std::to_string(s));
    }
    const Eigen::MatrixXd shifted =
        -(t_ + s * Eigen::MatrixXd::Identity(dim(), dim()));
    const Eigen::VectorXd w = shifted.partialPivLu().solve(exit_rates());
    return (pi_ * w).value();
  }

  // Supremum of arguments where the MGF is finite.
  double mgf_abscissa() const {
    const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(t_, false)
                                    .eigenvalues();
    return -ev.real().maxCoeff();
  }

  // Absorption-time simulation of the underlying jump process.
  double sample(Rng& rng) const {
    const int p = dim();
    const Eigen::VectorXd exit = exit_rates();
    // initial phase
    int phase = p - 1;
    double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < p; ++i) {
      acc += pi_(i);
      if (u <= acc) {
        phase = i;
        break;
      }
    }
    double total = 0.0;
    while (true) {
      const double rate = -t_(phase, phase);
      total += rng.exponential(rate);
      // choose next phase or absorb; absorption is the residual category,
      // which also soaks up floating-point overshoot
      const double r = rng.uniform() * rate;
      double c = 0.0;
      int next = -1;
      for (int j = 0; j < p; ++j) {
        if (j == phase) continue;
        c += t_(phase, j);
        if (r <= c) {
          next = j;
          break;
        }
      }
      if (next < 0) return total;
      phase = next;
    }
  }

  // Law of j*X: PH(pi, T/j).
  PhaseType scaled(int j) const {
    if (j < 1) throw domain_error("PhaseType::scaled: j must be >= 1");
    return PhaseType(pi_, t_ / static_cast<double>(j));
  }

  // Law of X_a + X_b: dimension p_a + p_b, initial (pi_a, 0) and
  // subgenerator [[T_a, t_a pi_b], [0, T_b]].
  static PhaseType convolve(const PhaseType& a, const PhaseType& b,
                            int dim_cap = kDefaultPhaseDimCap) {
    const int pa = a.dim();
    const int pb = b.dim();
    if (pa + pb > dim_cap)
      throw resource_error("PhaseType::convolve: dimension " +
                           std::to_string(pa + pb) + " exceeds cap " +
                           std::to_string(dim_cap));
    Eigen::RowVectorXd pi(pa + pb);
    pi << a.pi_, Eigen::RowVectorXd::Zero(pb);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(pa + pb, pa + pb);
    t.topLeftCorner(pa, pa) = a.t_;
    t.topRightCorner(pa, pb) = a.exit_rates() * b.pi_;
    t.bottomRightCorner(pb, pb) = b.t_;
    return PhaseType(std::move(pi), std::move(t), dim_cap);
  }

 private:
  void check_invariants(int dim_cap) const {
    const int p = dim();
    if (p < 1) throw domain_error("PhaseType: dimension must be >= 1");
    if (p > dim_cap)
      throw resource_error("PhaseType: dimension " + std::to_string(p) +
                           " exceeds cap " + std::to_string(dim_cap));
    if (t_.rows() != p || t_.cols() != p)
      throw domain_error("PhaseType: pi and T dimensions disagree");
    constexpr double tol = 1e-9;
    double pi_sum = 0.0;
    for (int i = 0; i < p; ++i) {
      if (pi_(i) < -tol)
        throw domain_error("PhaseType: initial vector must be non-negative");
      pi_sum += pi_(i);
    }
    if (std::fabs(pi_sum - 1.0) > 1e-8)
      throw domain_error("PhaseType: initial vector must sum to one");
    const Eigen::VectorXd exit = exit_rates();
    bool any_exit = false;
    for (int i = 0; i < p; ++i) {
      if (t_(i, i) >= 0.0)
        throw domain_error("PhaseType: diagonal of T must be negative");
      for (int j = 0; j < p; ++j) {
        if (j != i && t_(i, j) < -tol)
          throw domain_error("PhaseType: off-diagonal of T must be non-negative");
      }
      if (exit(i) < -tol * std::fabs(t_(i, i)))
        throw domain_error("PhaseType: row sums of T must be non-positive");
      if (exit(i) > 0.0) any_exit = true;
    }
    if (!any_exit)
      throw domain_error("PhaseType: at least one state must exit");
  }

  Eigen::RowVectorXd pi_;
  Eigen::MatrixXd t_;
};

// One-phase PH is the exponential distribution.
inline PhaseType exponential_ph(double rate) {
  if (rate <= 0.0) throw domain_error("exponential_ph: rate must be positive");
  Eigen::RowVectorXd pi(1);
  pi << 1.0;
  Eigen::MatrixXd t(1, 1);
  t << -rate;
  return PhaseType(std::move(pi), std::move(t));
}

// Erlang(k, rate) as a chain of k exponential phases.
inline PhaseType erlang_ph(int k, double rate) {
  if (k < 1) throw domain_error("erlang_ph: k must be >= 1");
  if (rate <= 0.0) throw domain_error("erlang_ph: rate must be positive");
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(k);
  pi(0) = 1.0;
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
  for (int i = 0; i < k; ++i) {
    t(i, i) = -rate;
    if (i + 1 < k) t(i, i + 1) = rate;
  }
  return PhaseType(std::move(pi), std::move(t));
}

// The convolution component attached to one partition v: group j
// contributes v_j copies of the scaled base PH(pi, T/j), chained with
// couplings (t/j) pi between consecutive copies; groups with v_j = 0 are
// omitted. Equals the iterated convolution of the scaled laws, assembled
// directly.
struct BlockPhaseType {
  PhaseType ph;
  PartitionMultiplicity source;
  std::vector<int> scale_indices;  // the multiplier j of each block, in order
};

inline BlockPhaseType ph_partition_block(const PhaseType& base,
                                         const PartitionMultiplicity& v,
                                         int dim_cap = kDefaultPhaseDimCap) {
  validate(v);
  const int p = base.dim();
  std::vector<int> scales;
  for (int j = 1; j <= v.n; ++j)
    for (int k = 0; k < v.v[static_cast<std::size_t>(j) - 1]; ++k)
      scales.push_back(j);
  const int blocks = static_cast<int>(scales.size());
  const long long dim = static_cast<long long>(p) * blocks;
  if (dim > dim_cap)
    throw resource_error("ph_partition_block: dimension " +
                         std::to_string(dim) + " exceeds cap " +
                         std::to_string(dim_cap));

  const Eigen::MatrixXd& t = base.subgenerator();
  const Eigen::VectorXd exit = base.exit_rates();
  const Eigen::MatrixXd coupling = exit * base.initial();

  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(dim, dim);
  for (int b = 0; b < blocks; ++b) {
    const double j = static_cast<double>(scales[static_cast<std::size_t>(b)]);
    big.block(b * p, b * p, p, p) = t / j;
    if (b + 1 < blocks) big.block(b * p, (b + 1) * p, p, p) = coupling / j;
  }
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(dim);
  pi.head(p) = base.initial();
  return BlockPhaseType{PhaseType(std::move(pi), std::move(big), dim_cap), v,
                        std::move(scales)};
}

}  // namespace cdp
