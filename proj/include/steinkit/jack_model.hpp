#pragma once

// Jack_alpha measure on partitions, Kerov's growth process, the alpha-content
// statistic and its zero-bias coupling.
//
// Boxes are (row, col), both 1-based. alpha is an exact rational wherever a
// probability is computed exactly; a double alpha is accepted on the sampling
// paths so that irrational values such as n^{1.5} can be used.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "steinkit/exactnum.hpp"
#include "steinkit/rng.hpp"
#include "steinkit/stein_core.hpp"

namespace steinkit {

struct Partition {
  std::vector<std::uint32_t> parts;  // non-increasing, positive

  Partition() = default;
  /// Throws unless parts are positive and non-increasing and not empty.
  explicit Partition(std::vector<std::uint32_t> parts);

  std::uint64_t size() const;
  std::uint32_t rows() const { return static_cast<std::uint32_t>(parts.size()); }
  std::uint32_t row_length(std::uint32_t row) const { return row <= parts.size() ? parts[row - 1] : 0; }
  /// Number of rows of length >= col.
  std::uint32_t column_length(std::uint32_t col) const;
  bool contains(std::uint32_t row, std::uint32_t col) const { return col >= 1 && col <= row_length(row); }
  Partition conjugate() const;
  std::string to_string() const;  // "4,2,1"

  auto operator<=>(const Partition&) const = default;
};

Partition parse_partition(const std::string& text);

struct Box {
  std::uint32_t row = 1;
  std::uint32_t col = 1;
  auto operator<=>(const Box&) const = default;
};

struct ArmLeg {
  std::uint32_t arm = 0;
  std::uint32_t leg = 0;
};

/// Throws std::out_of_range for a box outside the diagram.
ArmLeg arm_leg(const Partition& p, Box box);

/// alpha^n n! / prod_x (alpha a(x) + l(x) + 1)(alpha a(x) + l(x) + alpha).
BigRational jack_probability(const Partition& p, const BigRational& alpha);
double jack_probability(const Partition& p, double alpha);

/// All partitions of n in lexicographic order of their parts; n <= 60.
std::vector<Partition> enumerate_partitions(std::uint32_t n);

/// alpha (col - 1) - (row - 1).
BigRational content(Box box, const BigRational& alpha);
double content(Box box, double alpha);

/// Y = sum of alpha-contents over all boxes.
BigRational content_sum(const Partition& p, const BigRational& alpha);
double content_sum(const Partition& p, double alpha);
/// W = Y / sqrt(alpha n(n-1)/2); needs n >= 2.
double content_w(const Partition& p, double alpha);

/// Addable boxes in increasing row order; the last one opens a new row.
std::vector<Box> addable_corners(const Partition& p);
Partition add_box(const Partition& p, Box box);

template <class Scalar>
struct Corner {
  Box box;
  Scalar content;
  Scalar prob;
};

using CornerDistribution = std::vector<Corner<BigRational>>;
using CornerDistributionD = std::vector<Corner<double>>;

/// Kerov transition law out of p. Exact for rational alpha.
CornerDistribution kerov_transition_probs(const Partition& p, const BigRational& alpha);
CornerDistributionD kerov_transition_probs(const Partition& p, double alpha);

/// Test hook: every transition weight is multiplied by (1 + factor) before
/// use. Zero restores the exact rule. Process-wide, not thread-safe.
void set_kerov_perturbation(const BigRational& factor);

/// Exact law of Lambda_n obtained by composing Kerov transitions from (1).
std::map<Partition, BigRational> kerov_chain_law(std::uint32_t n, const BigRational& alpha);

struct KerovPath {
  Partition final;
  std::vector<double> contents;  // content added at times 2..n
};

/// Grows from (1) by n - 1 transitions.
KerovPath kerov_sample(std::uint32_t n, double alpha, Rng& rng);

struct TMoments {
  // T = c / sqrt(S) with S = alpha C(n,2), so E[T | Lambda_{n-1}] is
  // content_mean / sqrt(S); it is exactly zero iff content_mean is.
  BigRational content_mean;  // sum_i p_i c_i
  BigRational m2;            // E[T^2 | Lambda_{n-1}] = sum_i p_i c_i^2 / S
};

/// p must be a partition of n - 1.
TMoments conditional_t_moments(const Partition& p, const BigRational& alpha, std::uint32_t n);

struct ZeroBiasCell {
  std::size_t i = 0;  // index into corners
  std::size_t j = 0;
  BigRational weight;
};

struct ZeroBiasPair {
  CornerDistribution corners;
  std::vector<ZeroBiasCell> cells;  // ordered pairs i != j with positive weight
  BigRational normalizer;           // sum_ij p_i p_j (t_i - t_j)^2, equals 4/n
  BigRational total_weight;         // sum of cell weights
};

/// Weights p_i p_j (t_i - t_j)^2 / (4/n) on ordered corner pairs; p is a
/// partition of n - 1.
ZeroBiasPair zero_bias_pair_distribution(const Partition& p, const BigRational& alpha, std::uint32_t n);

struct ZeroBiasSample {
  double w_star = 0.0;
  double v = 0.0;  // content sum of Lambda_{n-1}
  double t_star = 0.0;
  double t_dagger = 0.0;
  double t_ddagger = 0.0;
  std::uint32_t first_row = 0;  // lambda_1 of Lambda_{n-1}
};

ZeroBiasSample zero_bias_sample(std::uint32_t n, double alpha, Rng& rng);

struct ZeroBiasIdentityReport {
  // Per monomial x^k, in content units: lhs_y[k] = E[Y^{k+1}],
  // rhs_y[k] = k S E[(V + c*)^{k-1}], S = alpha C(n,2).
  std::vector<BigRational> lhs_y;
  std::vector<BigRational> rhs_y;
  double lhs = 0.0;  // E[W f(W)]
  double rhs = 0.0;  // E[f'(W*)]
  double max_abs_err = 0.0;
  bool exact_equal = false;
  bool holds = false;  // exact_equal and |lhs - rhs| <= 1e-10
};

/// Exhaustive on both sides: Jack weights for W, Kerov paths plus the pair
/// table and closed-form U integrals for W*. n <= 8, deg f <= 5.
ZeroBiasIdentityReport check_zero_bias_identity(std::uint32_t n, const BigRational& alpha, const Polynomial& f);

struct JackMomentReport {
  BigRational ey;
  BigRational ey2;
  BigRational expected_ey2;  // alpha n(n-1)/2
  bool holds = false;
};

/// n <= 12.
JackMomentReport check_jack_moments(std::uint32_t n, const BigRational& alpha);

/// P[lambda'_1 = n] = prod_{l<n} alpha/(alpha + l).
BigRational single_column_prob(std::uint32_t n, const BigRational& alpha);

struct SingleColumnReport {
  double prob = 0.0;
  double lower = 0.0;  // exp(-n^2/alpha)
  bool holds = false;
};

SingleColumnReport check_single_column(std::uint32_t n, double alpha);

struct JackRate {
  double r = 0.0;  // n / sqrt(alpha)
  bool in_smiley = false;
};

/// Needs 0 < epsilon < 1; the region is n^{1+eps} < alpha < n^2 / 2^{1-eps}.
JackRate rate_and_region(std::uint32_t n, double alpha, double epsilon);

/// (1/sqrt n + sqrt(alpha)/n)^{-1}, the rate suggested for all alpha.
double alternative_rate(std::uint32_t n, double alpha);

/// sqrt(2/n)(2 + sqrt(2 + max(alpha, 1/alpha)/(n-1))).
double wasserstein_bound(std::uint32_t n, double alpha);

struct WassersteinReport {
  double d1_hat = 0.0;
  double bound = 0.0;
  double mc_budget = 0.0;  // 3 / sqrt(samples)
  bool holds_within_mc = false;
};

WassersteinReport check_wasserstein_bound(std::uint32_t n, double alpha, Rng& rng, std::uint64_t samples);

struct JackKolmogorov {
  KolmogorovEstimate estimate;
  double theorem_ratio = 0.0;     // delta_hat n / sqrt(alpha)
  double alternative_ratio = 0.0; // delta_hat * alternative_rate
};

JackKolmogorov kolmogorov_estimate(std::uint32_t n, double alpha, Rng& rng, std::uint64_t samples,
                                   double confidence = 0.05);

/// Exact Kolmogorov distance of W from N(0,1) by enumeration; n <= 20.
double exact_kolmogorov(std::uint32_t n, const BigRational& alpha);
/// Exact law of W as real atoms; n <= 20.
std::vector<RealAtom> jack_w_law(std::uint32_t n, const BigRational& alpha);

struct JackDiagnostics {
  double d_bar = 0.0;             // 10 sqrt(alpha) / (n eps)
  double first_row_limit = 0.0;   // 2 / eps
  double fc_bound = 0.0;          // 4 e alpha / n^2
  double fc_frequency = 0.0;      // observed P[lambda_1 > 2/eps] for Lambda_{n-1}
  double d_exceed_frequency = 0.0;  // observed P[|T* - T| > d_bar]
  std::uint64_t samples = 0;
};

JackDiagnostics jack_diagnostics(std::uint32_t n, double alpha, double epsilon, Rng& rng, std::uint64_t samples);

}  // namespace steinkit
