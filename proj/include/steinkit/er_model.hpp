#pragma once

// Isolated vertices in ER(n, m), the uniform graph with exactly m edges.
//
// Vertices are 1..n. Edge slots are 1..N, N = n(n-1)/2, in row-major order
// {1,2},...,{1,n},{2,3},...,{n-1,n}. A graph is the first m slots of a
// permutation of the slots.

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "steinkit/exactnum.hpp"
#include "steinkit/rng.hpp"
#include "steinkit/stein_core.hpp"

namespace steinkit {

struct ErParams {
  std::uint64_t n = 0;
  std::uint64_t m = 0;

  ErParams() = default;
  /// Throws unless n >= 3 and 0 < m < n(n-1)/2.
  ErParams(std::uint64_t n, std::uint64_t m);

  std::uint64_t slots() const { return n * (n - 1) / 2; }
};

std::uint64_t edge_index(std::uint64_t v, std::uint64_t w, std::uint64_t n);
std::pair<std::uint64_t, std::uint64_t> slot_to_pair(std::uint64_t slot, std::uint64_t n);

/// Slot -> endpoint lookup for a fixed n; index 0 unused.
class SlotTable {
 public:
  explicit SlotTable(std::uint64_t n);
  std::uint64_t n() const { return n_; }
  const std::pair<std::uint32_t, std::uint32_t>& operator[](std::uint64_t slot) const { return pairs_[slot]; }

 private:
  std::uint64_t n_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs_;
};

/// G(m, pi). Only pi(1..m) is stored; the tail of pi never affects the graph
/// or the coupling.
class ErGraphState {
 public:
  ErGraphState() = default;
  explicit ErGraphState(const ErParams& params);
  /// Graph from a full permutation of {1..N} (or any prefix of length >= m).
  static ErGraphState from_permutation(const ErParams& params, std::span<const std::uint64_t> perm);

  const ErParams& params() const { return params_; }
  std::span<const std::uint64_t> edges() const { return edges_; }
  bool is_edge(std::uint64_t slot) const { return is_edge_[slot] != 0; }
  std::uint64_t degree(std::uint64_t v) const { return degree_[v]; }
  std::span<const std::uint64_t> degrees() const { return degree_; }  // index 0 unused
  std::uint64_t isolated() const { return isolated_; }
  std::vector<std::uint64_t> neighbors(std::uint64_t v) const;
  const SlotTable& table() const { return *table_; }

  /// Clears the current edges (cost O(m + n)) and inserts the slots in order.
  void assign(std::span<const std::uint64_t> slots);

 private:
  friend class ErSampler;
  void clear();
  void add(std::uint64_t slot);

  ErParams params_;
  std::shared_ptr<const SlotTable> table_;
  std::vector<std::uint64_t> edges_;
  std::vector<std::uint8_t> is_edge_;
  std::vector<std::uint64_t> degree_;
  std::uint64_t isolated_ = 0;
};

std::uint64_t isolated_count(const ErGraphState& graph);

struct ErMoments {
  BigRational mu;
  BigRational sigma2;
};

/// mu = n C(N-n+1, m)/C(N, m); sigma^2 = mu + n(n-1) C(N-2n+3, m)/C(N, m) - mu^2.
ErMoments exact_moments(const ErParams& params);

struct ApproxMoments {
  double mu = 0.0;      // n e^{-2m/n}
  double sigma2 = 0.0;  // n phi(2m/n)
};
ApproxMoments asymptotic_moments(const ErParams& params);

/// sigma^3 / (mu (1 + m^2/n^2)); 0 when sigma^2 = 0.
double rate(const ErParams& params);
double rate(const ErParams& params, const ErMoments& moments);

struct SmileyThresholds {
  double n_bar = 344;
  double m_bar = 28;
  double c_bar = 1;
};

bool smiley_membership(const ErParams& params, const SmileyThresholds& thresholds = {});

struct RedistributionResult {
  std::vector<std::uint64_t> coupled_degrees;  // index w; entry v is 0
  std::vector<std::uint64_t> relocated_slots;  // L^v in the order added
  std::vector<std::uint64_t> receiving_vertices;  // N^v, sorted
  std::vector<std::uint64_t> lost_neighbors;      // M^v, sorted
  std::uint64_t coupled_isolated = 0;             // Y^v
  std::int64_t b_v = 0;                           // Y - Y^v
  std::uint64_t candidates_scanned = 0;
};

/// Algorithm 1 with a fully specified sigma_v (one-line notation over slots).
RedistributionResult redistribute(const ErGraphState& graph, std::uint64_t v, std::span<const std::uint64_t> sigma_v);
/// Same construction with sigma_v revealed lazily from `sigma`, which must be
/// freshly reset to size N.
RedistributionResult redistribute(const ErGraphState& graph, std::uint64_t v, LazyPermutation& sigma, Rng& rng);

/// I_v + sum_{N^v} I_w - sum_{M^v} 1{d_w = 1}; throws std::logic_error if it
/// differs from result.b_v.
std::int64_t b_v_decomposition(const ErGraphState& graph, std::uint64_t v, const RedistributionResult& result);

struct ErCouplingSample {
  double w = 0.0;
  double w_prime = 0.0;
  double g = 0.0;
  double d = 0.0;
  std::uint64_t chosen_vertex = 0;
  std::uint64_t chosen_degree = 0;
  std::uint64_t y = 0;
  std::uint64_t y_prime = 0;
};

/// Reusable sampling workspace for one parameter point. Not thread-safe; use
/// one per worker.
class ErSampler {
 public:
  explicit ErSampler(const ErParams& params);

  const ErParams& params() const { return params_; }
  const ErMoments& moments() const { return moments_; }
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  /// Uniform graph via a lazily revealed uniform permutation of the slots.
  const ErGraphState& sample_graph(Rng& rng);
  /// (W, W', G, D) with V uniform and sigma_V lazily revealed; throws if sigma = 0.
  ErCouplingSample coupling_sample(Rng& rng);
  /// E(GD | pi, Sigma) = (1/n) sum_v G_v D_v for a fresh (pi, Sigma).
  double conditional_gd(Rng& rng);
  LazyPermutation& sigma_workspace() { return candidates_; }

 private:
  ErParams params_;
  ErMoments moments_;
  double mu_ = 0.0;
  double sigma_ = 0.0;
  ErGraphState graph_;
  LazyPermutation pi_;
  LazyPermutation candidates_;
  std::vector<std::uint64_t> prefix_;
};

ErGraphState sample_graph(const ErParams& params, Rng& rng);
ErCouplingSample coupling_sample(const ErParams& params, Rng& rng);

/// |D| <= (1 + 2 d_V)/sigma.
double d_bar(std::uint64_t chosen_degree, double sigma);

struct SteinIdentityReport {
  bool degenerate = false;  // sigma^2 = 0, nothing checked
  // Per monomial k = 0..deg f in Y coordinates with g(y) = (y - mu)^k:
  // lhs_y[k] = E[Gt (g(Y') - g(Y))], rhs_y[k] = E[(Y - mu) g(Y)], Gt = mu - n I_V.
  std::vector<BigRational> lhs_y;
  std::vector<BigRational> rhs_y;
  double lhs = 0.0;  // E[G f(W') - G f(W)] on the standardized scale
  double rhs = 0.0;  // E[W f(W)]
  bool equal = false;
  std::uint64_t states = 0;  // (edge set, v, L^v) triples visited
};

/// Exhaustive over edge sets, chosen vertex and the relocated set. For a
/// uniform sigma_v the relocated set is a uniform d_v-subset of the eligible
/// slots, so enumerating those subsets is the same as enumerating sigma_v.
/// Refuses (std::invalid_argument) beyond 5e6 triples or deg f > 4.
SteinIdentityReport check_stein_identity_exhaustive(const ErParams& params, const Polynomial& f);

struct NegativeCorrelationReport {
  BigRational joint;    // C(N-2n+3, m)/C(N, m) = P[d_v = d_w = 0]
  BigRational product;  // (C(N-n+1, m)/C(N, m))^2
  bool correlation_holds = false;
  bool sigma_bound_holds = false;  // sigma^2 <= min(mu, 2m)
  bool holds = false;
};
NegativeCorrelationReport check_negative_correlation(const ErParams& params);

struct Lemma6Report {
  bool applicable = false;  // n >= 6 and m <= n^2/4 - 3n/2
  double mu_over_n = 0.0;
  double mu_lower = 0.0;
  double mu_upper = 0.0;
  double sigma2 = 0.0;
  double sigma2_lower = 0.0;
  double sigma2_upper = 0.0;
  bool holds_mu = false;
  bool holds_sigma = false;
};

/// Bounds are evaluated even when the hypothesis fails; `applicable` says
/// whether they are asserted. Slack 1e-10 relative.
Lemma6Report check_lemma6(const ErParams& params);

struct Lemma6Sweep {
  std::uint64_t n = 0;
  std::uint64_t checked = 0;
  std::uint64_t failures = 0;
  std::uint64_t first_failing_m = 0;
};

/// All m in [1, n^2/4 - 3n/2] for one n, with moments updated incrementally
/// in 256-bit floating point.
Lemma6Sweep lemma6_sweep(std::uint64_t n);

struct Lemma9Report {
  double mean_ratio = 0.0;
  double var_ratio = 0.0;
  bool finite = false;
  bool below_ceiling = false;
};

/// Ratios mu_{n,m}^2 / mu_{n-1,m-d}^2 and sigma^2 analogues, each maximised
/// with its inverse. Throws unless 0 <= d <= min(n,m)/4 and (n-1, m-d) is a
/// valid parameter.
Lemma9Report check_lemma9_ratios(const ErParams& params, std::uint64_t d, double ceiling = 16.0);

struct GdVarianceEstimate {
  double variance = 0.0;   // Var E(GD | pi, Sigma)
  double std_error = 0.0;  // of the variance estimate
  double mean = 0.0;       // should be close to 1
  double proxy = 0.0;      // sqrt(variance)
  std::uint64_t samples = 0;
};

GdVarianceEstimate gd_conditional_variance_estimate(const ErParams& params, Rng& rng, std::uint64_t samples);

struct GdVarianceExact {
  BigRational mean;      // E GD, equals 1
  BigRational variance;  // Var E(GD | pi, Sigma), scaled back by sigma^4 below
  double variance_d = 0.0;
};

/// Exhaustive version for small parameters (same feasibility guard as the
/// Stein identity check).
GdVarianceExact gd_conditional_variance_exact(const ErParams& params);

/// Law of Y as counts over all C(N, m) edge sets; index y holds the number
/// of edge sets with y isolated vertices. Refuses more than 5e6 edge sets.
std::vector<BigInt> enumerate_isolated_law(const ErParams& params);

/// Exact Kolmogorov distance of W = (Y - mu)/sigma from N(0,1) by enumeration.
double exact_kolmogorov(const ErParams& params);

KolmogorovEstimate kolmogorov_estimate(const ErParams& params, Rng& rng, std::uint64_t samples,
                                       double confidence = 0.05);

/// t(n, m) = min(n, m)/4 and the event {d_V <= t(n, m)}.
double truncation_level(const ErParams& params);
bool within_truncation(const ErParams& params, std::uint64_t chosen_degree);
/// 4m/n + 2 log(min(m, n)).
double truncation_lower(const ErParams& params);

}  // namespace steinkit
