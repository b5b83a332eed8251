#pragma once

// Model-agnostic Stein machinery: coupling-identity checkers, the Kolmogorov
// and Wasserstein estimators, the inductive recursion device and the
// Efron-Stein-type variance bound over random permutations.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "steinkit/exactnum.hpp"

namespace steinkit {

// ---------------------------------------------------------------------------
// Standard normal helpers

/// Phi(x) = erfc(-x/sqrt 2)/2; relative error at the level of erfc (~1e-16).
double normal_cdf(double x);
double normal_pdf(double x);
double normal_quantile(double p);

// ---------------------------------------------------------------------------
// Exact finite laws

struct Atom {
  BigRational value;
  BigRational prob;
};

/// Finite law with exact atoms: values strictly increasing, probabilities
/// positive and summing to exactly one.
class DiscreteLaw {
 public:
  DiscreteLaw() = default;
  /// Merges equal values and drops zero-probability entries; throws unless the
  /// total mass is exactly one and every weight is nonnegative.
  static DiscreteLaw from_weights(std::vector<Atom> weighted);

  const std::vector<Atom>& atoms() const { return atoms_; }
  BigRational expectation(const std::function<BigRational(const BigRational&)>& f) const;
  BigRational moment(unsigned k) const;
  BigRational mean() const { return moment(1); }
  BigRational variance() const;

 private:
  std::vector<Atom> atoms_;
};

struct RealAtom {
  double value = 0.0;
  double prob = 0.0;
};

/// sup_z |F(z) - Phi(z)| for a finite law, evaluated at every atom and its left limit.
double kolmogorov_distance(std::vector<RealAtom> atoms);

// ---------------------------------------------------------------------------
// Empirical estimators

struct KolmogorovEstimate {
  double delta_hat = 0.0;
  double dkw_band = 0.0;
  std::size_t samples = 0;
};

/// Dvoretzky-Kiefer-Wolfowitz half-width sqrt(ln(2/confidence)/(2 samples)).
double dkw_band(std::size_t samples, double confidence = 0.05);

/// Exact sup over the empirical step CDF of sorted samples against Phi. Ties
/// merge into a single jump. Needs at least 100 samples.
KolmogorovEstimate empirical_kolmogorov(std::span<const double> sorted_samples, double confidence = 0.05);

/// Wasserstein-1 distance between the empirical law of sorted samples and
/// N(0,1), integrated exactly between consecutive normal quantiles.
double wasserstein_to_normal(std::span<const double> sorted_samples);
/// Exact Wasserstein-1 distance between a finite law and N(0,1).
double wasserstein_to_normal(std::vector<RealAtom> atoms);

// ---------------------------------------------------------------------------
// Recursion device

struct RecursionSpec {
  double q = 0.5;
  double c = 1.0;

  RecursionSpec() = default;
  RecursionSpec(double q, double c);
};

/// a_n = q^{n-1} + c (1 - q^{n-1})/(1 - q), the solution of a_n = q a_{n-1} + c with a_1 = 1.
double recursion_closed_form(const RecursionSpec& spec, unsigned n);

struct KernelTransition {
  std::size_t successor = 0;
  double prob = 0.0;  // P_theta[Psi = successor, X = x]
  double x = 0.0;
};

/// A finite parameter set; state i moves to Psi with weight X according to
/// transitions[i]. Rates r(theta) feed the growth condition.
struct FiniteKernel {
  std::vector<std::vector<KernelTransition>> transitions;
  std::vector<bool> smiley;
  std::vector<double> rate;

  std::size_t size() const { return transitions.size(); }
};

struct RecursionSolution {
  bool refused = false;
  std::string diagnostic;
  std::vector<double> a;
  double sup = 0.0;
  double ceiling = 0.0;  // c/(1-q)
  bool sup_ok = false;
  bool a_below_rate = false;
  unsigned iterations = 0;
};

/// Largest fixed point of a(theta) = q E_theta[X a(Psi)] + c, found by
/// iterating down from c/(1-q) + 1. Refuses kernels where E X is not 1 on the
/// smiley set and 0 elsewhere (1e-12), or where some r(Psi) on {X > 0}
/// exceeds r(theta)/(2q).
RecursionSolution recursion_bound_solve(const FiniteKernel& kernel, const RecursionSpec& spec);

// ---------------------------------------------------------------------------
// Coupling identities

struct PairAtom {
  BigRational w;
  BigRational w_prime;
  BigRational prob;
};

struct SteinPairReport {
  bool exchangeable = false;
  bool linear_regression = false;  // E[W'|W] = (1 - lambda) W
  bool stein_identity = false;     // E[G f(W') - G f(W)] = E[W f(W)], G = (W'-W)/(2 lambda), f = x, x^2, x^3
  bool is_stein_pair = false;
};

SteinPairReport check_stein_pair(std::span<const PairAtom> joint, const BigRational& lambda);

struct UniformLaw {
  BigRational lo;
  BigRational hi;
};

/// Zero-bias law of the two-point law with atoms a > 0 > b and mean zero:
/// uniform on (b, a).
UniformLaw zero_bias_two_point(const BigRational& a, const BigRational& b);
UniformLaw zero_bias_two_point(const DiscreteLaw& law);

/// Exact check of E[W f(W)] = Var(W) E[f'(W*)] for W* uniform.
bool zero_bias_identity_holds(const DiscreteLaw& law, const UniformLaw& zero_bias, const Polynomial& f);

/// Law of Y^s with P[Y^s = y] = y P[Y = y] / EY.
DiscreteLaw size_bias_law(const DiscreteLaw& law);

struct SizeBiasReport {
  bool identity_x = false;
  bool identity_x2 = false;
  bool identity_indicators = false;  // f = 1{y <= t} for every atom t
  bool stein_reduction = false;      // W = Y - mu, W' = Y^s - mu, G = mu satisfy the Stein identity
  bool holds = false;
};

SizeBiasReport check_size_bias(const DiscreteLaw& law, const DiscreteLaw& coupled);

// ---------------------------------------------------------------------------
// Efron-Stein-type bound over (pi, Sigma)

using Permutation = std::vector<std::uint64_t>;  // one-line notation over {1..N}
using PermutationFunction = std::function<BigRational(const Permutation& pi, std::span<const Permutation> sigma)>;

struct EfronSteinReport {
  BigRational variance;
  BigRational bound;
  BigRational sigma_term;      // (1/2) sum_i E(h(pi,Sigma) - h(pi,Sigma'_i))^2
  BigRational transposition_term;  // (1/2) sum_j E(h(pi,Sigma) - h(pi tau_j,Sigma))^2
  bool holds = false;
};

/// Exhaustive over all (N!)^{1 + n_sigma} states; refuses more than 2e6 states.
EfronSteinReport check_efron_stein(const PermutationFunction& h, unsigned N, unsigned n_sigma);

/// All permutations of {1..N} in lexicographic order.
std::vector<Permutation> all_permutations(unsigned N);

}  // namespace steinkit
