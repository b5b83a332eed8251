#pragma once

// Exact integer/rational combinatorics and the hypergeometric distribution.
//
// All closed-form probabilities and moments in the toolkit are carried as
// BigRational (GMP mpq_class, always kept in canonical form) and converted to
// double only at the reporting boundary.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace steinkit {

using BigInt = mpz_class;
using BigRational = mpq_class;

/// Parses "p/q", "p" or a decimal literal such as "0.25" into a canonical rational.
BigRational parse_rational(const std::string& text);
std::string to_string(const BigRational& value);
double to_double(const BigRational& value);
/// num/den reduced to lowest terms; den != 0.
BigRational rational(const BigInt& num, const BigInt& den);

/// Polynomial with exact rational coefficients; coeffs[k] multiplies x^k.
struct Polynomial {
  std::vector<BigRational> coeffs;

  static Polynomial monomial(unsigned degree);
  unsigned degree() const;
  Polynomial derivative() const;
  BigRational operator()(const BigRational& x) const;
  double operator()(double x) const;
};

BigInt binomial(std::uint64_t n, std::uint64_t k);
BigInt falling_factorial(std::uint64_t n, std::uint64_t k);
BigRational pow(const BigRational& base, unsigned exponent);

/// Hyp(N, m, n): number of special items among m draws without replacement
/// from a population of N items, n of which are special.
struct HypergeometricParams {
  std::uint64_t population = 0;  // N
  std::uint64_t draws = 0;       // m
  std::uint64_t special = 0;     // n

  HypergeometricParams() = default;
  HypergeometricParams(std::uint64_t population, std::uint64_t draws, std::uint64_t special);

  std::uint64_t support_min() const;
  std::uint64_t support_max() const;
  BigRational mean() const;  // nm/N
};

BigRational hyp_pmf(const HypergeometricParams& params, std::uint64_t k);
/// pmf over k = 0..support_max(); index k holds P[H = k].
std::vector<BigRational> hyp_pmf_table(const HypergeometricParams& params);
BigRational hyp_moment(const HypergeometricParams& params, unsigned j);
/// P[H = 0] through the sequential-draw product prod_{i<m} (1 - n/(N-i)).
BigRational hyp_zero_prob(const HypergeometricParams& params);

struct BoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// P[H >= EH + t] <= exp(-t^2 / (2 EH + t)).
BoundReport check_tail_bound(const HypergeometricParams& params, double t);
/// E H^k <= 3^{k-1} (k! (EH+1)^k + (EH)^k + 1).
BoundReport check_moment_bound(const HypergeometricParams& params, unsigned k);

struct ZeroProbReport {
  double p0 = 0.0;
  double lower = 0.0;  // exp(-mn/(N-m-n+1)), 0 when not applicable
  double upper = 0.0;  // exp(-mn/N)
  bool lower_applicable = false;
  double p_positive = 0.0;
  double p_positive_lower = 0.0;   // mn/N - m^2 n^2 / (2 N^2)
  double p_positive_middle = 0.0;  // 1 - exp(-mn/N)
  double p_positive_upper = 0.0;   // mn/N
  bool holds = false;
};

/// Exponential sandwich of P[H = 0] and the matching bounds on P[H > 0].
ZeroProbReport check_lemma3(const HypergeometricParams& params);

struct PsiReport {
  double lower = 0.0;
  double middle = 0.0;
  double upper = 0.0;
  bool holds = false;
};

/// 1 - e^{-x}(1 + x), accurate for small x.
double one_minus_exp_one_plus(double x);
/// min(x^2,1)/4 <= 1 - e^{-x}(1+x) <= min(x^2,2)/2.
PsiReport check_lemma4(double x);
/// e^{-x}(1 - e^{-x}(1 + x)).
double phi(double x);

inline constexpr double kFloatSlack = 1e-12;

}  // namespace steinkit
