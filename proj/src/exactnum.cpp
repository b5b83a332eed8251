#include "steinkit/exactnum.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace steinkit {

namespace {

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// a <= b up to the float-conversion slack (absolute near zero, relative for large b).
bool leq_slack(double a, double b) { return a <= b + kFloatSlack * std::max(1.0, std::abs(b)); }

}  // namespace

BigRational parse_rational(const std::string& raw) {
  std::string text = raw;
  text.erase(std::remove_if(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }),
             text.end());
  if (text.empty()) throw std::invalid_argument("empty rational literal");
  bool negative = false;
  std::string body = text;
  if (body[0] == '-' || body[0] == '+') {
    negative = body[0] == '-';
    body = body.substr(1);
  }
  BigRational result;
  if (auto slash = body.find('/'); slash != std::string::npos) {
    const std::string num = body.substr(0, slash);
    const std::string den = body.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den)) throw std::invalid_argument("malformed rational: " + raw);
    BigInt d(den);
    if (d == 0) throw std::invalid_argument("zero denominator: " + raw);
    result = BigRational(BigInt(num), d);
  } else if (auto dot = body.find('.'); dot != std::string::npos) {
    const std::string whole = body.substr(0, dot);
    const std::string frac = body.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty()))
      throw std::invalid_argument("malformed decimal: " + raw);
    BigInt scale = 1;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, frac.size());
    BigInt digits(whole.empty() ? std::string("0") : whole);
    digits = digits * scale + (frac.empty() ? BigInt(0) : BigInt(frac));
    result = BigRational(digits, scale);
  } else {
    if (!all_digits(body)) throw std::invalid_argument("malformed rational: " + raw);
    result = BigRational(BigInt(body));
  }
  result.canonicalize();
  return negative ? BigRational(-result) : result;
}

std::string to_string(const BigRational& value) { return value.get_str(); }

BigRational rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw std::invalid_argument("zero denominator");
  BigRational q(num, den);
  q.canonicalize();
  return q;
}

double to_double(const BigRational& value) { return value.get_d(); }

Polynomial Polynomial::monomial(unsigned degree) {
  Polynomial p;
  p.coeffs.assign(degree + 1, BigRational(0));
  p.coeffs[degree] = 1;
  return p;
}

unsigned Polynomial::degree() const {
  for (std::size_t k = coeffs.size(); k > 0; --k)
    if (coeffs[k - 1] != 0) return static_cast<unsigned>(k - 1);
  return 0;
}

Polynomial Polynomial::derivative() const {
  Polynomial d;
  for (std::size_t k = 1; k < coeffs.size(); ++k) d.coeffs.push_back(coeffs[k] * static_cast<unsigned long>(k));
  return d;
}

BigRational Polynomial::operator()(const BigRational& x) const {
  BigRational acc = 0;
  for (std::size_t k = coeffs.size(); k > 0; --k) acc = acc * x + coeffs[k - 1];
  return acc;
}

double Polynomial::operator()(double x) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k > 0; --k) acc = acc * x + coeffs[k - 1].get_d();
  return acc;
}

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  BigInt out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

BigInt falling_factorial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  BigInt out = 1;
  for (std::uint64_t i = 0; i < k; ++i) out *= static_cast<unsigned long>(n - i);
  return out;
}

BigRational pow(const BigRational& base, unsigned exponent) {
  BigInt num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exponent);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exponent);
  return BigRational(num, den);
}

HypergeometricParams::HypergeometricParams(std::uint64_t population, std::uint64_t draws,
                                           std::uint64_t special)
    : population(population), draws(draws), special(special) {
  if (draws > population || special > population)
    throw std::invalid_argument("hypergeometric parameters need draws <= population and special <= population");
}

std::uint64_t HypergeometricParams::support_min() const {
  return draws + special > population ? draws + special - population : 0;
}

std::uint64_t HypergeometricParams::support_max() const { return std::min(draws, special); }

BigRational HypergeometricParams::mean() const {
  if (population == 0) return 0;
  BigRational g(BigInt(static_cast<unsigned long>(draws)) * static_cast<unsigned long>(special),
                BigInt(static_cast<unsigned long>(population)));
  g.canonicalize();
  return g;
}

BigRational hyp_pmf(const HypergeometricParams& p, std::uint64_t k) {
  if (k > p.support_max() || k < p.support_min()) return 0;
  BigRational out(binomial(p.special, k) * binomial(p.population - p.special, p.draws - k),
                  binomial(p.population, p.draws));
  out.canonicalize();
  return out;
}

std::vector<BigRational> hyp_pmf_table(const HypergeometricParams& p) {
  const BigInt total = binomial(p.population, p.draws);
  std::vector<BigRational> table(p.support_max() + 1, BigRational(0));
  for (std::uint64_t k = p.support_min(); k <= p.support_max(); ++k) {
    table[k] = BigRational(binomial(p.special, k) * binomial(p.population - p.special, p.draws - k), total);
    table[k].canonicalize();
  }
  return table;
}

BigRational hyp_moment(const HypergeometricParams& p, unsigned j) {
  const auto table = hyp_pmf_table(p);
  BigRational acc = 0;
  for (std::size_t k = 1; k < table.size(); ++k) {
    BigInt kj;
    mpz_ui_pow_ui(kj.get_mpz_t(), k, j);
    acc += table[k] * kj;
  }
  return acc;
}

BigRational hyp_zero_prob(const HypergeometricParams& p) {
  BigRational product = 1;
  for (std::uint64_t i = 0; i < p.draws; ++i) {
    // 1 - n/(N-i) = (N - i - n)/(N - i); N - i >= 1 because i < m <= N.
    const std::int64_t numer = static_cast<std::int64_t>(p.population - i) - static_cast<std::int64_t>(p.special);
    if (numer == 0) return 0;
    if (numer < 0) throw std::domain_error("negative draw factor before the support boundary");
    BigRational factor(static_cast<long>(numer), static_cast<unsigned long>(p.population - i));
    factor.canonicalize();
    product *= factor;
  }
  return product;
}

BoundReport check_tail_bound(const HypergeometricParams& p, double t) {
  if (!(t > 0)) throw std::invalid_argument("tail offset must be positive");
  const BigRational gamma = p.mean();
  const BigRational threshold = gamma + BigRational(t);
  BigInt tail = 0;
  for (std::uint64_t k = p.support_min(); k <= p.support_max(); ++k) {
    if (BigRational(static_cast<unsigned long>(k)) >= threshold)
      tail += binomial(p.special, k) * binomial(p.population - p.special, p.draws - k);
  }
  BoundReport r;
  r.lhs = tail == 0 ? 0.0 : BigRational(tail, binomial(p.population, p.draws)).get_d();
  const double g = gamma.get_d();
  r.rhs = std::exp(-t * t / (2.0 * g + t));
  r.holds = r.lhs <= r.rhs + kFloatSlack;
  return r;
}

BoundReport check_moment_bound(const HypergeometricParams& p, unsigned k) {
  if (k == 0) throw std::invalid_argument("moment order must be positive");
  BoundReport r;
  r.lhs = hyp_moment(p, k).get_d();
  const double g = p.mean().get_d();
  r.rhs = std::pow(3.0, k - 1) * (std::tgamma(k + 1.0) * std::pow(g + 1.0, k) + std::pow(g, k) + 1.0);
  r.holds = leq_slack(r.lhs, r.rhs);
  return r;
}

ZeroProbReport check_lemma3(const HypergeometricParams& p) {
  ZeroProbReport r;
  const BigRational p0 = hyp_zero_prob(p);
  r.p0 = p0.get_d();
  r.p_positive = BigRational(1 - p0).get_d();
  const double N = static_cast<double>(p.population);
  const double mn = static_cast<double>(p.draws) * static_cast<double>(p.special);
  const double x = p.population == 0 ? 0.0 : mn / N;
  r.upper = std::exp(-x);
  r.lower_applicable = p.draws + p.special < p.population + 1;  // m + n - 1 < N
  if (r.lower_applicable) {
    const double denom = N - static_cast<double>(p.draws) - static_cast<double>(p.special) + 1.0;
    r.lower = std::exp(-mn / denom);
  }
  r.p_positive_upper = x;
  r.p_positive_middle = -std::expm1(-x);
  r.p_positive_lower = x - x * x / 2.0;
  r.holds = leq_slack(r.p0, r.upper) && (!r.lower_applicable || leq_slack(r.lower, r.p0)) &&
            leq_slack(r.p_positive_lower, r.p_positive_middle) && leq_slack(r.p_positive_middle, r.p_positive) &&
            leq_slack(r.p_positive, r.p_positive_upper);
  return r;
}

double one_minus_exp_one_plus(double x) {
  if (x < 1e-4) {
    // Alternating series sum_{k>=2} (-1)^k (k-1) x^k / k!
    return x * x * (0.5 - x * (1.0 / 3.0 - x * (1.0 / 8.0 - x / 30.0)));
  }
  return -std::expm1(-x) - x * std::exp(-x);
}

PsiReport check_lemma4(double x) {
  if (!(x >= 0)) throw std::invalid_argument("lemma 4 needs x >= 0");
  PsiReport r;
  r.lower = std::min(x * x, 1.0) / 4.0;
  r.middle = one_minus_exp_one_plus(x);
  r.upper = std::min(x * x, 2.0) / 2.0;
  r.holds = r.lower <= r.middle + kFloatSlack && r.middle <= r.upper + kFloatSlack;
  return r;
}

double phi(double x) {
  if (!(x >= 0)) throw std::invalid_argument("phi needs x >= 0");
  return std::exp(-x) * one_minus_exp_one_plus(x);
}

}  // namespace steinkit
