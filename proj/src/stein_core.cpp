#include "steinkit/stein_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace steinkit {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("normal_quantile needs p in [0,1]");
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

// ---------------------------------------------------------------------------

DiscreteLaw DiscreteLaw::from_weights(std::vector<Atom> weighted) {
  std::sort(weighted.begin(), weighted.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  DiscreteLaw law;
  BigRational total = 0;
  for (auto& atom : weighted) {
    if (atom.prob < 0) throw std::invalid_argument("negative probability in discrete law");
    total += atom.prob;
    if (atom.prob == 0) continue;
    if (!law.atoms_.empty() && law.atoms_.back().value == atom.value)
      law.atoms_.back().prob += atom.prob;
    else
      law.atoms_.push_back(std::move(atom));
  }
  if (total != 1) throw std::invalid_argument("discrete law mass is " + total.get_str() + ", not 1");
  return law;
}

BigRational DiscreteLaw::expectation(const std::function<BigRational(const BigRational&)>& f) const {
  BigRational acc = 0;
  for (const auto& atom : atoms_) acc += atom.prob * f(atom.value);
  return acc;
}

BigRational DiscreteLaw::moment(unsigned k) const {
  BigRational acc = 0;
  for (const auto& atom : atoms_) acc += atom.prob * pow(atom.value, k);
  return acc;
}

BigRational DiscreteLaw::variance() const {
  const BigRational mu = mean();
  return moment(2) - mu * mu;
}

double kolmogorov_distance(std::vector<RealAtom> atoms) {
  std::sort(atoms.begin(), atoms.end(), [](const RealAtom& a, const RealAtom& b) { return a.value < b.value; });
  double cumulative = 0.0;
  double sup = 0.0;
  std::size_t i = 0;
  while (i < atoms.size()) {
    const double v = atoms[i].value;
    const double left = cumulative;
    while (i < atoms.size() && atoms[i].value == v) cumulative += atoms[i++].prob;
    const double phi = normal_cdf(v);
    sup = std::max({sup, std::abs(left - phi), std::abs(cumulative - phi)});
  }
  return sup;
}

// ---------------------------------------------------------------------------

double dkw_band(std::size_t samples, double confidence) {
  if (samples == 0) throw std::invalid_argument("dkw band needs samples");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0,1)");
  return std::sqrt(std::log(2.0 / confidence) / (2.0 * static_cast<double>(samples)));
}

KolmogorovEstimate empirical_kolmogorov(std::span<const double> sorted, double confidence) {
  if (sorted.size() < 100) throw std::invalid_argument("empirical_kolmogorov needs at least 100 samples");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw std::invalid_argument("samples must be sorted");
  const auto k = static_cast<double>(sorted.size());
  KolmogorovEstimate est;
  est.samples = sorted.size();
  est.dkw_band = dkw_band(sorted.size(), confidence);
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double v = sorted[i];
    const double left = static_cast<double>(i) / k;
    while (i < sorted.size() && sorted[i] == v) ++i;
    const double right = static_cast<double>(i) / k;
    const double phi = normal_cdf(v);
    est.delta_hat = std::max({est.delta_hat, std::abs(left - phi), std::abs(right - phi)});
  }
  return est;
}

namespace {

// int_l^h |x - z| phi(z) dz with mass_lh = Phi(h) - Phi(l) supplied by the caller.
double abs_deviation_integral(double x, double l, double h, double mass_lh) {
  auto pdf = [](double z) { return std::isfinite(z) ? normal_pdf(z) : 0.0; };
  if (x <= l) return (pdf(l) - pdf(h)) - x * mass_lh;
  if (x >= h) return x * mass_lh - (pdf(l) - pdf(h));
  const double phi_x = normal_cdf(x);
  const double phi_l = std::isfinite(l) ? normal_cdf(l) : 0.0;
  const double phi_h = std::isfinite(h) ? normal_cdf(h) : 1.0;
  const double below = x * (phi_x - phi_l) - (pdf(l) - pdf(x));
  const double above = (pdf(x) - pdf(h)) - x * (phi_h - phi_x);
  return below + above;
}

}  // namespace

double wasserstein_to_normal(std::span<const double> sorted) {
  if (sorted.empty()) throw std::invalid_argument("wasserstein_to_normal needs samples");
  if (!std::is_sorted(sorted.begin(), sorted.end())) throw std::invalid_argument("samples must be sorted");
  const auto k = static_cast<double>(sorted.size());
  double total = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double hi = normal_quantile(static_cast<double>(i + 1) / k);
    total += abs_deviation_integral(sorted[i], lo, hi, 1.0 / k);
    lo = hi;
  }
  return total;
}

double wasserstein_to_normal(std::vector<RealAtom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("wasserstein_to_normal needs atoms");
  std::sort(atoms.begin(), atoms.end(), [](const RealAtom& a, const RealAtom& b) { return a.value < b.value; });
  double total = 0.0;
  double cumulative = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (atoms[i].prob <= 0.0) continue;
    cumulative += atoms[i].prob;
    const double hi = i + 1 == atoms.size() ? std::numeric_limits<double>::infinity()
                                            : normal_quantile(std::min(cumulative, 1.0));
    total += abs_deviation_integral(atoms[i].value, lo, hi, atoms[i].prob);
    lo = hi;
  }
  return total;
}

// ---------------------------------------------------------------------------

RecursionSpec::RecursionSpec(double q, double c) : q(q), c(c) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("recursion needs 0 < q < 1");
  if (!(c > 0.0)) throw std::invalid_argument("recursion needs c > 0");
}

double recursion_closed_form(const RecursionSpec& spec, unsigned n) {
  if (n == 0) throw std::invalid_argument("recursion index starts at 1");
  // extended precision so the result is within half an ulp
  const long double q = spec.q;
  const long double qn = std::pow(q, static_cast<long double>(n - 1));
  return static_cast<double>(qn + spec.c * (1.0L - qn) / (1.0L - q));
}

RecursionSolution recursion_bound_solve(const FiniteKernel& kernel, const RecursionSpec& spec) {
  RecursionSolution out;
  const std::size_t states = kernel.size();
  out.ceiling = spec.c / (1.0 - spec.q);
  if (kernel.smiley.size() != states || kernel.rate.size() != states) {
    out.refused = true;
    out.diagnostic = "kernel arrays disagree in size";
    return out;
  }
  for (std::size_t s = 0; s < states; ++s) {
    double ex = 0.0;
    for (const auto& t : kernel.transitions[s]) {
      if (t.successor >= states || t.prob < 0.0 || t.x < 0.0) {
        out.refused = true;
        out.diagnostic = "malformed transition at state " + std::to_string(s);
        return out;
      }
      ex += t.prob * t.x;
    }
    const double want = kernel.smiley[s] ? 1.0 : 0.0;
    if (std::abs(ex - want) > 1e-12) {
      out.refused = true;
      out.diagnostic = std::string(kernel.smiley[s] ? "(A1)" : "(A2)") + " fails at state " + std::to_string(s) +
                       ": E X = " + std::to_string(ex);
      return out;
    }
    if (!kernel.smiley[s]) continue;
    const double cap = kernel.rate[s] / (2.0 * spec.q);
    for (const auto& t : kernel.transitions[s]) {
      if (t.prob > 0.0 && t.x > 0.0 && kernel.rate[t.successor] > cap * (1.0 + 1e-12)) {
        out.refused = true;
        out.diagnostic = "(A4) growth fails at state " + std::to_string(s) + " -> " + std::to_string(t.successor);
        return out;
      }
    }
  }

  std::vector<double> a(states, out.ceiling + 1.0), next(states);
  for (out.iterations = 0; out.iterations < 1'000'000; ++out.iterations) {
    double change = 0.0;
    for (std::size_t s = 0; s < states; ++s) {
      double acc = 0.0;
      for (const auto& t : kernel.transitions[s]) acc += t.prob * t.x * a[t.successor];
      next[s] = spec.q * acc + spec.c;
      change = std::max(change, std::abs(next[s] - a[s]));
    }
    a.swap(next);
    if (change < 1e-12) break;
  }
  out.a = a;
  out.sup = a.empty() ? 0.0 : *std::max_element(a.begin(), a.end());
  out.sup_ok = out.sup <= out.ceiling + 1e-9;
  out.a_below_rate = true;
  for (std::size_t s = 0; s < states; ++s)
    if (kernel.smiley[s] && a[s] > kernel.rate[s]) out.a_below_rate = false;
  return out;
}

// ---------------------------------------------------------------------------

SteinPairReport check_stein_pair(std::span<const PairAtom> joint, const BigRational& lambda) {
  if (lambda <= 0 || lambda > 1) throw std::invalid_argument("stein pair needs lambda in (0,1]");
  std::map<std::pair<BigRational, BigRational>, BigRational> cells;
  std::map<BigRational, BigRational> marginal;
  std::map<BigRational, BigRational> regression;
  BigRational total = 0;
  for (const auto& atom : joint) {
    cells[{atom.w, atom.w_prime}] += atom.prob;
    marginal[atom.w] += atom.prob;
    regression[atom.w] += atom.prob * atom.w_prime;
    total += atom.prob;
  }
  if (total != 1) throw std::invalid_argument("joint law mass is not 1");

  SteinPairReport r;
  r.exchangeable = std::all_of(cells.begin(), cells.end(), [&](const auto& cell) {
    auto it = cells.find({cell.first.second, cell.first.first});
    return it != cells.end() ? it->second == cell.second : cell.second == 0;
  });
  r.linear_regression = std::all_of(marginal.begin(), marginal.end(), [&](const auto& m) {
    return regression[m.first] == (1 - lambda) * m.first * m.second;
  });
  r.stein_identity = true;
  for (unsigned k = 1; k <= 3; ++k) {
    BigRational lhs = 0, rhs = 0;
    for (const auto& [key, p] : cells) {
      const auto& [w, wp] = key;
      const BigRational g = (wp - w) / (2 * lambda);
      lhs += p * g * (pow(wp, k) - pow(w, k));
      rhs += p * w * pow(w, k);
    }
    r.stein_identity = r.stein_identity && lhs == rhs;
  }
  r.is_stein_pair = r.exchangeable && r.linear_regression;
  return r;
}

UniformLaw zero_bias_two_point(const BigRational& a, const BigRational& b) {
  if (!(a > 0 && b < 0)) throw std::invalid_argument("two-point zero bias needs a > 0 > b");
  return UniformLaw{b, a};
}

UniformLaw zero_bias_two_point(const DiscreteLaw& law) {
  if (law.atoms().size() != 2) throw std::invalid_argument("law is not two-point");
  if (law.mean() != 0) throw std::invalid_argument("two-point law is not mean zero");
  return zero_bias_two_point(law.atoms()[1].value, law.atoms()[0].value);
}

bool zero_bias_identity_holds(const DiscreteLaw& law, const UniformLaw& zb, const Polynomial& f) {
  const BigRational lhs = law.expectation([&](const BigRational& w) { return BigRational(w * f(w)); });
  // E f'(U) for U uniform on (lo, hi) is the divided difference of f.
  const BigRational mean_derivative = (f(zb.hi) - f(zb.lo)) / (zb.hi - zb.lo);
  return lhs == law.variance() * mean_derivative;
}

DiscreteLaw size_bias_law(const DiscreteLaw& law) {
  const BigRational mu = law.mean();
  if (mu <= 0) throw std::invalid_argument("size bias needs a positive mean");
  std::vector<Atom> tilted;
  for (const auto& atom : law.atoms()) {
    if (atom.value < 0) throw std::invalid_argument("size bias needs a nonnegative law");
    tilted.push_back({atom.value, atom.value * atom.prob / mu});
  }
  return DiscreteLaw::from_weights(std::move(tilted));
}

SizeBiasReport check_size_bias(const DiscreteLaw& law, const DiscreteLaw& coupled) {
  const BigRational mu = law.mean();
  if (mu <= 0) throw std::invalid_argument("size bias needs a positive mean");
  auto identity = [&](const std::function<BigRational(const BigRational&)>& f) {
    const BigRational lhs = law.expectation([&](const BigRational& y) { return BigRational(y * f(y)); });
    return lhs == mu * coupled.expectation(f);
  };
  SizeBiasReport r;
  r.identity_x = identity([](const BigRational& y) { return y; });
  r.identity_x2 = identity([](const BigRational& y) { return BigRational(y * y); });
  r.identity_indicators = true;
  std::vector<BigRational> cuts;
  for (const auto& a : law.atoms()) cuts.push_back(a.value);
  for (const auto& a : coupled.atoms()) cuts.push_back(a.value);
  for (const auto& t : cuts)
    r.identity_indicators = r.identity_indicators && identity([&](const BigRational& y) {
                              return y <= t ? BigRational(1) : BigRational(0);
                            });
  r.stein_reduction = true;
  for (unsigned k = 1; k <= 3; ++k) {
    const BigRational lhs = mu * (coupled.expectation([&](const BigRational& y) { return pow(y - mu, k); }) -
                                  law.expectation([&](const BigRational& y) { return pow(y - mu, k); }));
    const BigRational rhs = law.expectation([&](const BigRational& y) { return pow(y - mu, k + 1); });
    r.stein_reduction = r.stein_reduction && lhs == rhs;
  }
  r.holds = r.identity_x && r.identity_x2 && r.identity_indicators && r.stein_reduction;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<Permutation> all_permutations(unsigned N) {
  Permutation p(N);
  std::iota(p.begin(), p.end(), std::uint64_t{1});
  std::vector<Permutation> out;
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

EfronSteinReport check_efron_stein(const PermutationFunction& h, unsigned N, unsigned n_sigma) {
  if (N < 2) throw std::invalid_argument("efron-stein check needs N >= 2");
  const auto perms = all_permutations(N);
  const std::size_t P = perms.size();
  double states_d = std::pow(static_cast<double>(P), n_sigma + 1.0);
  if (states_d > 2e6) throw std::invalid_argument("efron-stein state space too large");
  const std::size_t blocks = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(P), n_sigma)));
  const std::size_t states = P * blocks;

  std::map<Permutation, std::size_t> rank;
  for (std::size_t i = 0; i < P; ++i) rank[perms[i]] = i;

  // swap_to[p][j][t]: rank of pi tau for tau = (j t), 1 <= j <= t <= N
  std::vector<std::vector<std::vector<std::size_t>>> swap_to(P, std::vector<std::vector<std::size_t>>(N + 1));
  for (std::size_t p = 0; p < P; ++p)
    for (unsigned j = 1; j < N; ++j) {
      swap_to[p][j].assign(N + 1, 0);
      for (unsigned t = j; t <= N; ++t) {
        Permutation q = perms[p];
        std::swap(q[j - 1], q[t - 1]);
        swap_to[p][j][t] = rank.at(q);
      }
    }

  // Evaluate h once per state, then scale to a common integer denominator.
  std::vector<BigRational> values(states);
  std::vector<Permutation> sigma(n_sigma);
  for (std::size_t state = 0; state < states; ++state) {
    std::size_t rest = state % blocks;
    for (unsigned i = n_sigma; i > 0; --i) {
      sigma[i - 1] = perms[rest % P];
      rest /= P;
    }
    values[state] = h(perms[state / blocks], sigma);
  }
  BigInt denom = 1;
  for (const auto& v : values) mpz_lcm(denom.get_mpz_t(), denom.get_mpz_t(), v.get_den_mpz_t());
  std::vector<BigInt> H(states);
  for (std::size_t s = 0; s < states; ++s) H[s] = values[s].get_num() * (denom / values[s].get_den());

  BigInt sum = 0, sum_sq = 0;
  for (const auto& v : H) {
    sum += v;
    sum_sq += v * v;
  }

  // Sigma resampling: replace coordinate i by each of the P permutations.
  BigInt sigma_sum = 0;
  std::vector<std::size_t> stride(n_sigma, 1);
  for (unsigned i = n_sigma; i > 1; --i) stride[i - 2] = stride[i - 1] * P;
  for (std::size_t state = 0; state < states; ++state) {
    const std::size_t within = state % blocks;
    for (unsigned i = 0; i < n_sigma; ++i) {
      const std::size_t digit = (within / stride[i]) % P;
      const std::size_t base = state - digit * stride[i];
      for (std::size_t alt = 0; alt < P; ++alt) {
        const BigInt d = H[state] - H[base + alt * stride[i]];
        sigma_sum += d * d;
      }
    }
  }

  // Transpositions tau_j = (j t), t uniform on {j..N}.
  BigRational trans = 0;
  for (unsigned j = 1; j < N; ++j) {
    BigInt sj = 0;
    for (std::size_t state = 0; state < states; ++state) {
      const std::size_t p = state / blocks;
      const std::size_t within = state % blocks;
      for (unsigned t = j; t <= N; ++t) {
        const BigInt d = H[state] - H[swap_to[p][j][t] * blocks + within];
        sj += d * d;
      }
    }
    trans += rational(sj, BigInt(static_cast<unsigned long>(N - j + 1)));
  }

  const BigInt S(static_cast<unsigned long>(states));
  const BigInt D2 = denom * denom;
  EfronSteinReport r;
  r.variance = rational(S * sum_sq - sum * sum, S * S * D2);
  r.sigma_term = rational(sigma_sum, 2 * S * static_cast<unsigned long>(P) * D2);
  r.transposition_term = trans / (2 * S * D2);
  r.bound = r.sigma_term + r.transposition_term;
  r.holds = r.variance <= r.bound;
  return r;
}

}  // namespace steinkit
