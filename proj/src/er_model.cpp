#include "steinkit/er_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <tuple>

namespace steinkit {

namespace {

// Calls f(c) for every k-subset c of {0..n-1}, in lexicographic order.
template <class F>
void for_each_combination(std::uint64_t n, std::uint64_t k, F&& f) {
  if (k > n) return;
  std::vector<std::uint64_t> c(k);
  for (std::uint64_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    f(static_cast<const std::vector<std::uint64_t>&>(c));
    std::int64_t i = static_cast<std::int64_t>(k) - 1;
    while (i >= 0 && c[i] == n - k + static_cast<std::uint64_t>(i)) --i;
    if (i < 0) return;
    ++c[i];
    for (std::uint64_t j = static_cast<std::uint64_t>(i) + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

BigRational ratio(const BigInt& num, const BigInt& den) {
  BigRational q(num, den);
  q.canonicalize();
  return q;
}

constexpr double kEnumerationLimit = 5e6;

}  // namespace

ErParams::ErParams(std::uint64_t n, std::uint64_t m) : n(n), m(m) {
  if (n < 3) throw std::invalid_argument("ER parameters need n >= 3");
  if (m == 0 || m >= n * (n - 1) / 2) throw std::invalid_argument("ER parameters need 0 < m < n(n-1)/2");
}

std::uint64_t edge_index(std::uint64_t v, std::uint64_t w, std::uint64_t n) {
  if (v > w) std::swap(v, w);
  if (v < 1 || v == w || w > n) throw std::out_of_range("edge_index needs 1 <= v < w <= n");
  return (v - 1) * (2 * n - v) / 2 + (w - v);
}

std::pair<std::uint64_t, std::uint64_t> slot_to_pair(std::uint64_t slot, std::uint64_t n) {
  if (slot < 1 || slot > n * (n - 1) / 2) throw std::out_of_range("slot out of range");
  std::uint64_t v = 1;
  std::uint64_t before = 0;  // slots used by rows < v
  while (slot > before + (n - v)) {
    before += n - v;
    ++v;
  }
  return {v, v + (slot - before)};
}

SlotTable::SlotTable(std::uint64_t n) : n_(n), pairs_(n * (n - 1) / 2 + 1) {
  std::uint64_t slot = 1;
  for (std::uint64_t v = 1; v < n; ++v)
    for (std::uint64_t w = v + 1; w <= n; ++w)
      pairs_[slot++] = {static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(w)};
}

// ---------------------------------------------------------------------------

ErGraphState::ErGraphState(const ErParams& params)
    : params_(params),
      table_(std::make_shared<const SlotTable>(params.n)),
      is_edge_(params.slots() + 1, 0),
      degree_(params.n + 1, 0),
      isolated_(params.n) {
  edges_.reserve(params.m);
}

ErGraphState ErGraphState::from_permutation(const ErParams& params, std::span<const std::uint64_t> perm) {
  if (perm.size() < params.m) throw std::invalid_argument("permutation shorter than m");
  ErGraphState g(params);
  g.assign(perm.first(params.m));
  return g;
}

void ErGraphState::clear() {
  for (auto s : edges_) {
    is_edge_[s] = 0;
    const auto [a, b] = (*table_)[s];
    degree_[a] = 0;
    degree_[b] = 0;
  }
  edges_.clear();
  isolated_ = params_.n;
}

void ErGraphState::add(std::uint64_t slot) {
  if (slot < 1 || slot > params_.slots()) throw std::out_of_range("edge slot out of range");
  if (is_edge_[slot]) throw std::invalid_argument("slot repeated in permutation prefix");
  is_edge_[slot] = 1;
  edges_.push_back(slot);
  const auto [a, b] = (*table_)[slot];
  if (degree_[a]++ == 0) --isolated_;
  if (degree_[b]++ == 0) --isolated_;
}

void ErGraphState::assign(std::span<const std::uint64_t> slots) {
  if (slots.size() != params_.m) throw std::invalid_argument("graph needs exactly m edges");
  clear();
  for (auto s : slots) add(s);
}

std::vector<std::uint64_t> ErGraphState::neighbors(std::uint64_t v) const {
  std::vector<std::uint64_t> out;
  for (auto s : edges_) {
    const auto [a, b] = (*table_)[s];
    if (a == v) out.push_back(b);
    if (b == v) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t isolated_count(const ErGraphState& graph) { return graph.isolated(); }

// ---------------------------------------------------------------------------

ErMoments exact_moments(const ErParams& p) {
  const std::uint64_t N = p.slots();
  const BigInt total = binomial(N, p.m);
  const BigInt one = N + 1 >= p.n ? binomial(N - p.n + 1, p.m) : BigInt(0);
  const BigInt two = N + 3 >= 2 * p.n ? binomial(N + 3 - 2 * p.n, p.m) : BigInt(0);
  ErMoments out;
  out.mu = ratio(one * static_cast<unsigned long>(p.n), total);
  out.sigma2 = out.mu + ratio(two * static_cast<unsigned long>(p.n * (p.n - 1)), total) - out.mu * out.mu;
  return out;
}

ApproxMoments asymptotic_moments(const ErParams& p) {
  const double n = static_cast<double>(p.n);
  const double x = 2.0 * static_cast<double>(p.m) / n;
  return {n * std::exp(-x), n * phi(x)};
}

double rate(const ErParams& p, const ErMoments& moments) {
  if (moments.sigma2 == 0) return 0.0;
  const double sigma2 = moments.sigma2.get_d();
  const double ratio_mn = static_cast<double>(p.m) / static_cast<double>(p.n);
  return sigma2 * std::sqrt(sigma2) / (moments.mu.get_d() * (1.0 + ratio_mn * ratio_mn));
}

double rate(const ErParams& p) { return rate(p, exact_moments(p)); }

bool smiley_membership(const ErParams& p, const SmileyThresholds& t) {
  if (!(t.n_bar > 0 && t.m_bar > 0 && t.c_bar > 0)) throw std::invalid_argument("thresholds must be positive");
  const double n = static_cast<double>(p.n);
  const double m = static_cast<double>(p.m);
  return n >= t.n_bar && m >= t.m_bar && m <= t.c_bar * std::pow(n, 1.5);
}

// ---------------------------------------------------------------------------

namespace {

template <class NextSlot>
RedistributionResult redistribute_impl(const ErGraphState& g, std::uint64_t v, NextSlot&& next_slot) {
  const ErParams& p = g.params();
  if (v < 1 || v > p.n) throw std::out_of_range("vertex out of range");
  if (p.m > (p.n - 1) * (p.n - 2) / 2)
    throw std::domain_error("redistribution cannot terminate: m exceeds C(n-1, 2)");
  const SlotTable& table = g.table();
  RedistributionResult r;
  r.coupled_degrees.assign(g.degrees().begin(), g.degrees().end());
  const auto nbrs = g.neighbors(v);
  for (auto w : nbrs) --r.coupled_degrees[w];
  r.coupled_degrees[v] = 0;

  const std::uint64_t d = g.degree(v);
  const std::uint64_t N = p.slots();
  r.relocated_slots.reserve(d);
  while (r.relocated_slots.size() < d) {
    if (r.candidates_scanned >= N) throw std::logic_error("candidate stream exhausted before relocation finished");
    const std::uint64_t s = next_slot();
    ++r.candidates_scanned;
    const auto [a, b] = table[s];
    if (a == v || b == v || g.is_edge(s)) continue;
    r.relocated_slots.push_back(s);
    ++r.coupled_degrees[a];
    ++r.coupled_degrees[b];
    r.receiving_vertices.push_back(a);
    r.receiving_vertices.push_back(b);
  }
  std::sort(r.receiving_vertices.begin(), r.receiving_vertices.end());
  r.receiving_vertices.erase(std::unique(r.receiving_vertices.begin(), r.receiving_vertices.end()),
                             r.receiving_vertices.end());
  std::set_difference(nbrs.begin(), nbrs.end(), r.receiving_vertices.begin(), r.receiving_vertices.end(),
                      std::back_inserter(r.lost_neighbors));
  for (std::uint64_t w = 1; w <= p.n; ++w)
    if (w != v && r.coupled_degrees[w] == 0) ++r.coupled_isolated;
  r.b_v = static_cast<std::int64_t>(g.isolated()) - static_cast<std::int64_t>(r.coupled_isolated);
  return r;
}

}  // namespace

RedistributionResult redistribute(const ErGraphState& graph, std::uint64_t v, std::span<const std::uint64_t> sigma_v) {
  std::size_t i = 0;
  return redistribute_impl(graph, v, [&]() {
    if (i >= sigma_v.size()) throw std::logic_error("sigma_v exhausted");
    return sigma_v[i++];
  });
}

RedistributionResult redistribute(const ErGraphState& graph, std::uint64_t v, LazyPermutation& sigma, Rng& rng) {
  if (sigma.size() != graph.params().slots() || sigma.drawn() != 0)
    throw std::invalid_argument("sigma workspace must be freshly reset to N");
  return redistribute_impl(graph, v, [&]() { return sigma.next(rng); });
}

std::int64_t b_v_decomposition(const ErGraphState& g, std::uint64_t v, const RedistributionResult& r) {
  std::int64_t total = g.degree(v) == 0 ? 1 : 0;
  for (auto w : r.receiving_vertices) total += g.degree(w) == 0 ? 1 : 0;
  for (auto w : r.lost_neighbors) total -= g.degree(w) == 1 ? 1 : 0;
  if (total != r.b_v) throw std::logic_error("b_v decomposition disagrees with the direct recount");
  return total;
}

// ---------------------------------------------------------------------------

ErSampler::ErSampler(const ErParams& params)
    : params_(params),
      moments_(exact_moments(params)),
      mu_(moments_.mu.get_d()),
      sigma_(std::sqrt(moments_.sigma2.get_d())),
      graph_(params),
      pi_(params.slots()),
      candidates_(params.slots()),
      prefix_(params.m) {}

const ErGraphState& ErSampler::sample_graph(Rng& rng) {
  pi_.reset(params_.slots());
  for (auto& s : prefix_) s = pi_.next(rng);
  graph_.assign(prefix_);
  return graph_;
}

ErCouplingSample ErSampler::coupling_sample(Rng& rng) {
  if (sigma_ == 0.0) throw std::domain_error("sigma = 0: coupling is degenerate");
  sample_graph(rng);
  ErCouplingSample out;
  out.chosen_vertex = 1 + rng.below(params_.n);
  out.chosen_degree = graph_.degree(out.chosen_vertex);
  candidates_.reset(params_.slots());
  const auto r = redistribute(graph_, out.chosen_vertex, candidates_, rng);
  const double indicator = out.chosen_degree == 0 ? 1.0 : 0.0;
  const double n = static_cast<double>(params_.n);
  out.y = graph_.isolated();
  out.y_prime = r.coupled_isolated;
  out.g = (mu_ - n * indicator) / sigma_;
  out.w = (static_cast<double>(out.y) - mu_) / sigma_;
  out.w_prime = (static_cast<double>(out.y_prime) - mu_) / sigma_;
  out.d = (static_cast<double>(out.y_prime) - static_cast<double>(out.y)) / sigma_;
  return out;
}

double ErSampler::conditional_gd(Rng& rng) {
  if (sigma_ == 0.0) throw std::domain_error("sigma = 0: coupling is degenerate");
  sample_graph(rng);
  const double n = static_cast<double>(params_.n);
  double acc = 0.0;
  for (std::uint64_t v = 1; v <= params_.n; ++v) {
    candidates_.reset(params_.slots());
    const auto r = redistribute(graph_, v, candidates_, rng);
    const double indicator = graph_.degree(v) == 0 ? 1.0 : 0.0;
    acc += (mu_ - n * indicator) * static_cast<double>(-r.b_v);
  }
  return acc / (n * sigma_ * sigma_);
}

ErGraphState sample_graph(const ErParams& params, Rng& rng) {
  ErSampler sampler(params);
  return sampler.sample_graph(rng);
}

ErCouplingSample coupling_sample(const ErParams& params, Rng& rng) {
  ErSampler sampler(params);
  return sampler.coupling_sample(rng);
}

double d_bar(std::uint64_t chosen_degree, double sigma) {
  return (1.0 + 2.0 * static_cast<double>(chosen_degree)) / sigma;
}

// ---------------------------------------------------------------------------

namespace {

// For every (edge set, v) calls visit(graph, v, hist, subsets) where hist[y']
// counts the relocated d_v-subsets producing Y^v = y'.
template <class Visit>
std::uint64_t enumerate_couplings(const ErParams& p, Visit&& visit) {
  if (p.m > (p.n - 1) * (p.n - 2) / 2) throw std::domain_error("m exceeds C(n-1, 2)");
  if (binomial(p.slots(), p.m).get_d() * static_cast<double>(p.n) > kEnumerationLimit)
    throw std::invalid_argument("exhaustive coupling enumeration is infeasible here");
  const std::uint64_t N = p.slots();
  ErGraphState g(p);
  const SlotTable& table = g.table();
  std::vector<std::uint64_t> slots(p.m), eligible, base, coupled;
  std::vector<std::uint64_t> hist(p.n + 1);
  std::uint64_t states = 0;
  for_each_combination(N, p.m, [&](const std::vector<std::uint64_t>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) slots[i] = c[i] + 1;
    g.assign(slots);
    for (std::uint64_t v = 1; v <= p.n; ++v) {
      eligible.clear();
      for (std::uint64_t s = 1; s <= N; ++s) {
        const auto [a, b] = table[s];
        if (a != v && b != v && !g.is_edge(s)) eligible.push_back(s);
      }
      base.assign(g.degrees().begin(), g.degrees().end());
      for (auto w : g.neighbors(v)) --base[w];
      base[v] = 0;
      std::fill(hist.begin(), hist.end(), 0);
      const std::uint64_t d = g.degree(v);
      for_each_combination(eligible.size(), d, [&](const std::vector<std::uint64_t>& pick) {
        coupled = base;
        for (auto idx : pick) {
          const auto [a, b] = table[eligible[idx]];
          ++coupled[a];
          ++coupled[b];
        }
        std::uint64_t y = 0;
        for (std::uint64_t w = 1; w <= p.n; ++w)
          if (w != v && coupled[w] == 0) ++y;
        ++hist[y];
        if (++states > kEnumerationLimit) throw std::invalid_argument("exhaustive coupling enumeration is infeasible here");
      });
      visit(g, v, hist, binomial(eligible.size(), d));
    }
  });
  return states;
}

}  // namespace

SteinIdentityReport check_stein_identity_exhaustive(const ErParams& p, const Polynomial& f) {
  SteinIdentityReport rep;
  const ErMoments mom = exact_moments(p);
  if (mom.sigma2 == 0) {
    rep.degenerate = true;
    return rep;
  }
  const unsigned degree = f.degree();
  if (degree > 4) throw std::invalid_argument("Stein identity check takes polynomials of degree <= 4");

  // Weight of each (I_V, Y, Y') triple, before dividing by n C(N, m).
  std::map<std::tuple<int, std::uint64_t, std::uint64_t>, BigRational> weight;
  rep.states = enumerate_couplings(p, [&](const ErGraphState& g, std::uint64_t v, const std::vector<std::uint64_t>& hist,
                                          const BigInt& subsets) {
    const int indicator = g.degree(v) == 0 ? 1 : 0;
    for (std::uint64_t y = 0; y < hist.size(); ++y)
      if (hist[y] != 0) weight[{indicator, g.isolated(), y}] += ratio(BigInt(static_cast<unsigned long>(hist[y])), subsets);
  });
  const BigRational scale = ratio(1, binomial(p.slots(), p.m) * static_cast<unsigned long>(p.n));

  const BigRational& mu = mom.mu;
  const BigRational n(static_cast<unsigned long>(p.n));
  rep.lhs_y.assign(degree + 1, BigRational(0));
  rep.rhs_y.assign(degree + 1, BigRational(0));
  for (const auto& [key, w] : weight) {
    const auto& [indicator, y, y_prime] = key;
    const BigRational g_tilde = mu - n * indicator;
    const BigRational centered(BigRational(static_cast<unsigned long>(y)) - mu);
    const BigRational centered_prime(BigRational(static_cast<unsigned long>(y_prime)) - mu);
    for (unsigned k = 0; k <= degree; ++k) {
      rep.lhs_y[k] += w * g_tilde * (pow(centered_prime, k) - pow(centered, k));
      rep.rhs_y[k] += w * pow(centered, k + 1);
    }
  }
  rep.equal = true;
  const double sigma = std::sqrt(mom.sigma2.get_d());
  for (unsigned k = 0; k <= degree; ++k) {
    rep.lhs_y[k] *= scale;
    rep.rhs_y[k] *= scale;
    rep.equal = rep.equal && rep.lhs_y[k] == rep.rhs_y[k];
    const double coeff = k < f.coeffs.size() ? f.coeffs[k].get_d() : 0.0;
    const double norm = std::pow(sigma, static_cast<double>(k + 1));
    rep.lhs += coeff * rep.lhs_y[k].get_d() / norm;
    rep.rhs += coeff * rep.rhs_y[k].get_d() / norm;
  }
  return rep;
}

GdVarianceExact gd_conditional_variance_exact(const ErParams& p) {
  const ErMoments mom = exact_moments(p);
  if (mom.sigma2 == 0) throw std::domain_error("sigma = 0: coupling is degenerate");
  const BigRational n(static_cast<unsigned long>(p.n));
  // Per edge set: e_v = E[a_v | E], s_v = E[a_v^2 | E] with a_v = (mu - n I_v)(Y^v - Y).
  BigRational sum_x = 0, sum_x2 = 0;
  BigRational e_sum = 0, e_sq_sum = 0, s_sum = 0;
  std::uint64_t current_v = 0;
  auto flush = [&]() {
    // X = sum_v a_v / (n sigma^2); L^v independent across v given the edge set.
    sum_x += e_sum;
    sum_x2 += e_sum * e_sum - e_sq_sum + s_sum;
    e_sum = e_sq_sum = s_sum = 0;
  };
  enumerate_couplings(p, [&](const ErGraphState& g, std::uint64_t v, const std::vector<std::uint64_t>& hist,
                             const BigInt& subsets) {
    if (v == 1 && current_v != 0) flush();
    current_v = v;
    const BigRational g_tilde = mom.mu - n * (g.degree(v) == 0 ? 1 : 0);
    BigRational e = 0, s = 0;
    for (std::uint64_t y = 0; y < hist.size(); ++y) {
      if (hist[y] == 0) continue;
      const BigRational w = ratio(BigInt(static_cast<unsigned long>(hist[y])), subsets);
      const BigRational a = g_tilde * (BigRational(static_cast<unsigned long>(y)) -
                                       BigRational(static_cast<unsigned long>(g.isolated())));
      e += w * a;
      s += w * a * a;
    }
    e_sum += e;
    e_sq_sum += e * e;
    s_sum += s;
  });
  flush();
  const BigInt edge_sets = binomial(p.slots(), p.m);
  const BigRational norm = n * mom.sigma2;
  GdVarianceExact out;
  out.mean = sum_x / (norm * edge_sets);
  const BigRational second = sum_x2 / (norm * norm * edge_sets);
  out.variance = second - out.mean * out.mean;
  out.variance_d = out.variance.get_d();
  return out;
}

GdVarianceEstimate gd_conditional_variance_estimate(const ErParams& p, Rng& rng, std::uint64_t samples) {
  if (samples < 2) throw std::invalid_argument("need at least two samples");
  ErSampler sampler(p);
  std::vector<double> xs(samples);
  for (auto& x : xs) x = sampler.conditional_gd(rng);
  GdVarianceEstimate out;
  out.samples = samples;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(samples);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double c = (x - mean) * (x - mean);
    m2 += c;
    m4 += c * c;
  }
  const auto k = static_cast<double>(samples);
  out.mean = mean;
  out.variance = m2 / (k - 1.0);
  const double pop_var = m2 / k;
  out.std_error = std::sqrt(std::max(0.0, m4 / k - pop_var * pop_var) / k);
  out.proxy = std::sqrt(out.variance);
  return out;
}

// ---------------------------------------------------------------------------

NegativeCorrelationReport check_negative_correlation(const ErParams& p) {
  const std::uint64_t N = p.slots();
  const BigInt total = binomial(N, p.m);
  NegativeCorrelationReport r;
  r.joint = ratio(N + 3 >= 2 * p.n ? binomial(N + 3 - 2 * p.n, p.m) : BigInt(0), total);
  const BigRational single = ratio(binomial(N - p.n + 1, p.m), total);
  r.product = single * single;
  r.correlation_holds = r.joint <= r.product;
  const ErMoments mom = exact_moments(p);
  const BigRational two_m(static_cast<unsigned long>(2 * p.m));
  r.sigma_bound_holds = mom.sigma2 <= mom.mu && mom.sigma2 <= two_m;
  r.holds = r.correlation_holds && r.sigma_bound_holds;
  return r;
}

namespace {

constexpr mp_bitcnt_t kSweepBits = 256;

bool leq_rel(const mpf_class& a, const mpf_class& b) {
  mpf_class scale(abs(b), kSweepBits);
  if (scale < 1) scale = 1;
  return a <= b + scale * 1e-10;
}

void lemma6_bounds(std::uint64_t n_int, std::uint64_t m_int, const mpf_class& mu, const mpf_class& sigma2,
                   Lemma6Report& r) {
  const double n = static_cast<double>(n_int);
  const double m = static_cast<double>(m_int);
  r.applicable = n_int >= 6 && 4.0 * m <= n * n - 6.0 * n;
  const mpf_class mu_over_n(mu / n, kSweepBits);
  const double x = 2.0 * m / n;
  const double tail = m * (m + n) / (n * n * n);
  r.mu_over_n = mu_over_n.get_d();
  r.mu_upper = std::exp(-x);
  r.mu_lower = std::exp(-x - 8.0 * tail);
  r.holds_mu = leq_rel(mpf_class(r.mu_lower, kSweepBits), mu_over_n) &&
               leq_rel(mu_over_n, mpf_class(r.mu_upper, kSweepBits));
  const mpf_class lower(mu * (1 - mu_over_n * (1 + x + 78.0 * tail)), kSweepBits);
  const mpf_class upper(mu * (1 - mu_over_n * (1 + x - 48.0 * tail)), kSweepBits);
  r.sigma2 = sigma2.get_d();
  r.sigma2_lower = lower.get_d();
  r.sigma2_upper = upper.get_d();
  r.holds_sigma = leq_rel(lower, sigma2) && leq_rel(sigma2, upper);
}

}  // namespace

Lemma6Report check_lemma6(const ErParams& p) {
  const ErMoments mom = exact_moments(p);
  Lemma6Report r;
  lemma6_bounds(p.n, p.m, mpf_class(mom.mu, kSweepBits), mpf_class(mom.sigma2, kSweepBits), r);
  return r;
}

Lemma6Sweep lemma6_sweep(std::uint64_t n) {
  if (n < 6) throw std::invalid_argument("lemma 6 needs n >= 6");
  Lemma6Sweep out;
  out.n = n;
  const std::uint64_t N = n * (n - 1) / 2;
  const std::uint64_t max_m = (n * n - 6 * n) / 4;  // floor(n^2/4 - 3n/2)
  // r1 = C(N-n+1, m)/C(N, m), r2 = C(N-2n+3, m)/C(N, m), updated in m.
  mpf_class r1(1, kSweepBits), r2(1, kSweepBits);
  const std::int64_t a = static_cast<std::int64_t>(N - n + 1);
  const std::int64_t b = static_cast<std::int64_t>(N + 3) - static_cast<std::int64_t>(2 * n);
  for (std::uint64_t m = 1; m <= max_m && m < N; ++m) {
    const auto mi = static_cast<std::int64_t>(m);
    const double den = static_cast<double>(N - m + 1);
    r1 = r1 * static_cast<double>(std::max<std::int64_t>(a - mi + 1, 0)) / den;
    r2 = r2 * static_cast<double>(std::max<std::int64_t>(b - mi + 1, 0)) / den;
    const mpf_class mu(r1 * static_cast<double>(n), kSweepBits);
    const mpf_class sigma2(mu + r2 * static_cast<double>(n * (n - 1)) - mu * mu, kSweepBits);
    Lemma6Report rep;
    lemma6_bounds(n, m, mu, sigma2, rep);
    ++out.checked;
    if (!(rep.holds_mu && rep.holds_sigma)) {
      if (out.failures++ == 0) out.first_failing_m = m;
    }
  }
  return out;
}

Lemma9Report check_lemma9_ratios(const ErParams& p, std::uint64_t d, double ceiling) {
  if (4 * d > std::min(p.n, p.m)) throw std::invalid_argument("lemma 9 needs 0 <= d <= min(n, m)/4");
  const ErParams smaller(p.n - 1, p.m - d);
  const ErMoments big = exact_moments(p);
  const ErMoments small = exact_moments(smaller);
  Lemma9Report r;
  auto two_sided = [](const BigRational& x, const BigRational& y) {
    if (x == 0 || y == 0) return std::numeric_limits<double>::infinity();
    const BigRational q = (x * x) / (y * y);
    return std::max(q.get_d(), BigRational(1 / q).get_d());
  };
  r.mean_ratio = two_sided(big.mu, small.mu);
  // The variance ratio compares sigma^2 itself, not sigma.
  auto plain = [](const BigRational& x, const BigRational& y) {
    if (x == 0 || y == 0) return std::numeric_limits<double>::infinity();
    const BigRational q = x / y;
    return std::max(q.get_d(), BigRational(1 / q).get_d());
  };
  r.var_ratio = plain(big.sigma2, small.sigma2);
  r.finite = std::isfinite(r.mean_ratio) && std::isfinite(r.var_ratio);
  r.below_ceiling = r.finite && r.mean_ratio <= ceiling && r.var_ratio <= ceiling;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<BigInt> enumerate_isolated_law(const ErParams& p) {
  if (binomial(p.slots(), p.m).get_d() > kEnumerationLimit)
    throw std::invalid_argument("edge-set enumeration is infeasible here");
  std::vector<std::uint64_t> counts(p.n + 1, 0);
  ErGraphState g(p);
  std::vector<std::uint64_t> slots(p.m);
  for_each_combination(p.slots(), p.m, [&](const std::vector<std::uint64_t>& c) {
    for (std::size_t i = 0; i < c.size(); ++i) slots[i] = c[i] + 1;
    g.assign(slots);
    ++counts[g.isolated()];
  });
  std::vector<BigInt> out;
  for (auto c : counts) out.emplace_back(static_cast<unsigned long>(c));
  return out;
}

double exact_kolmogorov(const ErParams& p) {
  const ErMoments mom = exact_moments(p);
  if (mom.sigma2 == 0) throw std::domain_error("sigma = 0: W is degenerate");
  const auto law = enumerate_isolated_law(p);
  const BigInt total = binomial(p.slots(), p.m);
  const double mu = mom.mu.get_d();
  const double sigma = std::sqrt(mom.sigma2.get_d());
  std::vector<RealAtom> atoms;
  for (std::size_t y = 0; y < law.size(); ++y)
    if (law[y] != 0) atoms.push_back({(static_cast<double>(y) - mu) / sigma, ratio(law[y], total).get_d()});
  return kolmogorov_distance(std::move(atoms));
}

KolmogorovEstimate kolmogorov_estimate(const ErParams& p, Rng& rng, std::uint64_t samples, double confidence) {
  ErSampler sampler(p);
  if (sampler.sigma() == 0.0) throw std::domain_error("sigma = 0: W is degenerate");
  std::vector<double> ws(samples);
  for (auto& w : ws) w = (static_cast<double>(sampler.sample_graph(rng).isolated()) - sampler.mu()) / sampler.sigma();
  std::sort(ws.begin(), ws.end());
  return empirical_kolmogorov(ws, confidence);
}

double truncation_level(const ErParams& p) { return static_cast<double>(std::min(p.n, p.m)) / 4.0; }

bool within_truncation(const ErParams& p, std::uint64_t chosen_degree) {
  return static_cast<double>(chosen_degree) <= truncation_level(p);
}

double truncation_lower(const ErParams& p) {
  return 4.0 * static_cast<double>(p.m) / static_cast<double>(p.n) +
         2.0 * std::log(static_cast<double>(std::min(p.m, p.n)));
}

}  // namespace steinkit
