#include "steinkit/jack_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace steinkit {

namespace {

BigRational g_perturbation = 0;

BigRational from_count(std::uint64_t k) { return BigRational(static_cast<unsigned long>(k)); }
double from_count_d(std::uint64_t k) { return static_cast<double>(k); }

// Scalar adaptors so the Kerov rule is written once.
BigRational lift(std::uint64_t k, const BigRational&) { return from_count(k); }
double lift(std::uint64_t k, double) { return from_count_d(k); }
BigRational perturbation(const BigRational&) { return g_perturbation; }
double perturbation(double) { return g_perturbation.get_d(); }

template <class Scalar>
std::vector<Corner<Scalar>> kerov_rule(const Partition& p, const Scalar& alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  const Scalar one = lift(1, alpha);
  const Scalar bump = one + perturbation(alpha);
  std::vector<Corner<Scalar>> out;
  for (const Box& b : addable_corners(p)) {
    // Only boxes in row b.row (arm grows) and column b.col (leg grows) change
    // their hook factors; the column factors also absorb psi'.
    Scalar prob = one;
    for (std::uint32_t j = 1; j < b.col; ++j) {
      const ArmLeg h = arm_leg(p, {b.row, j});
      const Scalar base = alpha * lift(h.arm, alpha) + lift(h.leg, alpha);
      prob *= (base + one) / (base + one + alpha);
    }
    for (std::uint32_t i = 1; i < b.row; ++i) {
      const ArmLeg h = arm_leg(p, {i, b.col});
      const Scalar base = alpha * lift(h.arm, alpha) + lift(h.leg, alpha);
      prob *= (base + alpha) / (base + alpha + one);
    }
    out.push_back({b, alpha * lift(b.col - 1, alpha) - lift(b.row - 1, alpha), prob * bump});
  }
  return out;
}

template <class Scalar>
Scalar hook_product_probability(const Partition& p, const Scalar& alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  const Scalar one = lift(1, alpha);
  Scalar prob = one;
  std::uint64_t k = 0;
  for (std::uint32_t r = 1; r <= p.rows(); ++r) {
    for (std::uint32_t c = 1; c <= p.row_length(r); ++c) {
      ++k;
      const ArmLeg h = arm_leg(p, {r, c});
      const Scalar base = alpha * lift(h.arm, alpha) + lift(h.leg, alpha);
      // Pair each box with one factor alpha * k of alpha^n n!.
      prob *= alpha * lift(k, alpha) / ((base + one) * (base + alpha));
    }
  }
  return prob;
}

void require_size(const Partition& p, std::uint64_t n) {
  if (p.size() != n) throw std::invalid_argument("partition has the wrong size");
}

}  // namespace

// ---------------------------------------------------------------------------

Partition::Partition(std::vector<std::uint32_t> parts_in) : parts(std::move(parts_in)) {
  if (parts.empty()) throw std::invalid_argument("partition needs at least one part");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i] == 0) throw std::invalid_argument("partition parts must be positive");
    if (i > 0 && parts[i] > parts[i - 1]) throw std::invalid_argument("partition parts must be non-increasing");
  }
}

std::uint64_t Partition::size() const { return std::accumulate(parts.begin(), parts.end(), std::uint64_t{0}); }

std::uint32_t Partition::column_length(std::uint32_t col) const {
  std::uint32_t k = 0;
  while (k < parts.size() && parts[k] >= col) ++k;
  return k;
}

Partition Partition::conjugate() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t c = 1; c <= (parts.empty() ? 0 : parts[0]); ++c) out.push_back(column_length(c));
  return Partition(std::move(out));
}

std::string Partition::to_string() const {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(parts[i]);
  }
  return s;
}

Partition parse_partition(const std::string& text) {
  std::vector<std::uint32_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty() || item.find_first_not_of("0123456789 ") != std::string::npos)
      throw std::invalid_argument("malformed partition: " + text);
    parts.push_back(static_cast<std::uint32_t>(std::stoul(item)));
  }
  return Partition(std::move(parts));
}

ArmLeg arm_leg(const Partition& p, Box box) {
  if (!p.contains(box.row, box.col)) throw std::out_of_range("box outside the diagram");
  return {p.row_length(box.row) - box.col, p.column_length(box.col) - box.row};
}

BigRational jack_probability(const Partition& p, const BigRational& alpha) { return hook_product_probability(p, alpha); }
double jack_probability(const Partition& p, double alpha) { return hook_product_probability(p, alpha); }

std::vector<Partition> enumerate_partitions(std::uint32_t n) {
  if (n == 0 || n > 60) throw std::invalid_argument("enumerate_partitions needs 1 <= n <= 60");
  std::vector<Partition> out;
  std::vector<std::uint32_t> current;
  auto rec = [&](auto&& self, std::uint32_t remaining, std::uint32_t max_part) -> void {
    if (remaining == 0) {
      out.emplace_back(current);
      return;
    }
    for (std::uint32_t part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      self(self, remaining - part, part);
      current.pop_back();
    }
  };
  rec(rec, n, n);
  std::sort(out.begin(), out.end());
  return out;
}

BigRational content(Box box, const BigRational& alpha) {
  return alpha * from_count(box.col - 1) - from_count(box.row - 1);
}

double content(Box box, double alpha) { return alpha * (box.col - 1.0) - (box.row - 1.0); }

BigRational content_sum(const Partition& p, const BigRational& alpha) {
  BigInt row_part = 0, col_part = 0;
  for (std::uint32_t r = 1; r <= p.rows(); ++r) {
    const std::uint64_t len = p.row_length(r);
    row_part += static_cast<unsigned long>(len * (len - 1) / 2);
    col_part += static_cast<unsigned long>((r - 1) * len);
  }
  return alpha * BigRational(row_part) - BigRational(col_part);
}

double content_sum(const Partition& p, double alpha) {
  double row_part = 0.0, col_part = 0.0;
  for (std::uint32_t r = 1; r <= p.rows(); ++r) {
    const double len = p.row_length(r);
    row_part += len * (len - 1.0) / 2.0;
    col_part += (r - 1.0) * len;
  }
  return alpha * row_part - col_part;
}

double content_w(const Partition& p, double alpha) {
  const double n = static_cast<double>(p.size());
  if (n < 2) throw std::invalid_argument("standardized content needs n >= 2");
  return content_sum(p, alpha) / std::sqrt(alpha * n * (n - 1.0) / 2.0);
}

std::vector<Box> addable_corners(const Partition& p) {
  std::vector<Box> out;
  for (std::uint32_t r = 1; r <= p.rows(); ++r)
    if (r == 1 || p.row_length(r - 1) > p.row_length(r)) out.push_back({r, p.row_length(r) + 1});
  out.push_back({p.rows() + 1, 1});
  return out;
}

Partition add_box(const Partition& p, Box box) {
  std::vector<std::uint32_t> parts = p.parts;
  if (box.row == parts.size() + 1 && box.col == 1)
    parts.push_back(1);
  else if (box.row >= 1 && box.row <= parts.size() && box.col == parts[box.row - 1] + 1)
    ++parts[box.row - 1];
  else
    throw std::invalid_argument("box is not addable");
  return Partition(std::move(parts));
}

// ---------------------------------------------------------------------------

CornerDistribution kerov_transition_probs(const Partition& p, const BigRational& alpha) { return kerov_rule(p, alpha); }
CornerDistributionD kerov_transition_probs(const Partition& p, double alpha) { return kerov_rule(p, alpha); }

void set_kerov_perturbation(const BigRational& factor) { g_perturbation = factor; }

std::map<Partition, BigRational> kerov_chain_law(std::uint32_t n, const BigRational& alpha) {
  if (n == 0) throw std::invalid_argument("kerov chain needs n >= 1");
  std::map<Partition, BigRational> law{{Partition({1}), BigRational(1)}};
  for (std::uint32_t k = 2; k <= n; ++k) {
    std::map<Partition, BigRational> next;
    for (const auto& [lambda, prob] : law)
      for (const auto& c : kerov_transition_probs(lambda, alpha)) next[add_box(lambda, c.box)] += prob * c.prob;
    law.swap(next);
  }
  return law;
}

namespace {

// Index drawn with probability weights[i] / sum(weights).
template <class Weights>
std::size_t draw_index(const Weights& weights, double total, Rng& rng) {
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;  // rounding spill lands on the last positive cell
}

Partition grow(std::uint32_t size, double alpha, Rng& rng, std::vector<double>* contents) {
  Partition p({1});
  std::vector<double> w;
  for (std::uint32_t k = 2; k <= size; ++k) {
    const auto corners = kerov_transition_probs(p, alpha);
    w.clear();
    double total = 0.0;
    for (const auto& c : corners) {
      w.push_back(c.prob);
      total += c.prob;
    }
    const auto& chosen = corners[draw_index(w, total, rng)];
    if (contents) contents->push_back(chosen.content);
    p = add_box(p, chosen.box);
  }
  return p;
}

}  // namespace

KerovPath kerov_sample(std::uint32_t n, double alpha, Rng& rng) {
  if (n == 0) throw std::invalid_argument("kerov_sample needs n >= 1");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  KerovPath path;
  path.final = grow(n, alpha, rng, &path.contents);
  return path;
}

TMoments conditional_t_moments(const Partition& p, const BigRational& alpha, std::uint32_t n) {
  require_size(p, n - 1);
  const BigRational s = alpha * from_count(static_cast<std::uint64_t>(n) * (n - 1) / 2);
  TMoments out;
  out.content_mean = 0;
  out.m2 = 0;
  for (const auto& c : kerov_transition_probs(p, alpha)) {
    out.content_mean += c.prob * c.content;
    out.m2 += c.prob * c.content * c.content;
  }
  out.m2 /= s;
  return out;
}

ZeroBiasPair zero_bias_pair_distribution(const Partition& p, const BigRational& alpha, std::uint32_t n) {
  require_size(p, n - 1);
  const BigRational s = alpha * from_count(static_cast<std::uint64_t>(n) * (n - 1) / 2);
  ZeroBiasPair out;
  out.corners = kerov_transition_probs(p, alpha);
  out.normalizer = 0;
  out.total_weight = 0;
  const BigRational scale = BigRational(from_count(n)) / (4 * s);  // divides by S, then by 4/n
  for (std::size_t i = 0; i < out.corners.size(); ++i) {
    for (std::size_t j = 0; j < out.corners.size(); ++j) {
      if (i == j) continue;
      const BigRational diff = out.corners[i].content - out.corners[j].content;
      const BigRational raw = out.corners[i].prob * out.corners[j].prob * diff * diff;
      if (raw == 0) continue;
      out.normalizer += raw / s;
      ZeroBiasCell cell{i, j, raw * scale};
      out.total_weight += cell.weight;
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

namespace {

ZeroBiasSample zero_bias_from(const Partition& lambda, std::uint32_t n, double alpha, Rng& rng) {
  const double sd = std::sqrt(alpha * n * (n - 1.0) / 2.0);
  const auto corners = kerov_transition_probs(lambda, alpha);
  std::vector<double> weights;
  std::vector<std::pair<std::size_t, std::size_t>> cells;
  double total = 0.0;
  for (std::size_t i = 0; i < corners.size(); ++i)
    for (std::size_t j = 0; j < corners.size(); ++j) {
      const double diff = corners[i].content - corners[j].content;
      const double w = corners[i].prob * corners[j].prob * diff * diff;
      if (i == j || w <= 0.0) continue;
      weights.push_back(w);
      cells.emplace_back(i, j);
      total += w;
    }
  const auto [i, j] = cells[draw_index(weights, total, rng)];
  ZeroBiasSample out;
  const double u = rng.uniform01();
  out.v = content_sum(lambda, alpha);
  out.t_dagger = corners[i].content / sd;
  out.t_ddagger = corners[j].content / sd;
  out.t_star = u * out.t_dagger + (1.0 - u) * out.t_ddagger;
  out.w_star = out.v / sd + out.t_star;
  out.first_row = lambda.row_length(1);
  return out;
}

}  // namespace

ZeroBiasSample zero_bias_sample(std::uint32_t n, double alpha, Rng& rng) {
  if (n < 2) throw std::invalid_argument("zero_bias_sample needs n >= 2");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  return zero_bias_from(grow(n - 1, alpha, rng, nullptr), n, alpha, rng);
}

ZeroBiasIdentityReport check_zero_bias_identity(std::uint32_t n, const BigRational& alpha, const Polynomial& f) {
  if (n < 2 || n > 8) throw std::invalid_argument("zero-bias identity check needs 2 <= n <= 8");
  const unsigned degree = f.degree();
  if (degree > 5) throw std::invalid_argument("zero-bias identity check takes polynomials of degree <= 5");
  const BigRational s = alpha * from_count(static_cast<std::uint64_t>(n) * (n - 1) / 2);

  ZeroBiasIdentityReport rep;
  rep.lhs_y.assign(degree + 1, BigRational(0));
  rep.rhs_y.assign(degree + 1, BigRational(0));
  for (const auto& lambda : enumerate_partitions(n)) {
    const BigRational prob = jack_probability(lambda, alpha);
    const BigRational y = content_sum(lambda, alpha);
    for (unsigned k = 0; k <= degree; ++k) rep.lhs_y[k] += prob * pow(y, k + 1);
  }

  // integral[j] accumulates E[(V + c*)^j] for j = 0..degree-1.
  std::vector<BigRational> integral(degree, BigRational(0));
  for (const auto& [lambda, q] : kerov_chain_law(n - 1, alpha)) {
    const BigRational v = content_sum(lambda, alpha);
    const ZeroBiasPair pair = zero_bias_pair_distribution(lambda, alpha, n);
    for (const auto& cell : pair.cells) {
      const BigRational a = pair.corners[cell.i].content;
      const BigRational b = pair.corners[cell.j].content;
      const BigRational w = q * cell.weight;
      // int_0^1 (v + u a + (1-u) b)^j du = ((v+a)^{j+1} - (v+b)^{j+1}) / ((j+1)(a-b)); a != b on every cell.
      for (unsigned j = 0; j < degree; ++j)
        integral[j] += w * (pow(v + a, j + 1) - pow(v + b, j + 1)) / (from_count(j + 1) * (a - b));
    }
  }
  for (unsigned k = 1; k <= degree; ++k) rep.rhs_y[k] = from_count(k) * s * integral[k - 1];

  rep.exact_equal = true;
  const double sd = std::sqrt(s.get_d());
  for (unsigned k = 0; k <= degree; ++k) {
    rep.exact_equal = rep.exact_equal && rep.lhs_y[k] == rep.rhs_y[k];
    const double coeff = k < f.coeffs.size() ? f.coeffs[k].get_d() : 0.0;
    const double norm = std::pow(sd, static_cast<double>(k + 1));
    rep.lhs += coeff * rep.lhs_y[k].get_d() / norm;
    rep.rhs += coeff * rep.rhs_y[k].get_d() / norm;
  }
  rep.max_abs_err = std::abs(rep.lhs - rep.rhs);
  rep.holds = rep.exact_equal && rep.max_abs_err <= 1e-10;
  return rep;
}

JackMomentReport check_jack_moments(std::uint32_t n, const BigRational& alpha) {
  if (n < 1 || n > 12) throw std::invalid_argument("moment check needs 1 <= n <= 12");
  JackMomentReport rep;
  rep.ey = 0;
  rep.ey2 = 0;
  for (const auto& lambda : enumerate_partitions(n)) {
    const BigRational prob = jack_probability(lambda, alpha);
    const BigRational y = content_sum(lambda, alpha);
    rep.ey += prob * y;
    rep.ey2 += prob * y * y;
  }
  rep.expected_ey2 = alpha * from_count(static_cast<std::uint64_t>(n) * (n - 1) / 2);
  rep.holds = rep.ey == 0 && rep.ey2 == rep.expected_ey2;
  return rep;
}

BigRational single_column_prob(std::uint32_t n, const BigRational& alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  BigRational p = 1;
  for (std::uint32_t l = 0; l < n; ++l) p *= alpha / (alpha + from_count(l));
  return p;
}

SingleColumnReport check_single_column(std::uint32_t n, double alpha) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  SingleColumnReport rep;
  double log_inv = 0.0;
  for (std::uint32_t l = 0; l < n; ++l) log_inv += std::log1p(l / alpha);
  rep.prob = std::exp(-log_inv);
  rep.lower = std::exp(-static_cast<double>(n) * n / alpha);
  rep.holds = rep.prob >= rep.lower * (1.0 - 1e-12);
  return rep;
}

JackRate rate_and_region(std::uint32_t n, double alpha, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0,1)");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
  const double nd = n;
  return {nd / std::sqrt(alpha),
          std::pow(nd, 1.0 + epsilon) < alpha && alpha < nd * nd / std::pow(2.0, 1.0 - epsilon)};
}

double alternative_rate(std::uint32_t n, double alpha) {
  return 1.0 / (1.0 / std::sqrt(static_cast<double>(n)) + std::sqrt(alpha) / n);
}

double wasserstein_bound(std::uint32_t n, double alpha) {
  if (n < 2) throw std::invalid_argument("wasserstein bound needs n >= 2");
  const double nd = n;
  return std::sqrt(2.0 / nd) * (2.0 + std::sqrt(2.0 + std::max(alpha, 1.0 / alpha) / (nd - 1.0)));
}

namespace {

std::vector<double> sorted_w_samples(std::uint32_t n, double alpha, Rng& rng, std::uint64_t samples) {
  std::vector<double> ws(samples);
  for (auto& w : ws) w = content_w(grow(n, alpha, rng, nullptr), alpha);
  std::sort(ws.begin(), ws.end());
  return ws;
}

}  // namespace

WassersteinReport check_wasserstein_bound(std::uint32_t n, double alpha, Rng& rng, std::uint64_t samples) {
  if (n < 2) throw std::invalid_argument("wasserstein check needs n >= 2");
  if (samples == 0) throw std::invalid_argument("wasserstein check needs samples");
  const auto ws = sorted_w_samples(n, alpha, rng, samples);
  WassersteinReport rep;
  rep.d1_hat = wasserstein_to_normal(std::span<const double>(ws));
  rep.bound = wasserstein_bound(n, alpha);
  rep.mc_budget = 3.0 / std::sqrt(static_cast<double>(samples));
  rep.holds_within_mc = rep.d1_hat <= rep.bound + rep.mc_budget;
  return rep;
}

JackKolmogorov kolmogorov_estimate(std::uint32_t n, double alpha, Rng& rng, std::uint64_t samples, double confidence) {
  if (n < 2) throw std::invalid_argument("kolmogorov estimate needs n >= 2");
  const auto ws = sorted_w_samples(n, alpha, rng, samples);
  JackKolmogorov out;
  out.estimate = empirical_kolmogorov(ws, confidence);
  out.theorem_ratio = out.estimate.delta_hat * n / std::sqrt(alpha);
  out.alternative_ratio = out.estimate.delta_hat * alternative_rate(n, alpha);
  return out;
}

std::vector<RealAtom> jack_w_law(std::uint32_t n, const BigRational& alpha) {
  if (n < 2 || n > 20) throw std::invalid_argument("exact Jack law needs 2 <= n <= 20");
  const double sd = std::sqrt(alpha.get_d() * n * (n - 1.0) / 2.0);
  std::vector<RealAtom> atoms;
  for (const auto& lambda : enumerate_partitions(n))
    atoms.push_back({content_sum(lambda, alpha).get_d() / sd, jack_probability(lambda, alpha).get_d()});
  return atoms;
}

double exact_kolmogorov(std::uint32_t n, const BigRational& alpha) { return kolmogorov_distance(jack_w_law(n, alpha)); }

JackDiagnostics jack_diagnostics(std::uint32_t n, double alpha, double epsilon, Rng& rng, std::uint64_t samples) {
  if (n < 3) throw std::invalid_argument("diagnostics need n >= 3");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  JackDiagnostics d;
  d.samples = samples;
  d.d_bar = 10.0 * std::sqrt(alpha) / (n * epsilon);
  d.first_row_limit = 2.0 / epsilon;
  d.fc_bound = 4.0 * std::exp(1.0) * alpha / (static_cast<double>(n) * n);
  const double sd = std::sqrt(alpha * n * (n - 1.0) / 2.0);
  std::uint64_t outside = 0, exceed = 0;
  std::vector<double> w;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Partition lambda = grow(n - 1, alpha, rng, nullptr);
    const ZeroBiasSample z = zero_bias_from(lambda, n, alpha, rng);
    // T is a conditionally independent Kerov step from the same Lambda_{n-1}.
    const auto corners = kerov_transition_probs(lambda, alpha);
    w.clear();
    double total = 0.0;
    for (const auto& c : corners) {
      w.push_back(c.prob);
      total += c.prob;
    }
    const double t = corners[draw_index(w, total, rng)].content / sd;
    if (z.first_row > d.first_row_limit) ++outside;
    if (std::abs(z.t_star - t) > d.d_bar) ++exceed;
  }
  d.fc_frequency = static_cast<double>(outside) / static_cast<double>(samples);
  d.d_exceed_frequency = static_cast<double>(exceed) / static_cast<double>(samples);
  return d;
}

}  // namespace steinkit
