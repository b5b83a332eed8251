#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "steinkit/er_model.hpp"

using namespace steinkit;

namespace {

using Pair = std::pair<unsigned, unsigned>;

// Slots listed row by row: (1,2),(1,3),...,(1,n),(2,3),...
std::vector<Pair> slot_list(unsigned n) {
  std::vector<Pair> out{{0, 0}};
  for (unsigned v = 1; v <= n; ++v)
    for (unsigned w = v + 1; w <= n; ++w) out.push_back({v, w});
  return out;
}

// Isolated vertices other than `skip` (0 skips nothing).
unsigned count_isolated(unsigned n, const std::vector<Pair>& slots, const std::set<unsigned>& edges,
                        unsigned skip = 0) {
  std::vector<unsigned> deg(n + 1, 0);
  for (unsigned s : edges) {
    ++deg[slots[s].first];
    ++deg[slots[s].second];
  }
  unsigned y = 0;
  for (unsigned v = 1; v <= n; ++v) y += v != skip && deg[v] == 0;
  return y;
}

// Relocation written out directly: drop v's edges, then walk sigma adding
// every slot that avoids v and is not yet an edge, until deg(v) slots are in.
std::set<unsigned> relocate(unsigned v, const std::vector<Pair>& slots, std::set<unsigned> edges,
                            const std::vector<unsigned>& sigma) {
  unsigned d = 0;
  for (auto it = edges.begin(); it != edges.end();) {
    if (slots[*it].first == v || slots[*it].second == v) {
      it = edges.erase(it);
      ++d;
    } else {
      ++it;
    }
  }
  for (unsigned s : sigma) {
    if (d == 0) break;
    if (slots[s].first == v || slots[s].second == v || edges.count(s)) continue;
    edges.insert(s);
    --d;
  }
  return edges;
}

template <class F>
void for_each_subset(unsigned N, unsigned m, F f) {
  std::vector<unsigned> idx(m);
  std::iota(idx.begin(), idx.end(), 1u);
  while (true) {
    f(std::set<unsigned>(idx.begin(), idx.end()));
    int i = static_cast<int>(m) - 1;
    while (i >= 0 && idx[i] == N - m + i + 1) --i;
    if (i < 0) return;
    ++idx[i];
    for (unsigned j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct BruteMoments {
  BigRational mu, sigma2;
};

BruteMoments brute_moments(unsigned n, unsigned m) {
  const auto slots = slot_list(n);
  const unsigned N = n * (n - 1) / 2;
  BigRational s1 = 0, s2 = 0, count = 0;
  for_each_subset(N, m, [&](const std::set<unsigned>& e) {
    const unsigned y = count_isolated(n, slots, e);
    s1 += y;
    s2 += y * y;
    count += 1;
  });
  s1 /= count;
  s2 /= count;
  return {s1, s2 - s1 * s1};
}

}  // namespace

TEST_CASE("slot indexing") {
  for (unsigned n : {3u, 4u, 7u, 12u}) {
    const auto slots = slot_list(n);
    for (std::uint64_t s = 1; s < slots.size(); ++s) {
      const auto [v, w] = slot_to_pair(s, n);
      CHECK(v == slots[s].first);
      CHECK(w == slots[s].second);
      CHECK(edge_index(v, w, n) == s);
      CHECK(edge_index(w, v, n) == s);
    }
    const SlotTable table(n);
    CHECK(table[slots.size() - 1].first == n - 1);
  }
}

TEST_CASE("params validation") {
  CHECK_THROWS(ErParams(2, 1));
  CHECK_THROWS(ErParams(4, 0));
  CHECK_THROWS(ErParams(4, 6));
  CHECK_NOTHROW(ErParams(4, 5));
}

TEST_CASE("graph from permutation") {
  const ErParams p(5, 3);
  std::vector<std::uint64_t> perm(10);
  std::iota(perm.begin(), perm.end(), 1);  // slots 1,2,3 are (1,2),(1,3),(1,4)
  const auto g = ErGraphState::from_permutation(p, perm);
  CHECK(g.degree(1) == 3);
  CHECK(g.degree(5) == 0);
  CHECK(g.isolated() == 1);
  CHECK(isolated_count(g) == 1);
  CHECK(g.neighbors(1) == std::vector<std::uint64_t>{2, 3, 4});
}

TEST_CASE("exact moments against edge-set enumeration") {
  const auto m42 = exact_moments(ErParams(4, 2));
  CHECK(m42.mu == BigRational(4, 5));
  CHECK(m42.sigma2 == BigRational(4, 25));
  for (unsigned n = 3; n <= 8; ++n) {
    const unsigned N = n * (n - 1) / 2;
    for (unsigned m = 1; m < N; ++m) {
      if (binomial(N, m) > 20000) continue;
      const auto brute = brute_moments(n, m);
      const auto mom = exact_moments(ErParams(n, m));
      CHECK(mom.mu == brute.mu);
      CHECK(mom.sigma2 == brute.sigma2);
    }
  }
  // n = 4, m = 1: the C(0,1) term vanishes
  CHECK(exact_moments(ErParams(4, 1)).sigma2 == brute_moments(4, 1).sigma2);
}

TEST_CASE("isolated law enumeration") {
  const auto counts = enumerate_isolated_law(ErParams(4, 2));
  // 15 edge sets: 3 perfect matchings (Y=0), 12 paths of length 2 (Y=1)
  REQUIRE(counts.size() >= 2);
  CHECK(counts[0] == 3);
  CHECK(counts[1] == 12);
  // two atoms: W = -2 w.p. 1/5, W = 1/2 w.p. 4/5; sup is at 1/2 from the left
  const double phi_half = 0.5 * std::erfc(-0.5 / std::sqrt(2.0));
  const double phi_m2 = 0.5 * std::erfc(2.0 / std::sqrt(2.0));
  const double expected = std::max({phi_m2, std::abs(0.2 - phi_m2), std::abs(phi_half - 0.2), 1.0 - phi_half});
  CHECK(exact_kolmogorov(ErParams(4, 2)) == doctest::Approx(expected));
}

TEST_CASE("redistribution matches the direct construction") {
  Rng rng(11);
  for (auto [n, m] : {Pair{5, 3}, Pair{6, 7}, Pair{8, 20}, Pair{7, 2}}) {
    const ErParams p(n, m);
    const auto slots = slot_list(n);
    const unsigned N = p.slots();
    for (int trial = 0; trial < 60; ++trial) {
      const auto perm = random_permutation(N, rng);
      const auto g = ErGraphState::from_permutation(p, perm);
      std::set<unsigned> edges(perm.begin(), perm.begin() + m);
      const unsigned v = 1 + static_cast<unsigned>(rng.below(n));
      const auto sigma = random_permutation(N, rng);
      const auto res = redistribute(g, v, sigma);
      const auto expected = relocate(v, slots, edges, std::vector<unsigned>(sigma.begin(), sigma.end()));
      CHECK(res.coupled_isolated == count_isolated(n, slots, expected, v));
      CHECK(res.b_v == static_cast<std::int64_t>(g.isolated()) - static_cast<std::int64_t>(res.coupled_isolated));
      CHECK(b_v_decomposition(g, v, res) == res.b_v);
      CHECK(res.relocated_slots.size() == g.degree(v));
      CHECK(res.coupled_degrees[v] == 0);
      std::uint64_t total = 0;
      for (std::uint64_t w = 1; w <= n; ++w) total += res.coupled_degrees[w];
      CHECK(total == 2 * m);
    }
  }
}

TEST_CASE("lazy redistribution agrees with the explicit one") {
  const ErParams p(9, 12);
  Rng rng(3);
  LazyPermutation lazy(p.slots());
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = ErGraphState::from_permutation(p, random_permutation(p.slots(), rng));
    const std::uint64_t v = 1 + rng.below(p.n);
    lazy.reset(p.slots());
    Rng a(trial), b(trial);
    const auto lazy_res = redistribute(g, v, lazy, a);
    // reveal the same sigma explicitly from an identical stream
    LazyPermutation replay(p.slots());
    std::vector<std::uint64_t> sigma;
    for (std::uint64_t i = 0; i < p.slots(); ++i) sigma.push_back(replay.next(b));
    const auto full = redistribute(g, v, sigma);
    CHECK(lazy_res.coupled_isolated == full.coupled_isolated);
    CHECK(lazy_res.relocated_slots == full.relocated_slots);
  }
}

// Stein identity in Y coordinates, E[(mu - n I_V)(g(Y') - g(Y))] = E[(Y - mu) g(Y)]
// with g(y) = (y - mu)^k, by walking every (edge set, V, sigma) triple. With
// full_sigma false only the relative order of the eligible slots is
// enumerated; the other slots are skipped by the scan anyway.
static std::pair<BigRational, BigRational> stein_sides(unsigned n, unsigned m, unsigned k, bool full_sigma) {
  const auto slots = slot_list(n);
  const unsigned N = n * (n - 1) / 2;
  const auto mom = exact_moments(ErParams(n, m));
  BigRational lhs = 0, rhs = 0, total = 0;
  for_each_subset(N, m, [&](const std::set<unsigned>& e) {
    const BigRational y = count_isolated(n, slots, e);
    for (unsigned v = 1; v <= n; ++v) {
      bool iso = true;
      for (unsigned s : e) iso = iso && slots[s].first != v && slots[s].second != v;
      const BigRational gt = mom.mu - (iso ? n : 0);
      std::vector<unsigned> sigma;
      for (unsigned s = 1; s <= N; ++s)
        if (full_sigma || (slots[s].first != v && slots[s].second != v && !e.count(s))) sigma.push_back(s);
      BigRational l = 0, r = 0, c = 0;
      do {
        const BigRational yp = count_isolated(n, slots, relocate(v, slots, e, sigma), v);
        l += gt * (pow(yp - mom.mu, k) - pow(y - mom.mu, k));
        r += pow(y - mom.mu, k + 1);
        c += 1;
      } while (std::next_permutation(sigma.begin(), sigma.end()));
      // each (edge set, v) carries the same mass
      lhs += l / c;
      rhs += r / c;
      total += 1;
    }
  });
  return {lhs / total, rhs / total};
}

TEST_CASE("stein identity against direct sigma enumeration") {
  for (unsigned k = 1; k <= 3; ++k) {
    const auto full = stein_sides(4, 2, k, true);
    const auto reduced = stein_sides(4, 2, k, false);
    CHECK(full.first == full.second);
    CHECK(reduced == full);
    const auto rep = check_stein_identity_exhaustive(ErParams(4, 2), Polynomial::monomial(k));
    CHECK(rep.equal);
    CHECK(rep.lhs_y[k] == full.first);
    CHECK(rep.rhs_y[k] == full.second);

    const auto five = stein_sides(5, 3, k, false);
    CHECK(five.first == five.second);
    const auto rep5 = check_stein_identity_exhaustive(ErParams(5, 3), Polynomial::monomial(k));
    CHECK(rep5.lhs_y[k] == five.first);
  }
}

TEST_CASE("the relocated vertex is not counted") {
  // (5,3) has vertices whose coupled graph leaves another vertex isolated
  const ErParams p(5, 3);
  std::vector<std::uint64_t> perm{1, 2, 5, 3, 4, 6, 7, 8, 9, 10};  // (1,2),(1,3),(2,3): a triangle
  const auto g = ErGraphState::from_permutation(p, perm);
  CHECK(g.isolated() == 2);
  std::vector<std::uint64_t> sigma{8, 9, 10, 1, 2, 3, 4, 5, 6, 7};  // (3,4),(3,5),(4,5) first
  const auto res = redistribute(g, 1, sigma);
  // vertex 1 loses both edges; (3,4),(3,5) are added, vertex 2 keeps (2,3)
  CHECK(res.relocated_slots == std::vector<std::uint64_t>{8, 9});
  CHECK(res.coupled_isolated == 0);
  CHECK(res.b_v == 2);
  // 2 was a neighbour and receives nothing; 3 receives
  CHECK(res.lost_neighbors == std::vector<std::uint64_t>{2});
  CHECK(res.receiving_vertices == std::vector<std::uint64_t>{3, 4, 5});
}

TEST_CASE("stein identity at (5,3) and a non-identity") {
  for (unsigned k = 1; k <= 3; ++k) CHECK(check_stein_identity_exhaustive(ErParams(5, 3), Polynomial::monomial(k)).equal);
  CHECK_THROWS(check_stein_identity_exhaustive(ErParams(4, 2), Polynomial::monomial(5)));
}

TEST_CASE("exact GD variance") {
  const auto g = gd_conditional_variance_exact(ErParams(4, 2));
  CHECK(g.mean == 1);
  CHECK(g.variance >= 0);
  // Monte Carlo estimate agrees
  Rng rng(8);
  const auto est = gd_conditional_variance_estimate(ErParams(4, 2), rng, 40000);
  CHECK(est.mean == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(est.variance - g.variance_d) <= 5 * est.std_error + 1e-9);
}

TEST_CASE("coupling samples") {
  Rng rng(21);
  ErSampler sampler(ErParams(40, 40));
  double sum_gd = 0.0, sum_w2 = 0.0;
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) {
    const auto s = sampler.coupling_sample(rng);
    CHECK(std::abs(s.d) <= d_bar(s.chosen_degree, sampler.sigma()) + 1e-12);
    CHECK(s.w == doctest::Approx((s.y - sampler.mu()) / sampler.sigma()));
    sum_gd += s.g * s.d;
    sum_w2 += s.w * s.w;
  }
  // E GD = E W^2 = 1
  CHECK(sum_gd / reps == doctest::Approx(1.0).epsilon(0.08));
  CHECK(sum_w2 / reps == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("negative correlation and sigma bound") {
  const auto r = check_negative_correlation(ErParams(4, 2));
  // P[both of two given vertices isolated] = C(1,2)/15 = 0
  CHECK(r.joint == 0);
  CHECK(r.product == BigRational(1, 25));
  CHECK(r.holds);
  for (std::uint64_t n = 3; n <= 25; ++n)
    for (std::uint64_t m = 1; m < n * (n - 1) / 2; ++m) CHECK(check_negative_correlation(ErParams(n, m)).holds);
}

TEST_CASE("mean and variance sandwiches") {
  const auto outside = check_lemma6(ErParams(6, 1));
  CHECK_FALSE(outside.applicable);
  const auto inside = check_lemma6(ErParams(20, 30));
  CHECK(inside.applicable);
  CHECK(inside.holds_mu);
  CHECK(inside.holds_sigma);
  CHECK(inside.mu_over_n == doctest::Approx(to_double(exact_moments(ErParams(20, 30)).mu) / 20));
  for (std::uint64_t n = 6; n <= 40; ++n) {
    const auto s = lemma6_sweep(n);
    CHECK(s.failures == 0);
    CHECK(s.checked == static_cast<std::uint64_t>(std::floor((n * n - 6.0 * n) / 4.0)));
  }
  // sweep values agree with the exact single-point check
  for (std::uint64_t m : {1u, 10u, 50u}) CHECK(check_lemma6(ErParams(20, m)).holds_sigma);
}

TEST_CASE("ratio stability and truncation") {
  const auto r = check_lemma9_ratios(ErParams(100, 100), 5);
  CHECK(r.finite);
  CHECK(r.below_ceiling);
  CHECK(r.mean_ratio >= 1.0);
  CHECK_THROWS(check_lemma9_ratios(ErParams(100, 100), 26));
  CHECK(truncation_level(ErParams(100, 40)) == doctest::Approx(10.0));
  CHECK(within_truncation(ErParams(100, 40), 10));
  CHECK_FALSE(within_truncation(ErParams(100, 40), 11));
  CHECK(truncation_lower(ErParams(100, 40)) == doctest::Approx(1.6 + 2 * std::log(40.0)));
}

TEST_CASE("rate, asymptotics and smiley set") {
  const ErParams p(400, 400);
  const auto mom = exact_moments(p);
  const double mu = to_double(mom.mu), s2 = to_double(mom.sigma2);
  CHECK(rate(p) == doctest::Approx(std::pow(s2, 1.5) / (mu * 2.0)));
  const auto ap = asymptotic_moments(p);
  CHECK(ap.mu == doctest::Approx(400 * std::exp(-2.0)));
  CHECK(ap.mu / mu == doctest::Approx(1.0).epsilon(0.01));
  CHECK(smiley_membership(ErParams(400, 200)));
  CHECK_FALSE(smiley_membership(ErParams(4, 2)));
}

TEST_CASE("kolmogorov estimate against exact at (4,2)") {
  const double exact = exact_kolmogorov(ErParams(4, 2));
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng = Rng::for_stream(seed, 1, 0);
    const auto est = kolmogorov_estimate(ErParams(4, 2), rng, 5000);
    if (std::abs(est.delta_hat - exact) <= est.dkw_band) ++inside;
  }
  CHECK(inside >= 27);
}
