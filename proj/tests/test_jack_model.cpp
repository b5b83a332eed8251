#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "steinkit/jack_model.hpp"

using namespace steinkit;

namespace {

using Parts = std::vector<std::uint32_t>;

void partitions_rec(std::uint32_t left, std::uint32_t cap, Parts& cur, std::vector<Parts>& out) {
  if (left == 0) {
    out.push_back(cur);
    return;
  }
  for (std::uint32_t k = std::min(left, cap); k >= 1; --k) {
    cur.push_back(k);
    partitions_rec(left - k, k, cur, out);
    cur.pop_back();
  }
}

std::vector<Parts> all_parts(std::uint32_t n) {
  std::vector<Parts> out;
  Parts cur;
  partitions_rec(n, n, cur, out);
  return out;
}

// Jack weight with arm = parts[i] - j and leg = #{rows below with length >= j}.
BigRational jack_ref(const Parts& parts, const BigRational& a) {
  std::uint32_t n = 0;
  for (auto p : parts) n += p;
  BigRational num = 1;
  for (std::uint32_t i = 1; i <= n; ++i) num *= a * i;  // alpha^n n!
  BigRational den = 1;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::uint32_t j = 1; j <= parts[i]; ++j) {
      const std::uint32_t arm = parts[i] - j;
      std::uint32_t leg = 0;
      for (std::size_t r = i + 1; r < parts.size(); ++r) leg += parts[r] >= j;
      den *= (a * arm + leg + 1) * (a * arm + leg + a);
    }
  return num / den;
}

BigRational content_sum_ref(const Parts& parts, const BigRational& a) {
  BigRational y = 0;
  for (std::size_t i = 0; i < parts.size(); ++i)
    for (std::uint32_t j = 1; j <= parts[i]; ++j) y += a * (j - 1) - static_cast<long>(i);
  return y;
}

const std::vector<BigRational> kAlphas{BigRational(1, 2), BigRational(1), BigRational(2), BigRational(5),
                                       BigRational(7, 3)};

}  // namespace

TEST_CASE("partition basics") {
  const Partition p({4, 2, 1});
  CHECK(p.size() == 7);
  CHECK(p.rows() == 3);
  CHECK(p.column_length(1) == 3);
  CHECK(p.column_length(3) == 1);
  CHECK(p.conjugate().parts == Parts{3, 2, 1, 1});
  CHECK(p.to_string() == "4,2,1");
  CHECK(parse_partition("4,2,1") == p);
  CHECK_THROWS(Partition({1, 2}));
  CHECK_THROWS(Partition({0}));
  CHECK_THROWS(parse_partition("3,,1"));
  const auto al = arm_leg(p, Box{1, 2});
  CHECK(al.arm == 2);
  CHECK(al.leg == 1);
  CHECK_THROWS(arm_leg(p, Box{2, 3}));
}

TEST_CASE("partition enumeration") {
  const std::vector<std::size_t> counts{1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42};
  for (std::uint32_t n = 1; n <= 10; ++n) {
    const auto parts = enumerate_partitions(n);
    CHECK(parts.size() == counts[n]);
    CHECK(std::is_sorted(parts.begin(), parts.end()));
  }
  CHECK(enumerate_partitions(30).size() == 5604);
}

TEST_CASE("jack weights against the hook product") {
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 1; n <= 8; ++n) {
      BigRational total = 0;
      for (const auto& parts : all_parts(n)) {
        const auto w = jack_probability(Partition(parts), a);
        CHECK(w == jack_ref(parts, a));
        total += w;
      }
      CHECK(total == 1);
    }
  // alpha = 1 is Plancherel: f_lambda^2 / n!; (2,1) has f = 2, so 4/6
  CHECK(jack_probability(Partition({2, 1}), BigRational(1)) == BigRational(2, 3));
  CHECK(jack_probability(Partition({2, 1}), 2.0) == doctest::Approx(to_double(jack_ref({2, 1}, BigRational(2)))));
}

TEST_CASE("kerov transitions") {
  // from (1): the column gets alpha/(1+alpha), the row 1/(1+alpha)
  const auto t = kerov_transition_probs(Partition({1}), BigRational(3));
  REQUIRE(t.size() == 2);
  CHECK(t[0].box == Box{1, 2});
  CHECK(t[0].prob == BigRational(1, 4));
  CHECK(t[0].content == 3);
  CHECK(t[1].box == Box{2, 1});
  CHECK(t[1].prob == BigRational(3, 4));
  CHECK(t[1].content == -1);

  // every row sums to one and the double path agrees with the exact one
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 1; n <= 6; ++n)
      for (const auto& parts : all_parts(n)) {
        const Partition p(parts);
        BigRational total = 0;
        for (const auto& c : kerov_transition_probs(p, a)) {
          CHECK(c.prob > 0);
          total += c.prob;
        }
        CHECK(total == 1);
        const auto d = kerov_transition_probs(p, to_double(a));
        const auto e = kerov_transition_probs(p, a);
        for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].prob == doctest::Approx(to_double(e[i].prob)));
      }
}

TEST_CASE("kerov chain reproduces the jack law") {
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 1; n <= 8; ++n) {
      const auto law = kerov_chain_law(n, a);
      CHECK(law.size() == all_parts(n).size());
      for (const auto& parts : all_parts(n)) CHECK(law.at(Partition(parts)) == jack_ref(parts, a));
    }
}

TEST_CASE("kerov perturbation breaks normalization") {
  set_kerov_perturbation(BigRational(1, 100));
  BigRational total = 0;
  for (const auto& c : kerov_transition_probs(Partition({2, 1}), BigRational(2))) total += c.prob;
  CHECK(total != 1);
  set_kerov_perturbation(BigRational(0));
  total = 0;
  for (const auto& c : kerov_transition_probs(Partition({2, 1}), BigRational(2))) total += c.prob;
  CHECK(total == 1);
}

TEST_CASE("sampled growth matches the exact law") {
  const std::uint32_t n = 5;
  const double a = 2.0;
  Rng rng(99);
  std::map<Partition, int> freq;
  const int reps = 60000;
  for (int i = 0; i < reps; ++i) {
    const auto path = kerov_sample(n, a, rng);
    CHECK(path.contents.size() == n - 1);
    ++freq[path.final];
  }
  for (const auto& parts : all_parts(n)) {
    const double p = to_double(jack_ref(parts, BigRational(2)));
    const double se = std::sqrt(p * (1 - p) / reps);
    CHECK(std::abs(freq[Partition(parts)] / static_cast<double>(reps) - p) <= 5 * se + 1e-12);
  }
}

TEST_CASE("contents") {
  const BigRational a(3, 2);
  CHECK(content(Box{1, 3}, a) == 3);
  CHECK(content(Box{3, 1}, a) == -2);
  CHECK(content(Box{2, 2}, 1.5) == doctest::Approx(0.5));
  for (const auto& parts : all_parts(6)) CHECK(content_sum(Partition(parts), a) == content_sum_ref(parts, a));
  CHECK(content_w(Partition({2}), 1.0) == doctest::Approx(1.0));
  const auto corners = addable_corners(Partition({3, 1}));
  CHECK(corners == std::vector<Box>{{1, 4}, {2, 2}, {3, 1}});
  CHECK(add_box(Partition({3, 1}), Box{2, 2}).parts == Parts{3, 2});
  CHECK_THROWS(add_box(Partition({3, 1}), Box{2, 3}));
}

TEST_CASE("content moments") {
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 1; n <= 9; ++n) {
      BigRational ey = 0, ey2 = 0;
      for (const auto& parts : all_parts(n)) {
        const auto w = jack_ref(parts, a);
        const auto y = content_sum_ref(parts, a);
        ey += w * y;
        ey2 += w * y * y;
      }
      CHECK(ey == 0);
      CHECK(ey2 == a * rational(n * (n - 1), 2));
      const auto r = check_jack_moments(n, a);
      CHECK(r.holds);
      CHECK(r.ey2 == ey2);
    }
}

TEST_CASE("conditional moments of the added content") {
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 2; n <= 8; ++n)
      for (const auto& parts : all_parts(n - 1)) {
        const auto m = conditional_t_moments(Partition(parts), a, n);
        CHECK(m.content_mean == 0);
        CHECK(m.m2 == rational(2, n));
      }
}

TEST_CASE("zero-bias pair table") {
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 2; n <= 7; ++n)
      for (const auto& parts : all_parts(n - 1)) {
        const auto z = zero_bias_pair_distribution(Partition(parts), a, n);
        CHECK(z.normalizer == rational(4, n));
        CHECK(z.total_weight == 1);
      }
}

TEST_CASE("zero-bias identity at n = 2 by hand") {
  // W = +-1 style two-point law: Y = alpha w.p. 1/(1+alpha), -1 w.p. alpha/(1+alpha)
  const BigRational a(3);
  const auto r = check_zero_bias_identity(2, a, Polynomial::monomial(2));
  // E[Y^3] = (alpha^3 - alpha)/(1+alpha) = alpha(alpha-1); S = alpha
  CHECK(r.lhs_y[2] == a * (a - 1));
  CHECK(r.exact_equal);
}

TEST_CASE("zero-bias identity for monomials") {
  for (const auto& a : kAlphas)
    for (std::uint32_t n = 2; n <= 7; ++n)
      for (unsigned k = 1; k <= 5; ++k) {
        const auto r = check_zero_bias_identity(n, a, Polynomial::monomial(k));
        CHECK(r.exact_equal);
        CHECK(r.holds);
        // lhs agrees with E[W^{k+1}] computed from the jack law directly
        BigRational ey = 0;
        for (const auto& parts : all_parts(n)) ey += jack_ref(parts, a) * pow(content_sum_ref(parts, a), k + 1);
        CHECK(r.lhs_y[k] == ey);
      }
  CHECK_THROWS(check_zero_bias_identity(9, BigRational(1), Polynomial::monomial(1)));
}

TEST_CASE("zero-bias samples") {
  Rng rng(4);
  const std::uint32_t n = 6;
  const double a = 2.0;
  // E f'(W*) = E W f(W) = E W^2 = 1 for f = x^2 / 2, so E W* = E W^3 / 2
  double sum = 0.0;
  const int reps = 80000;
  for (int i = 0; i < reps; ++i) sum += zero_bias_sample(n, a, rng).w_star;
  BigRational ey3 = 0;
  for (const auto& parts : all_parts(n)) ey3 += jack_ref(parts, BigRational(2)) * pow(content_sum_ref(parts, BigRational(2)), 3);
  const double s = std::sqrt(2.0 * n * (n - 1) / 2.0);
  CHECK(sum / reps == doctest::Approx(to_double(ey3) / (s * s * s) / 2.0).epsilon(0.05));
}

TEST_CASE("single column probability") {
  for (std::uint32_t n = 1; n <= 8; ++n)
    for (const auto& a : kAlphas) CHECK(single_column_prob(n, a) == jack_ref(Parts(n, 1), a));
  const auto r = check_single_column(10, 1000.0);
  double p = 1.0;
  for (int l = 1; l < 10; ++l) p *= 1000.0 / (1000.0 + l);
  CHECK(r.prob == doctest::Approx(p));
  CHECK(r.lower == doctest::Approx(std::exp(-0.1)));
  CHECK(r.holds);
}

TEST_CASE("rates and bounds") {
  const auto jr = rate_and_region(16, 64.0, 0.4);
  CHECK(jr.r == doctest::Approx(2.0));
  CHECK(jr.in_smiley);
  CHECK_FALSE(rate_and_region(16, 10.0, 0.4).in_smiley);
  CHECK_FALSE(rate_and_region(16, 200.0, 0.4).in_smiley);
  CHECK_THROWS(rate_and_region(16, 64.0, 1.0));
  CHECK(alternative_rate(16, 64.0) == doctest::Approx(1.0 / (0.25 + 0.5)));
  CHECK(wasserstein_bound(10, 2.0) == doctest::Approx(std::sqrt(0.2) * (2 + std::sqrt(2 + 2.0 / 9))));
  CHECK(wasserstein_bound(10, 0.5) == wasserstein_bound(10, 2.0));
}

TEST_CASE("exact kolmogorov distance") {
  // n = 2, alpha = 1: W = +-1 with probability 1/2
  const double phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  CHECK(exact_kolmogorov(2, BigRational(1)) == doctest::Approx(phi1 - 0.5));
  const auto law = jack_w_law(5, BigRational(2));
  double mass = 0.0, m2 = 0.0;
  for (const auto& atom : law) {
    mass += atom.prob;
    m2 += atom.prob * atom.value * atom.value;
  }
  CHECK(mass == doctest::Approx(1.0));
  CHECK(m2 == doctest::Approx(1.0));
}

TEST_CASE("monte carlo reports") {
  Rng rng(12);
  const auto ks = kolmogorov_estimate(8, 2.0, rng, 20000);
  const double exact = exact_kolmogorov(8, BigRational(2));
  CHECK(std::abs(ks.estimate.delta_hat - exact) <= ks.estimate.dkw_band);
  CHECK(ks.theorem_ratio == doctest::Approx(ks.estimate.delta_hat * 8 / std::sqrt(2.0)));

  const auto w = check_wasserstein_bound(8, 2.0, rng, 20000);
  const double w_exact = wasserstein_to_normal(jack_w_law(8, BigRational(2)));
  CHECK(std::abs(w.d1_hat - w_exact) <= w.mc_budget);
  CHECK(w.mc_budget == doctest::Approx(3.0 / std::sqrt(20000.0)));
  CHECK(w.holds_within_mc);

  const auto d = jack_diagnostics(16, 64.0, 0.4, rng, 5000);
  CHECK(d.d_bar == doctest::Approx(10 * 8 / (16 * 0.4)));
  CHECK(d.first_row_limit == doctest::Approx(5.0));
  CHECK(d.fc_bound == doctest::Approx(4 * std::exp(1.0) * 64 / 256));
  CHECK(d.fc_frequency <= d.fc_bound);
  CHECK(d.samples == 5000);
}
