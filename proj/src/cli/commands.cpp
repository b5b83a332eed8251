#include "steinkit/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <iostream>
#include <mutex>
#include <thread>

#include "steinkit/er_model.hpp"
#include "steinkit/jack_model.hpp"
#include "steinkit/rng.hpp"
#include "steinkit/stein_core.hpp"

namespace steinkit::cli {

namespace {

enum Task : std::uint64_t { kTaskEr = 1, kTaskJack = 2, kTaskVerify = 3 };

const char* tf(bool b) { return b ? "true" : "false"; }

std::string domain_label(const ErParams& p) {
  const double ratio = static_cast<double>(p.m) / static_cast<double>(p.n);
  if (ratio < 0.25) return "left";
  if (ratio > 4.0) return "right";
  return "central";
}

// Rows for one grid point are built into their own vector and spliced in
// grid order afterwards.
using Rows = std::vector<Row>;

void push(Rows& rows, const std::string& params, std::string quantity, std::string value, std::string bound = "",
          Holds holds = Holds::none, bool gating = false) {
  rows.push_back({params, std::move(quantity), std::move(value), std::move(bound), holds, gating});
}

template <class Point, class Fn>
Report build(const std::string& command, const std::vector<Point>& points, unsigned threads, Fn per_point) {
  std::vector<Rows> parts(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) { parts[i] = per_point(points[i], i); });
  Report report;
  report.command = command;
  for (auto& part : parts)
    for (auto& row : part) report.rows.push_back(std::move(row));
  return report;
}

void add_max_row(Report& report, const std::string& quantity) {
  double max = 0.0;
  bool any = false;
  for (const auto& r : report.rows)
    if (r.quantity == quantity) {
      max = std::max(max, std::stod(r.value));
      any = true;
    }
  if (any) report.add("grid", "max_" + quantity, fmt(max));
}

int finish(const Report& report, const ExperimentConfig& config) {
  emit(report, config);
  const auto failed = report.failures();
  for (const auto& f : failed) std::cerr << "check failed: " << f << "\n";
  return failed.empty() ? kExitOk : kExitCheckFailed;
}

// --- verify suite ----------------------------------------------------------

struct CheckResult {
  bool ok = true;
  std::string detail;

  void fail(const std::string& what) {
    if (ok) detail = what;
    ok = false;
  }
};

using Check = std::pair<std::string, std::function<CheckResult()>>;

const std::vector<BigRational>& alpha_grid() {
  static const std::vector<BigRational> grid{BigRational(1, 2), BigRational(1), BigRational(2), BigRational(5)};
  return grid;
}

std::string at(std::uint64_t n, const BigRational& alpha) {
  return "n=" + std::to_string(n) + " alpha=" + to_string(alpha);
}

CheckResult check_jack_normalization() {
  CheckResult r;
  for (const auto& a : alpha_grid())
    for (std::uint32_t n = 1; n <= 8; ++n) {
      BigRational total = 0;
      for (const auto& p : enumerate_partitions(n)) total += jack_probability(p, a);
      if (total != 1) r.fail(at(n, a));
    }
  if (r.ok) r.detail = "n<=8";
  return r;
}

CheckResult check_kerov_normalization() {
  CheckResult r;
  for (const auto& a : alpha_grid())
    for (std::uint32_t n = 1; n <= 7; ++n)
      for (const auto& p : enumerate_partitions(n)) {
        BigRational total = 0;
        for (const auto& c : kerov_transition_probs(p, a)) total += c.prob;
        if (total != 1) r.fail("from " + p.to_string() + " alpha=" + to_string(a));
      }
  if (r.ok) r.detail = "|lambda|<=7";
  return r;
}

CheckResult check_kerov_consistency() {
  CheckResult r;
  for (const auto& a : alpha_grid())
    for (std::uint32_t n = 1; n <= 8; ++n) {
      const auto law = kerov_chain_law(n, a);
      const auto parts = enumerate_partitions(n);
      if (law.size() != parts.size()) r.fail(at(n, a));
      for (const auto& p : parts) {
        auto it = law.find(p);
        if (it == law.end() || it->second != jack_probability(p, a)) r.fail(at(n, a) + " at " + p.to_string());
      }
    }
  if (r.ok) r.detail = "n<=8";
  return r;
}

CheckResult check_t_moments() {
  CheckResult r;
  for (const auto& a : alpha_grid())
    for (std::uint32_t n = 2; n <= 8; ++n)
      for (const auto& p : enumerate_partitions(n - 1)) {
        const auto m = conditional_t_moments(p, a, n);
        if (m.content_mean != 0 || m.m2 != rational(2, n)) r.fail(at(n, a) + " at " + p.to_string());
      }
  if (r.ok) r.detail = "n-1<=7";
  return r;
}

CheckResult check_content_moments() {
  CheckResult r;
  for (const auto& a : alpha_grid())
    for (std::uint32_t n = 1; n <= 12; ++n)
      if (!check_jack_moments(n, a).holds) r.fail(at(n, a));
  if (r.ok) r.detail = "n<=12";
  return r;
}

CheckResult check_zero_bias() {
  CheckResult r;
  double worst = 0.0;
  for (const auto& a : alpha_grid())
    for (std::uint32_t n = 2; n <= 8; ++n)
      for (unsigned k = 1; k <= 5; ++k) {
        const auto rep = check_zero_bias_identity(n, a, Polynomial::monomial(k));
        worst = std::max(worst, rep.max_abs_err);
        if (!rep.holds) r.fail(at(n, a) + " k=" + std::to_string(k));
      }
  if (r.ok) r.detail = "max_abs_err=" + fmt(worst);
  return r;
}

CheckResult check_er_stein() {
  CheckResult r;
  for (auto [n, m] : {std::pair<std::uint64_t, std::uint64_t>{4, 2}, {5, 3}})
    for (unsigned k = 1; k <= 3; ++k)
      if (!check_stein_identity_exhaustive(ErParams(n, m), Polynomial::monomial(k)).equal)
        r.fail("n=" + std::to_string(n) + " m=" + std::to_string(m) + " k=" + std::to_string(k));
  if (r.ok) r.detail = "(4,2) (5,3) k<=3";
  return r;
}

CheckResult check_er_moments() {
  CheckResult r;
  unsigned cases = 0;
  for (std::uint64_t n = 3; n <= 8; ++n) {
    const std::uint64_t N = n * (n - 1) / 2;
    for (std::uint64_t m = 1; m < N; ++m) {
      if (binomial(N, m) > 100000) continue;
      const ErParams p(n, m);
      const auto counts = enumerate_isolated_law(p);
      BigInt total = 0;
      BigRational s1 = 0, s2 = 0;
      for (std::size_t k = 0; k < counts.size(); ++k) {
        total += counts[k];
        s1 += BigRational(counts[k] * static_cast<unsigned long>(k));
        s2 += BigRational(counts[k] * static_cast<unsigned long>(k * k));
      }
      s1 /= total;
      s2 /= total;
      const auto mom = exact_moments(p);
      if (mom.mu != s1 || mom.sigma2 != s2 - s1 * s1) r.fail("n=" + std::to_string(n) + " m=" + std::to_string(m));
      ++cases;
    }
  }
  if (r.ok) r.detail = std::to_string(cases) + " cases";
  return r;
}

CheckResult check_hyp(unsigned step) {
  CheckResult r;
  for (std::uint64_t N = 10; N <= 60; N += step)
    for (std::uint64_t m = 0; 2 * m <= N; ++m)
      for (std::uint64_t n = 0; 2 * n <= N; ++n) {
        const HypergeometricParams p(N, m, n);
        const std::string where = "N=" + std::to_string(N) + " m=" + std::to_string(m) + " n=" + std::to_string(n);
        for (double t : {0.5, 1.0, 2.0, 4.0})
          if (!check_tail_bound(p, t).holds) r.fail("tail " + where);
        for (unsigned k = 1; k <= 4; ++k)
          if (!check_moment_bound(p, k).holds) r.fail("moment " + where);
      }
  if (r.ok) r.detail = "N in [10,60] step " + std::to_string(step);
  return r;
}

CheckResult check_lemma3_grid(std::uint64_t max_n) {
  CheckResult r;
  for (std::uint64_t N = 1; N <= max_n; ++N)
    for (std::uint64_t m = 0; m <= N; ++m)
      for (std::uint64_t n = 0; n <= N; ++n)
        if (!check_lemma3(HypergeometricParams(N, m, n)).holds)
          r.fail("N=" + std::to_string(N) + " m=" + std::to_string(m) + " n=" + std::to_string(n));
  if (r.ok) r.detail = "N<=" + std::to_string(max_n);
  return r;
}

CheckResult check_lemma4_grid() {
  CheckResult r;
  for (int i = 0; i <= 900; ++i) {
    const double x = std::pow(10.0, -6.0 + i / 100.0);
    if (!check_lemma4(x).holds) r.fail("x=" + fmt(x));
  }
  if (r.ok) r.detail = "901 points in [1e-6,1e3]";
  return r;
}

CheckResult check_lemma5_grid(std::uint64_t max_n) {
  CheckResult r;
  for (std::uint64_t n = 3; n <= max_n; ++n)
    for (std::uint64_t m = 1; m < n * (n - 1) / 2; ++m)
      if (!check_negative_correlation(ErParams(n, m)).holds)
        r.fail("n=" + std::to_string(n) + " m=" + std::to_string(m));
  if (r.ok) r.detail = "n<=" + std::to_string(max_n);
  return r;
}

CheckResult check_lemma6_grid(std::uint64_t max_n) {
  CheckResult r;
  std::uint64_t checked = 0;
  for (std::uint64_t n = 6; n <= max_n; ++n) {
    const auto s = lemma6_sweep(n);
    checked += s.checked;
    if (s.failures) r.fail("n=" + std::to_string(n) + " m=" + std::to_string(s.first_failing_m));
  }
  if (r.ok) r.detail = std::to_string(checked) + " cases, n<=" + std::to_string(max_n);
  return r;
}

CheckResult check_lemma1() {
  CheckResult r;
  auto run = [&](const std::string& name, const PermutationFunction& h, unsigned N, unsigned n_sigma) {
    if (!check_efron_stein(h, N, n_sigma).holds) r.fail(name);
  };
  run("constant", [](const Permutation&, std::span<const Permutation>) { return BigRational(7); }, 3, 1);
  run("first_fixed", [](const Permutation& pi, std::span<const Permutation>) { return BigRational(pi[0] == 1); }, 3,
      1);
  for (std::uint64_t m = 1; m <= 2; ++m) {
    const ErParams p(3, m);
    run("isolated m=" + std::to_string(m),
        [p](const Permutation& pi, std::span<const Permutation>) {
          return BigRational(static_cast<unsigned long>(isolated_count(ErGraphState::from_permutation(p, pi))));
        },
        3, 1);
  }
  if (r.ok) r.detail = "N=3";
  return r;
}

FiniteKernel chain_kernel(std::size_t states, double q) {
  // State i < states-1 moves to i+1 with X = 1; the last state is absorbing
  // outside the smiley set. Rates shrink by 2q per step.
  FiniteKernel k;
  k.transitions.resize(states);
  k.smiley.assign(states, true);
  k.rate.resize(states);
  for (std::size_t i = 0; i < states; ++i) k.rate[i] = std::pow(2.0 * q, -static_cast<double>(i));
  for (std::size_t i = 0; i + 1 < states; ++i) k.transitions[i].push_back({i + 1, 1.0, 1.0});
  k.smiley[states - 1] = false;
  return k;
}

CheckResult check_recursion(std::uint64_t seed) {
  CheckResult r;
  Rng rng = Rng::for_stream(seed, kTaskVerify, 0);
  for (int t = 0; t < 100; ++t) {
    const RecursionSpec spec(0.01 + 0.98 * rng.uniform01(), 10.0 * rng.uniform01());
    double prev = recursion_closed_form(spec, 1);
    if (std::abs(prev - 1.0) > 1e-14) r.fail("a_1");
    for (unsigned n = 2; n <= 50; ++n) {
      const double cur = recursion_closed_form(spec, n);
      if (std::abs(cur - (spec.q * prev + spec.c)) > 1e-14 * std::max(1.0, std::abs(cur))) r.fail("step");
      prev = cur;
    }
    const auto sol = recursion_bound_solve(chain_kernel(50, spec.q), spec);
    if (sol.refused || !sol.sup_ok) r.fail("chain q=" + fmt(spec.q));
  }
  if (r.ok) r.detail = "100 random (q,c)";
  return r;
}

CheckResult check_toy_couplings() {
  CheckResult r;
  // W = +-1, W' flips sign with probability 1/4: a Stein pair with lambda 1/2.
  std::vector<PairAtom> joint;
  for (int w : {-1, 1}) {
    joint.push_back({BigRational(w), BigRational(w), BigRational(3, 8)});
    joint.push_back({BigRational(w), BigRational(-w), BigRational(1, 8)});
  }
  if (!check_stein_pair(joint, BigRational(1, 2)).is_stein_pair) r.fail("stein pair");

  const auto two = DiscreteLaw::from_weights({{BigRational(2), BigRational(1, 3)}, {BigRational(-1), BigRational(2, 3)}});
  const auto zb = zero_bias_two_point(two);
  for (unsigned k = 0; k <= 4; ++k)
    if (!zero_bias_identity_holds(two, zb, Polynomial::monomial(k))) r.fail("zero bias k=" + std::to_string(k));

  std::vector<Atom> bin;
  for (unsigned k = 0; k <= 4; ++k) bin.push_back({BigRational(k), rational(binomial(4, k), 16)});
  const auto law = DiscreteLaw::from_weights(bin);
  if (!check_size_bias(law, size_bias_law(law)).holds) r.fail("size bias");
  if (r.ok) r.detail = "stein pair, zero bias, size bias";
  return r;
}

std::vector<Check> verify_checks(const ExperimentConfig& config) {
  const std::uint64_t seed = config.seed;
  return {
      {"jack_normalization", check_jack_normalization},
      {"kerov_normalization", check_kerov_normalization},
      {"kerov_consistency", check_kerov_consistency},
      {"t_moments", check_t_moments},
      {"content_moments", check_content_moments},
      {"zero_bias_identity", check_zero_bias},
      {"er_stein_identity", check_er_stein},
      {"er_moments", check_er_moments},
      {"hyp_tail_moment", [] { return check_hyp(5); }},
      {"lemma3", [] { return check_lemma3_grid(40); }},
      {"lemma4", check_lemma4_grid},
      {"lemma5", [] { return check_lemma5_grid(30); }},
      {"lemma6", [] { return check_lemma6_grid(60); }},
      {"lemma1_efron_stein", check_lemma1},
      {"recursion", [seed] { return check_recursion(seed); }},
      {"toy_couplings", check_toy_couplings},
  };
}

}  // namespace

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Report er_report(const ExperimentConfig& config) {
  const auto points = parse_er_grid(config.grid);
  auto report = build("er-report", points, config.threads, [&](const ErPoint& pt, std::size_t i) {
    Rows rows;
    const ErParams p(pt.n, pt.m);
    const std::string id = "n=" + std::to_string(pt.n) + ";m=" + std::to_string(pt.m);
    const auto mom = exact_moments(p);
    const auto approx = asymptotic_moments(p);
    const double r = rate(p, mom);
    push(rows, id, "domain", domain_label(p));
    push(rows, id, "mu", fmt(to_double(mom.mu)));
    push(rows, id, "sigma2", fmt(to_double(mom.sigma2)));
    push(rows, id, "mu_approx", fmt(approx.mu));
    push(rows, id, "sigma2_approx", fmt(approx.sigma2));
    push(rows, id, "rate", fmt(r));
    push(rows, id, "smiley", tf(smiley_membership(p, config.thresholds)));

    const auto l5 = check_negative_correlation(p);
    push(rows, id, "lemma5", tf(l5.holds), "", holds_of(l5.holds), true);
    const auto l6 = check_lemma6(p);
    if (l6.applicable) {
      const bool ok = l6.holds_mu && l6.holds_sigma;
      push(rows, id, "lemma6", tf(ok), "", holds_of(ok), true);
    } else {
      push(rows, id, "lemma6", "not_applicable");
    }

    Rng rng = Rng::for_stream(config.seed, kTaskEr, i);
    const auto est = kolmogorov_estimate(p, rng, config.samples, config.confidence);
    push(rows, id, "delta_hat", fmt(est.delta_hat), fmt(est.dkw_band));
    push(rows, id, "delta_times_rate", fmt(est.delta_hat * r));
    if (binomial(p.slots(), p.m) <= 1000000) {
      const double exact = exact_kolmogorov(p);
      const bool ok = std::abs(exact - est.delta_hat) <= est.dkw_band;
      push(rows, id, "exact_delta", fmt(exact), fmt(est.dkw_band), holds_of(ok));
    }
    return rows;
  });
  add_max_row(report, "delta_times_rate");
  return report;
}

Report jack_report(const ExperimentConfig& config) {
  const auto points = parse_jack_grid(config.grid);
  auto report = build("jack-report", points, config.threads, [&](const JackPoint& pt, std::size_t i) {
    Rows rows;
    const std::uint32_t n = pt.n;
    const double alpha = pt.alpha.value;
    const std::string id = "n=" + std::to_string(n) + ";alpha=" + pt.alpha.text;
    const auto jr = rate_and_region(n, alpha, config.epsilon);
    push(rows, id, "alpha", fmt(alpha));
    push(rows, id, "rate", fmt(jr.r));
    push(rows, id, "smiley", tf(jr.in_smiley));

    Rng rng = Rng::for_stream(config.seed, kTaskJack, i);
    const auto ks = kolmogorov_estimate(n, alpha, rng, config.samples, config.confidence);
    push(rows, id, "delta_hat", fmt(ks.estimate.delta_hat), fmt(ks.estimate.dkw_band));
    push(rows, id, "delta_times_rate", fmt(ks.theorem_ratio));
    push(rows, id, "delta_times_alt_rate", fmt(ks.alternative_ratio));
    if (pt.alpha.exact && n <= 12) {
      const double exact = exact_kolmogorov(n, *pt.alpha.exact);
      const bool ok = std::abs(exact - ks.estimate.delta_hat) <= ks.estimate.dkw_band;
      push(rows, id, "exact_delta", fmt(exact), fmt(ks.estimate.dkw_band), holds_of(ok));
    }

    const auto w1 = check_wasserstein_bound(n, alpha, rng, config.samples);
    push(rows, id, "wasserstein", fmt(w1.d1_hat), fmt(w1.bound), holds_of(w1.holds_within_mc));

    double prob = 0.0;
    if (pt.alpha.exact)
      prob = to_double(single_column_prob(n, *pt.alpha.exact));
    else
      prob = check_single_column(n, alpha).prob;
    const double lower = std::exp(-static_cast<double>(n) * n / alpha);
    push(rows, id, "single_column", fmt(prob), fmt(lower), holds_of(prob >= lower * (1.0 - 1e-12)), true);
    push(rows, id, "degenerate", tf(prob >= std::exp(-1.0 / n)));

    if (jr.in_smiley && n >= 3) {
      const auto diag = jack_diagnostics(n, alpha, config.epsilon, rng, config.samples);
      push(rows, id, "fc_frequency", fmt(diag.fc_frequency), fmt(diag.fc_bound));
      push(rows, id, "d_exceed_frequency", fmt(diag.d_exceed_frequency), fmt(diag.d_bar));
    }
    return rows;
  });
  add_max_row(report, "delta_times_rate");
  return report;
}

Report verify_suite(const ExperimentConfig& config) {
  const auto checks = verify_checks(config);
  std::vector<CheckResult> results(checks.size());
  if (config.kerov_perturbation) set_kerov_perturbation(*config.kerov_perturbation);
  try {
    parallel_for(checks.size(), config.threads, [&](std::size_t i) {
      try {
        results[i] = checks[i].second();
      } catch (const std::exception& ex) {
        results[i].fail(std::string("error: ") + ex.what());
      }
    });
  } catch (...) {
    set_kerov_perturbation(BigRational(0));
    throw;
  }
  set_kerov_perturbation(BigRational(0));
  Report report;
  report.command = "verify";
  for (std::size_t i = 0; i < checks.size(); ++i)
    report.add("", checks[i].first, results[i].detail, "", holds_of(results[i].ok), true);
  return report;
}

Report recursion_report(const ExperimentConfig& config) {
  const auto points = parse_recursion_grid(config.grid);
  return build("recursion", points, config.threads, [&](const RecursionPoint& pt, std::size_t) {
    Rows rows;
    const RecursionSpec spec(pt.q, pt.c);
    const std::string id = "q=" + fmt(pt.q) + ";c=" + fmt(pt.c);
    const double ceiling = spec.c / (1.0 - spec.q);
    for (unsigned n : {1u, 2u, 10u, 100u}) push(rows, id, "a_" + std::to_string(n), fmt(recursion_closed_form(spec, n)));
    push(rows, id, "limit", fmt(ceiling));
    const auto sol = recursion_bound_solve(chain_kernel(50, spec.q), spec);
    if (sol.refused) {
      push(rows, id, "chain50_sup", "refused: " + sol.diagnostic, fmt(ceiling), Holds::no, true);
    } else {
      push(rows, id, "chain50_sup", fmt(sol.sup), fmt(ceiling + 1e-9), holds_of(sol.sup_ok), true);
      push(rows, id, "chain50_iterations", std::to_string(sol.iterations));
    }
    return rows;
  });
}

Report hyp_report(const ExperimentConfig& config) {
  const auto points = parse_hyp_grid(config.grid);
  return build("hyp", points, config.threads, [&](const HypPoint& pt, std::size_t) {
    Rows rows;
    const auto& p = pt.params;
    const std::string id =
        "N=" + std::to_string(p.population) + ";m=" + std::to_string(p.draws) + ";n=" + std::to_string(p.special);
    const BigRational m1 = hyp_moment(p, 1);
    const BigRational m2 = hyp_moment(p, 2);
    push(rows, id, "mean", to_string(m1));
    push(rows, id, "variance", to_string(m2 - m1 * m1));
    push(rows, id, "p_zero", to_string(hyp_zero_prob(p)));
    const auto l3 = check_lemma3(p);
    push(rows, id, "lemma3", fmt(l3.p0), fmt(l3.lower) + ".." + fmt(l3.upper), holds_of(l3.holds), true);
    for (double t : {0.5, 1.0, 2.0, 4.0}) {
      const auto b = check_tail_bound(p, t);
      push(rows, id, "tail_t=" + fmt(t), fmt(b.lhs), fmt(b.rhs), holds_of(b.holds), true);
    }
    for (unsigned k = 1; k <= 4; ++k) {
      const auto b = check_moment_bound(p, k);
      push(rows, id, "moment_k=" + std::to_string(k), fmt(b.lhs), fmt(b.rhs), holds_of(b.holds), true);
    }
    return rows;
  });
}

int run_er_report(const ExperimentConfig& config) { return finish(er_report(config), config); }
int run_jack_report(const ExperimentConfig& config) { return finish(jack_report(config), config); }
int run_verify_suite(const ExperimentConfig& config) { return finish(verify_suite(config), config); }
int run_recursion(const ExperimentConfig& config) { return finish(recursion_report(config), config); }
int run_hyp(const ExperimentConfig& config) { return finish(hyp_report(config), config); }

int run(const ExperimentConfig& config) {
  if (config.command == "er-report") return run_er_report(config);
  if (config.command == "jack-report") return run_jack_report(config);
  if (config.command == "verify") return run_verify_suite(config);
  if (config.command == "recursion") return run_recursion(config);
  if (config.command == "hyp") return run_hyp(config);
  throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace steinkit::cli
