#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "steinkit/cli/commands.hpp"

using namespace steinkit;
using namespace steinkit::cli;

namespace {

std::string bin() {
  const char* b = std::getenv("STEINKIT_BIN");
  return b ? b : "./steinkit";
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "steinkit_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

int run_cmd(const std::string& args, std::string* stdout_text = nullptr) {
  const auto out = scratch("stdout.txt");
  const std::string cmd = bin() + " " + args + " > " + out.string() + " 2> " + scratch("stderr.txt").string();
  const int status = std::system(cmd.c_str());
  if (stdout_text) {
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    *stdout_text = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig base(const std::string& command) {
  ExperimentConfig c;
  c.command = command;
  c.grid = default_grid(command);
  c.threads = 2;
  return c;
}

const Row* find(const Report& r, const std::string& params, const std::string& quantity) {
  for (const auto& row : r.rows)
    if (row.params == params && row.quantity == quantity) return &row;
  return nullptr;
}

}  // namespace

TEST_CASE("settings and validation") {
  ExperimentConfig c = base("er-report");
  apply_setting(c, "samples", "500");
  apply_setting(c, "format", "json");
  apply_setting(c, "thresholds", "100,10,2");
  CHECK(c.samples == 500);
  CHECK(c.format == OutputFormat::json);
  CHECK(c.thresholds.n_bar == 100);
  CHECK(c.thresholds.c_bar == 2);
  CHECK_THROWS_AS(apply_setting(c, "nope", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "samples", "-3"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "format", "xml"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "thresholds", "1,2"), ConfigError);

  c.samples = 50;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.samples = 100;
  CHECK_NOTHROW(validate(c));
  c.grid = "  ";
  CHECK_THROWS_AS(validate(c), ConfigError);
  auto v = base("verify");
  v.samples = 1;
  CHECK_NOTHROW(validate(v));
}

TEST_CASE("config file") {
  const auto path = scratch("conf.txt");
  {
    std::ofstream out(path);
    out << "# comment\n\nsamples = 300\nseed=9  # trailing\ngrid=4:2\n";
  }
  ExperimentConfig c = base("er-report");
  apply_config_file(c, path.string());
  CHECK(c.samples == 300);
  CHECK(c.seed == 9);
  CHECK(c.grid == "4:2");
  {
    std::ofstream out(path);
    out << "samples 300\n";
  }
  CHECK_THROWS_AS(apply_config_file(c, path.string()), ConfigError);
  CHECK_THROWS_AS(apply_config_file(c, "/nonexistent/x.conf"), ConfigError);
}

TEST_CASE("grid parsing") {
  const auto er = parse_er_grid("400:0.5n, 400:n;400:2n,4:2");
  REQUIRE(er.size() == 4);
  CHECK(er[0].m == 200);
  CHECK(er[1].m == 400);
  CHECK(er[2].m == 800);
  CHECK(er[3].n == 4);
  CHECK_THROWS_AS(parse_er_grid(""), ConfigError);
  CHECK_THROWS_AS(parse_er_grid("4:6"), ConfigError);
  CHECK_THROWS_AS(parse_er_grid("4"), ConfigError);

  const auto jack = parse_jack_grid("16:n^1.5,4:3/2,5:n^3");
  CHECK(jack[0].alpha.value == doctest::Approx(64.0));
  CHECK_FALSE(jack[0].alpha.exact.has_value());
  CHECK(*jack[1].alpha.exact == BigRational(3, 2));
  CHECK(*jack[2].alpha.exact == 125);
  CHECK_THROWS_AS(parse_jack_grid("1:2"), ConfigError);
  CHECK_THROWS_AS(parse_jack_grid("4:-1"), ConfigError);

  CHECK(parse_hyp_grid("20:5:4")[0].params.special == 4);
  CHECK_THROWS_AS(parse_hyp_grid("3:4:1"), ConfigError);
  CHECK_THROWS_AS(parse_recursion_grid("1.5:1"), ConfigError);
}

TEST_CASE("worker pool covers every index once") {
  std::vector<std::atomic<int>> hits(500);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(10, 3, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
}

TEST_CASE("csv and json carry the same rows") {
  Report r;
  r.command = "demo";
  r.add("n=4;m=2", "mu", "0.8");
  r.add("a,b", "x", "1", "2", Holds::no, true);
  std::ostringstream csv, js;
  write_csv(r, csv);
  write_json(r, js);
  CHECK(csv.str() == "# schema=1 command=demo\nparams,quantity,value,bound,holds\nn=4;m=2,mu,0.8,,\n\"a,b\",x,1,2,false\n");
  const auto doc = nlohmann::json::parse(js.str());
  CHECK(doc["schema"] == 1);
  REQUIRE(doc["rows"].size() == 2);
  CHECK(doc["rows"][1]["params"] == "a,b");
  CHECK(doc["rows"][1]["holds"] == "false");
  CHECK(r.failures() == std::vector<std::string>{"a,b:x"});
  CHECK(fmt(0.1) == "0.1");
  CHECK(fmt(1.0 / 3.0) == "0.3333333333");
}

TEST_CASE("er report rows") {
  auto c = base("er-report");
  c.grid = "4:2,40:0.1n,40:5n";
  c.samples = 4000;
  const auto r = er_report(c);
  CHECK(find(r, "n=4;m=2", "mu")->value == "0.8");
  CHECK(find(r, "n=4;m=2", "sigma2")->value == "0.16");
  CHECK(find(r, "n=40;m=4", "domain")->value == "left");
  CHECK(find(r, "n=40;m=200", "domain")->value == "right");
  CHECK(find(r, "n=4;m=2", "domain")->value == "central");
  // (4,2): exact delta within the band of the estimate
  const auto* ex = find(r, "n=4;m=2", "exact_delta");
  REQUIRE(ex);
  CHECK(ex->holds == Holds::yes);
  REQUIRE(find(r, "grid", "max_delta_times_rate"));
  CHECK(r.failures().empty());
  // identical config, different worker count: identical rows
  c.threads = 1;
  const auto again = er_report(c);
  REQUIRE(again.rows.size() == r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) CHECK(again.rows[i].value == r.rows[i].value);
}

TEST_CASE("jack report rows") {
  auto c = base("jack-report");
  c.grid = "2:1,16:n^1.5,6:n^3";
  c.samples = 2000;
  const auto r = jack_report(c);
  const double phi1 = 0.5 * std::erfc(-1.0 / std::sqrt(2.0));
  CHECK(std::stod(find(r, "n=2;alpha=1", "exact_delta")->value) == doctest::Approx(phi1 - 0.5).epsilon(1e-9));
  CHECK(find(r, "n=16;alpha=n^1.5", "smiley")->value == "true");
  CHECK(find(r, "n=6;alpha=n^3", "degenerate")->value == "true");
  REQUIRE(find(r, "n=16;alpha=n^1.5", "fc_frequency"));
  CHECK(r.failures().empty());
}

TEST_CASE("verify suite and mutation") {
  auto c = base("verify");
  const auto r = verify_suite(c);
  CHECK(r.failures().empty());
  for (const auto& row : r.rows) CHECK(row.holds == Holds::yes);
  c.kerov_perturbation = BigRational(1, 50);
  const auto bad = verify_suite(c);
  const auto failed = bad.failures();
  CHECK(std::find(failed.begin(), failed.end(), "kerov_normalization") != failed.end());
  CHECK(std::find(failed.begin(), failed.end(), "jack_normalization") == failed.end());
  // the perturbation does not leak out of the run
  c.kerov_perturbation.reset();
  CHECK(verify_suite(c).failures().empty());
}

TEST_CASE("hyp and recursion reports") {
  auto h = base("hyp");
  h.grid = "3:1:2";
  const auto r = hyp_report(h);
  CHECK(find(r, "N=3;m=1;n=2", "mean")->value == "2/3");
  CHECK(find(r, "N=3;m=1;n=2", "p_zero")->value == "1/3");
  CHECK(r.failures().empty());

  auto q = base("recursion");
  q.grid = "0.5:1";
  const auto rr = recursion_report(q);
  CHECK(find(rr, "q=0.5;c=1", "a_2")->value == "1.5");
  CHECK(find(rr, "q=0.5;c=1", "limit")->value == "2");
  CHECK(find(rr, "q=0.5;c=1", "chain50_sup")->holds == Holds::yes);
}

TEST_CASE("binary: exit codes") {
  CHECK(run_cmd("verify") == kExitOk);
  CHECK(run_cmd("verify --perturb-kerov 1/100") == kExitCheckFailed);
  CHECK(run_cmd("er-report --grid ''") == kExitConfig);
  CHECK(run_cmd("er-report --samples 10") == kExitConfig);
  CHECK(run_cmd("er-report --grid 4:9") == kExitConfig);
  CHECK(run_cmd("jack-report --epsilon 1.5") == kExitConfig);
  CHECK(run_cmd("hyp --format yaml") == kExitConfig);
  CHECK(run_cmd("nosuch") == kExitConfig);
  CHECK(run_cmd("") == kExitConfig);
  CHECK(run_cmd("hyp --grid 10:3:2") == kExitOk);
}

TEST_CASE("binary: byte-identical reruns and file output") {
  const auto a = scratch("a.csv"), b = scratch("b.csv");
  const std::string args = "er-report --grid 4:2,30:30 --samples 3000 --seed 77 --out ";
  REQUIRE(run_cmd(args + a.string() + " --threads 2") == 0);
  REQUIRE(run_cmd(args + b.string() + " --threads 1") == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("# schema=1", 0) == 0);

  const auto ja = scratch("a.json"), jb = scratch("b.json");
  REQUIRE(run_cmd("verify --format json --out " + ja.string()) == 0);
  REQUIRE(run_cmd("verify --format json --out " + jb.string()) == 0);
  CHECK(slurp(ja) == slurp(jb));
  CHECK(nlohmann::json::parse(slurp(ja))["rows"].size() > 10);

  std::string s1, s2;
  run_cmd("jack-report --grid 8:2 --samples 500 --seed 5", &s1);
  run_cmd("jack-report --grid 8:2 --samples 500 --seed 6", &s2);
  CHECK(s1 != s2);
}

TEST_CASE("binary: flags override the config file") {
  const auto conf = scratch("override.conf");
  {
    std::ofstream out(conf);
    out << "grid=3:1:2\nformat=json\n";
  }
  std::string text;
  REQUIRE(run_cmd("hyp --config " + conf.string(), &text) == 0);
  CHECK(nlohmann::json::parse(text)["rows"][0]["params"] == "N=3;m=1;n=2");
  REQUIRE(run_cmd("hyp --config " + conf.string() + " --format csv", &text) == 0);
  CHECK(text.rfind("# schema=1 command=hyp", 0) == 0);
}
