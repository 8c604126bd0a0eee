#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "apm/harness/config.hpp"
#include "apm/harness/population.hpp"
#include "apm/harness/report.hpp"
#include "apm/harness/sweep.hpp"
#include "apm/scenario.hpp"
#include "support.hpp"

using namespace apm;
using namespace apm::harness;

namespace {

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("empty config yields the default scenario") {
  const auto c = parse_config("");
  const auto& la = c.scenario.la;
  CHECK(la.c == 5.0);
  CHECK(la.c_l == 0.2);
  CHECK(la.phi_d == 1.0);
  CHECK(la.kappa == 0.05);
  CHECK(la.lambda_m == 0.3);
  CHECK(la.lambda_n == 3.0);
  CHECK(la.f == 312000.0);
  CHECK(la.g_m == 60000.0);
  CHECK(la.g_n == 600000.0);
  CHECK(la.p_max == 25.0);
  CHECK(la.r_max == 100.0);
  CHECK(c.scenario.alpha == 15.0);
  CHECK(c.scenario.a == 1.0 / 160.0);
  CHECK(c.scenario.b == 0.1);
  CHECK(c.scenario.mu_th == 15.0);
  CHECK(c.scenario.tau_th == 0.08);
  CHECK(c.scenario.lambda_bar == 1.5);
  CHECK(c.scenario.popa == 1.5);
  CHECK(c.scenario.followers == 6);
  CHECK(c.scenario.servers == 3);
  CHECK(c.scenario.x == 0);
}

TEST_CASE("config parsing") {
  const auto c = parse_config(
      "# comment\n[market]\nc = 4.5\neta1 = 0.8\nsweep_axis = POPA_BAR\nsweep_values = 1.3, 1.5\n"
      "methods = EQUILIBRIUM_DERIVED, RANDOM\nseeds = 3, 4\navatars = true\noutput = out/x.csv\n");
  CHECK(c.scenario.la.c == 4.5);
  CHECK(c.scenario.la.eta2 == doctest::Approx(0.2));
  CHECK(c.axis == SweepAxis::PopaBar);
  CHECK(c.sweep_values == std::vector<double>{1.3, 1.5});
  CHECK(c.methods == std::vector<Method>{Method::EquilibriumDerived, Method::Random});
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 4});
  CHECK(c.scenario.x == 1);
  CHECK(c.output == "out/x.csv");
  CHECK(config_keys().size() > 50);
}

TEST_CASE("config errors") {
  try {
    parse_config("alpha = -1\n");
    FAIL("expected a validation error");
  } catch (const ConfigValidationError& e) {
    CHECK(e.key() == "alpha");
    CHECK(std::string(e.what()) == "alpha must be positive");
  }
  try {
    parse_config("c = 5\n\nunknown_key = 3\n");
    FAIL("expected a parse error");
  } catch (const ConfigParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_config("hidden_width = 0\n"), ConfigValidationError);
  CHECK_THROWS_AS(parse_config("c = 5\nc = 6\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config("c = five\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config("c\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config("sweep_values = 2, 1\n"), ConfigValidationError);
  CHECK_THROWS_AS(parse_config("methods = NOPE\n"), ConfigParseError);
  CHECK_THROWS_AS(parse_config("p_max = 4\n"), ConfigValidationError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("sweep rows and seeds") {
  ExperimentConfig c;
  c.sweep_values = {1.5};
  c.seeds = {1, 2, 3};
  CHECK(run_sweep(c).size() == 3);

  c = ExperimentConfig{};
  c.methods = {Method::EquilibriumDerived, Method::EquilibriumPaperForm, Method::Random};
  c.eval_episodes = 2;
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 15);
  CHECK(rows[0].method == Method::EquilibriumDerived);
  CHECK(rows[1].method == Method::EquilibriumPaperForm);
  CHECK(rows[3].sweep_value == 1.25);

  CHECK(market_seed(1, 0) != market_seed(1, 1));
  CHECK(cell_seed(1, 0, 0) != cell_seed(1, 0, 1));
  CHECK(market_seed(1, 0) == market_seed(1, 0));
}

TEST_CASE("default row reproduces the equilibrium") {
  ExperimentConfig c;
  c.sweep_values = {1.5};
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0].price - test::kDerivedPrice) <= 1e-6);
  CHECK(std::abs(rows[0].total_demand - test::kDerivedTotal) <= 1e-6);
}

TEST_CASE("sweep trends and dominance") {
  ExperimentConfig c;
  c.methods = {Method::EquilibriumDerived, Method::Random};
  c.eval_episodes = 20;
  auto rows = run_sweep(c);
  for (std::size_t v = 1; v < 5; ++v) CHECK(rows[2 * v].la_utility > rows[2 * (v - 1)].la_utility);
  for (std::size_t v = 0; v < 5; ++v) CHECK(rows[2 * v].la_utility >= rows[2 * v + 1].la_utility);

  c.axis = SweepAxis::PopaBar;
  c.sweep_values = {1.3, 1.4, 1.5, 1.6, 1.7};
  rows = run_sweep(c);
  for (std::size_t v = 0; v < 5; ++v) CHECK(rows[2 * v].la_utility >= rows[2 * v + 1].la_utility);
}

TEST_CASE("failed cells are recorded") {
  auto c = parse_config("alpha = 1\nsweep_values = 1.5\n");
  const auto rows = run_sweep(c);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error.has_value());
  CHECK(std::isnan(rows[0].la_utility));
  const auto summary = format_summary(rows);
  CHECK(summary.find("no successful cells") != std::string::npos);
  const auto files = emit_report(rows, std::filesystem::temp_directory_path() / "apm_fail.csv");
  CHECK_FALSE(files.any_success);
  CHECK(files.any_failure);
  CHECK(read(files.csv).find("nan") != std::string::npos);
}

TEST_CASE("report formatting") {
  std::vector<SweepRow> rows;
  for (int i = 0; i < 15; ++i) {
    SweepRow r;
    r.sweep_value = 1.0 + (i / 3) * 0.25;
    r.method = i % 3 == 0 ? Method::EquilibriumDerived : (i % 3 == 1 ? Method::Drl : Method::Random);
    r.seed = 1;
    r.la_utility = 1.0 + i;
    r.price = 8.0;
    r.total_demand = 4.0;
    r.wall_ms = 1.5;
    rows.push_back(r);
  }
  const auto csv = format_csv(rows);
  CHECK(line_count(csv) == 16);
  CHECK(csv.substr(0, csv.find('\n')) == kCsvHeader);
  CHECK(csv.find("1,EQUILIBRIUM_DERIVED,1,1,8,4,1.500\n") != std::string::npos);
  CHECK(csv.find('\r') == std::string::npos);
  const auto summary = format_summary(rows);
  CHECK(summary.find("drl_over_equilibrium") != std::string::npos);
  CHECK(summary.find("2.0000") != std::string::npos);  // 2 / 1 at the first value

  const auto path = std::filesystem::temp_directory_path() / "apm_report.csv";
  const auto files = emit_report(rows, path);
  CHECK(read(files.csv) == csv);
  CHECK(read(files.summary) == summary);
  CHECK(files.any_success);
  CHECK_FALSE(files.any_failure);
}

TEST_CASE("population csv") {
  const auto pop = sample_population(Scenario{}, 5);
  REQUIRE(pop.size() == 6);
  for (std::size_t i = 0; i < pop.size(); ++i) {
    CHECK(pop[i].cache.cached_m.size() == 1);
    CHECK(pop[i].cache.cached_m == pop[(i + 3) % 6].cache.cached_m);  // round-robin over 3 servers
  }
  const auto parsed = parse_population_csv(
      "id,alpha,popa,gain,gamma,mu,mu_th,tau,tau_th,x,omega1,omega2,model_m,model_n,cached_m,cached_n\n"
      "7,15,1.5,2.2987738814657956,1.75,30,15,0.04,0.08,1,0.5,0.5,0,2,0;1,\n");
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].smu.id == 7);
  CHECK(parsed[0].smu.x == 1);
  CHECK(parsed[0].cache.cached_m == std::set<int>{0, 1});
  CHECK(parsed[0].cache.cached_n.empty());
  CHECK_THROWS(parse_population_csv("id,alpha\n1,2\n"));
}
