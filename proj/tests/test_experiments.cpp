#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "cvarbound/concentration.hpp"
#include "cvarbound/error.hpp"
#include "cvarbound/experiments.hpp"
#include "cvarbound/rng.hpp"

using namespace cvarbound;
using namespace cvarbound::experiments;

namespace {

ExperimentConfig small(ExperimentKind kind) {
  ExperimentConfig c = default_config(kind);
  c.true_cvar_nodes = 20000;
  c.workers = 4;
  switch (kind) {
    case ExperimentKind::SurrogateConvergence:
      c.n_grid = {100, 1000};
      c.repetitions = 5;
      break;
    case ExperimentKind::Timing:
      c.n_grid = {1000};
      c.repetitions = 2;
      c.timing_repeats = 3;
      break;
    case ExperimentKind::Coincidence:
      c.n_grid = {10, 100};
      c.repetitions = 3;
      c.b_truncation = 50.0;
      break;
    case ExperimentKind::Coverage:
      c.n_grid = {100};
      c.repetitions = 20;
      break;
  }
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("experiment names round-trip") {
  for (auto k : {ExperimentKind::SurrogateConvergence, ExperimentKind::Timing, ExperimentKind::Coincidence,
                 ExperimentKind::Coverage})
    CHECK(parse_experiment(to_string(k)) == k);
  try {
    parse_experiment("nope");
    FAIL("expected throw");
  } catch (const ValidationError& e) {
    CHECK(e.code() == "unknown_experiment");
  }
}

TEST_CASE("config validation") {
  auto c = small(ExperimentKind::Coverage);
  CHECK_NOTHROW(c.validate());
  c.n_grid.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small(ExperimentKind::Coverage);
  c.delta = 1.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small(ExperimentKind::Coincidence);
  c.delta = 0.6;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = small(ExperimentKind::SurrogateConvergence);
  c.distributions = {dist::Beta{2, 2}};
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("config JSON overlay and round trip") {
  const auto base = default_config(ExperimentKind::Coverage);
  const auto c = config_from_json(nlohmann::json{{"alpha", 0.1}, {"n_grid", {10, 20}}, {"b_truncation", 3.0}}, base);
  CHECK(c.alpha == 0.1);
  CHECK(c.n_grid.size() == 2);
  CHECK(c.repetitions == base.repetitions);
  CHECK(*c.b_truncation == 3.0);
  const auto back = config_from_json(config_to_json(c), default_config(ExperimentKind::Timing));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"alpha", "x"}}, base), ValidationError);
}

TEST_CASE("row counts are |n_grid| x reps x kinds") {
  auto cov = small(ExperimentKind::Coverage);
  CHECK(run_coverage(cov).size() == 20);
  auto coin = small(ExperimentKind::Coincidence);
  CHECK(run_coincidence(coin).size() == 7 * 2 * 3 * 2);
  auto sur = small(ExperimentKind::SurrogateConvergence);
  CHECK(run_surrogate_convergence(sur).size() == 2 * 5 * 2);
}

TEST_CASE("results do not depend on worker count and replay from the row seed") {
  auto c = small(ExperimentKind::Coverage);
  c.workers = 1;
  const auto a = run_coverage(c);
  c.workers = 8;
  const auto b = run_coverage(c);
  CHECK(to_csv(a) == to_csv(b));

  const auto& row = a[7];
  CHECK(*row.seed == cell_seed(c.master_seed, 0, 100, 7));
  const auto& spec = c.distributions[0];
  const auto batch = dist::sample(spec, row.n, *row.seed);
  const auto rep = ecdf_cvar_bounds(batch, TailLevel(c.alpha), c.delta, SupportBounds{spec.lower(), spec.upper()});
  CHECK(*rep.lower == *row.lower);
  CHECK(*rep.upper == *row.upper);
}

TEST_CASE("cell seeds follow the nested derivation") {
  CHECK(cell_seed(5, 2, 100, 3) == derive_seed(derive_seed(derive_seed(5, 2), 100), 3));
  CHECK(cell_seed(5, 2, 100, 3) != cell_seed(5, 2, 100, 4));
  CHECK(cell_seed(5, 2, 100, 3) != cell_seed(5, 1, 100, 3));
}

TEST_CASE("outputs are byte-identical across reruns") {
  const auto dir = std::filesystem::temp_directory_path() / "cvarbound_test_outputs";
  std::filesystem::remove_all(dir);
  auto c = small(ExperimentKind::Coincidence);
  std::string csv[2], manifest[2];
  for (int i = 0; i < 2; ++i) {
    c.output_path = (dir / ("run" + std::to_string(i)) / "out.csv").string();
    c.workers = 1 + 3 * i;
    write_outputs(c, run_coincidence(c));
    csv[i] = slurp(c.output_path);
    manifest[i] = slurp(dir / ("run" + std::to_string(i)) / "out.manifest.json");
    CHECK(std::filesystem::exists(dir / ("run" + std::to_string(i)) / "out.meta.json"));
  }
  CHECK(csv[0] == csv[1]);
  // Only output_path and workers differ between the two configs.
  auto j0 = nlohmann::json::parse(manifest[0]);
  auto j1 = nlohmann::json::parse(manifest[1]);
  for (auto* j : {&j0, &j1}) {
    (*j)["config"].erase("output_path");
    (*j)["config"].erase("workers");
  }
  CHECK(j0 == j1);
  CHECK(j0["schema_version"] == kSchemaVersion);
  CHECK(j0["rng"] == "splitmix64-ctr-v1");
  CHECK(j0["columns"].size() == csv_columns().size());
  CHECK(csv[0].rfind("experiment,distribution,n,repetition,seed,bound_kind,", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("CSV quoting and null cells") {
  ResultRow r;
  r.experiment = "coverage";
  r.distribution = "truncated_normal(0,0.09,-1,1)";
  r.n = 3;
  r.note = "a \"b\"";
  r.violated_lower = false;
  const std::string csv = to_csv({r});
  CHECK(csv.find("\"truncated_normal(0,0.09,-1,1)\"") != std::string::npos);
  CHECK(csv.find("\"a \"\"b\"\"\"") != std::string::npos);
  CHECK(csv.find(",false,,") != std::string::npos);
}

TEST_CASE("timing rows carry positive durations and ratios") {
  const auto rows = run_timing(small(ExperimentKind::Timing));
  REQUIRE(rows.size() == 2 * 4);
  for (const auto& r : rows) {
    CHECK(*r.nanoseconds > 0);
    CHECK(*r.ratio > 0.0);
  }
}

TEST_CASE("coverage with one repetition gives one row with both flags") {
  auto c = small(ExperimentKind::Coverage);
  c.repetitions = 1;
  const auto rows = run_coverage(c);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].violated_lower.has_value());
  CHECK(rows[0].violated_upper.has_value());
  const auto s = summarize_coverage(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].runs == 1);
}

TEST_CASE("coverage summary half-widths") {
  std::vector<ResultRow> rows(100);
  for (int i = 0; i < 100; ++i) {
    rows[i].distribution = "d";
    rows[i].n = 10;
    rows[i].violated_lower = i < 10;
    rows[i].violated_upper = false;
  }
  const auto s = summarize_coverage(rows);
  REQUIRE(s.size() == 1);
  CHECK(s[0].lower_violation_rate == doctest::Approx(0.1));
  CHECK(s[0].lower_half_width == doctest::Approx(1.96 * std::sqrt(0.1 * 0.9 / 100)));
  CHECK(s[0].upper_half_width == 0.0);
}

TEST_CASE("coincidence gaps vanish; Laplace without b skips the upper side") {
  auto c = small(ExperimentKind::Coincidence);
  const auto rows = run_coincidence(c);
  for (const auto& r : rows) {
    if (r.gap) CHECK(*r.gap <= 1e-9);
    if (r.bound_kind == "upper_pair") CHECK(r.gap.has_value());
  }
  const auto j = summarize(c, rows);
  CHECK(j["max_gap"].get<double>() <= 1e-9);

  c.b_truncation.reset();
  c.distributions = {dist::Laplace{0, 1}};
  const auto lap = run_coincidence(c);
  REQUIRE(lap.size() == 2 * 3 * 2);
  for (const auto& r : lap) {
    if (r.bound_kind == "upper_pair") {
      CHECK_FALSE(r.gap.has_value());
      CHECK(r.note.rfind("skipped", 0) == 0);
    }
  }
}

TEST_CASE("surrogate bounds contain the target CVaR on a full grid") {
  auto c = default_config(ExperimentKind::SurrogateConvergence);
  c.repetitions = 20;
  c.true_cvar_nodes = 100000;
  const auto rows = run_surrogate_convergence(c);
  const auto j = summarize(c, rows);
  CHECK(j["containment_rate"].get<double>() >= 0.9);
}

TEST_CASE("with a zero model discrepancy the width decays like n^-1/2") {
  auto c = default_config(ExperimentKind::SurrogateConvergence);
  c.distributions = {dist::experiment_gmm(), dist::experiment_gmm()};
  c.eps_model_override = 0.0;
  c.n_grid = {100, 10000};
  c.repetitions = 10;
  c.true_cvar_nodes = 20000;
  const auto j = summarize(c, run_surrogate_convergence(c));
  const double w0 = j["mean_width_by_n"]["100"].get<double>();
  const double w1 = j["mean_width_by_n"]["10000"].get<double>();
  const double slope = std::log(w1 / w0) / std::log(100.0);
  CHECK(slope > -0.6);
  CHECK(slope < -0.4);
}
