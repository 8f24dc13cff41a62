// cvarbound: command-line front end for the CVaR bounding library.
//
//   cvarbound bound         uniform-discrepancy bounds from samples or an analytic Y
//   cvarbound concentration confidence bounds from a sample (own or surrogate)
//   cvarbound experiment    run one of the experiment drivers
//   cvarbound discrepancy   binned sup-distance between two distributions
//
// Results go to stdout as JSON. Validation failures exit with status 2 and a
// {"error": {"code", "message"}} object on stderr.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cvarbound/bounds.hpp"
#include "cvarbound/concentration.hpp"
#include "cvarbound/distributions.hpp"
#include "cvarbound/error.hpp"
#include "cvarbound/experiments.hpp"
#include "cvarbound/riskcore.hpp"

namespace {

using namespace cvarbound;
using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

json opt(const std::optional<double>& v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); }

json report_json(const BoundReport& r) {
  json j = {{"lower", opt(r.lower)}, {"upper", opt(r.upper)}, {"guarantee", r.guarantee}};
  j["lower_case"] = r.lower_case ? json(to_string(*r.lower_case)) : json(nullptr);
  j["upper_case"] = r.upper_case ? json(to_string(*r.upper_case)) : json(nullptr);
  if (r.lower_absent_reason) j["lower_absent_reason"] = *r.lower_absent_reason;
  if (r.upper_absent_reason) j["upper_absent_reason"] = *r.upper_absent_reason;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "io_error", "cannot open '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError("invalid_json", path + ": " + e.what());
  }
}

SampleBatch read_samples(const std::string& path) {
  std::ifstream f(path);
  require(static_cast<bool>(f), "io_error", "cannot open '" + path + "'");
  std::vector<double> xs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const char* begin = line.c_str() + first;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    const std::string rest = end ? std::string(end) : std::string();
    require(end != begin && rest.find_first_not_of(" \t\r") == std::string::npos, "invalid_samples",
            path + ":" + std::to_string(lineno) + ": expected one real per line");
    xs.push_back(v);
  }
  return SampleBatch(std::move(xs));
}

// Common inputs for `bound` and `concentration`: exactly one of a sample file
// or a distribution file (sampled with --n/--seed where a sample is needed).
struct Source {
  std::string samples;
  std::string dist;
  std::size_t n = 0;
  std::uint64_t seed = 0;
};

void add_source(CLI::App* cmd, Source& s) {
  cmd->add_option("--samples", s.samples, "file with one real per line");
  cmd->add_option("--dist", s.dist, "distribution JSON file");
  cmd->add_option("--n", s.n, "sample size drawn from --dist");
  cmd->add_option("--seed", s.seed, "seed for draws from --dist");
}

void require_one_source(const Source& s) {
  require(s.samples.empty() != s.dist.empty(), "invalid_arguments", "give exactly one of --samples or --dist");
}

struct BoundArgs {
  Source src;
  double alpha = 0.2;
  double eps = 0.0;
  double a = -kInf, b = kInf;
  std::optional<double> a_y, b_y, b_truncation;
};

int run_bound(const BoundArgs& args) {
  require_one_source(args.src);
  const TailLevel level(args.alpha);
  SupportBounds s{args.a, args.b, -kInf, kInf};
  CvarFunction cvar_y;
  double mean_y = 0.0;
  double cvar_value = 0.0;
  json source;

  if (!args.src.samples.empty()) {
    const SampleBatch batch = read_samples(args.src.samples);
    const StepCdf f = ecdf(batch);
    cvar_y = [f](TailLevel t) { return cvar_of_cdf(f, t); };
    mean_y = mean_of_cdf(f);
    s.a_y = args.a_y.value_or(batch.min());
    s.b_y = args.b_y.value_or(batch.max());
    source = {{"samples", args.src.samples}, {"n", batch.size()}};
  } else {
    const auto spec = dist::from_json(read_json_file(args.src.dist));
    cvar_y = [spec](TailLevel t) { return dist::true_cvar(spec, t, 100000); };
    mean_y = dist::mean(spec);
    s.a_y = args.a_y.value_or(spec.lower());
    const double up = std::isfinite(spec.upper()) ? spec.upper() : args.b_truncation.value_or(kInf);
    s.b_y = args.b_y.value_or(up);
    source = {{"dist", dist::to_json(spec)}};
  }
  if (!std::isfinite(s.b_x) && args.b_truncation) s.b_x = *args.b_truncation;
  cvar_value = cvar_y(level);

  const BoundReport up = uniform_upper_bound(cvar_y, level, args.eps, s);
  const BoundReport lo = uniform_lower_bound(cvar_y, mean_y, level, args.eps, s);
  json j = {{"alpha", args.alpha}, {"eps", args.eps}, {"source", source}, {"cvar_y", cvar_value},
            {"mean_y", mean_y}};
  j["upper"] = opt(up.upper);
  j["upper_case"] = up.upper_case ? json(to_string(*up.upper_case)) : json(nullptr);
  if (up.upper_absent_reason) j["upper_absent_reason"] = *up.upper_absent_reason;
  j["lower"] = opt(lo.lower);
  j["lower_case"] = lo.lower_case ? json(to_string(*lo.lower_case)) : json(nullptr);
  if (lo.lower_absent_reason) j["lower_absent_reason"] = *lo.lower_absent_reason;
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct ConcentrationArgs {
  Source src;
  double alpha = 0.2;
  double delta = 0.05;
  std::optional<double> eps;
  double a = -kInf, b = kInf;
  std::optional<double> a_y, b_y, b_truncation;
};

int run_concentration(const ConcentrationArgs& args) {
  require_one_source(args.src);
  const TailLevel level(args.alpha);
  std::optional<SampleBatch> batch;
  double spec_lo = -kInf, spec_hi = kInf;
  if (!args.src.samples.empty()) {
    batch = read_samples(args.src.samples);
  } else {
    require(args.src.n >= 1, "invalid_n", "--n must be at least 1 when sampling from --dist");
    const auto spec = dist::from_json(read_json_file(args.src.dist));
    batch = dist::sample(spec, args.src.n, args.src.seed);
    spec_lo = spec.lower();
    spec_hi = spec.upper();
  }
  double b = args.b;
  if (!std::isfinite(b) && args.b_truncation) b = *args.b_truncation;

  json j = {{"alpha", args.alpha}, {"delta", args.delta}, {"n", batch->size()},
            {"estimate", cvar_sorted_form(*batch, level)}, {"eta", dkw_epsilon(args.delta, batch->size())}};

  if (args.eps) {
    // The sample is from a surrogate Y within eps of the target X.
    SupportBounds s{args.a, b, args.a_y.value_or(std::isfinite(spec_lo) ? spec_lo : batch->min()),
                    args.b_y.value_or(std::isfinite(spec_hi) ? spec_hi : batch->max())};
    const DiscrepancyBudget budget(args.delta, batch->size(), *args.eps);
    j["mode"] = "surrogate";
    j["eps_model"] = *args.eps;
    j["eps_prime"] = budget.eps_prime();
    j["bounds"] = report_json(surrogate_cvar_bounds(*batch, level, budget, s));
    std::cout << j.dump(2) << '\n';
    return 0;
  }

  // Sampling X itself: its support fills in whatever --a / --b leave open.
  const double a = std::isfinite(args.a) ? args.a : spec_lo;
  if (!std::isfinite(args.b) && std::isfinite(spec_hi)) b = spec_hi;
  j["mode"] = "ecdf";
  j["bounds"] = report_json(ecdf_cvar_bounds(*batch, level, args.delta, SupportBounds{a, b}));
  if (args.delta <= 0.5) {
    json os = json::object();
    os["upper"] = std::isfinite(b) ? json(order_stat_upper_bound(*batch, level, args.delta, b)) : json(nullptr);
    os["lower"] = opt(order_stat_lower_bound(*batch, level, args.delta, a));
    j["order_statistic"] = os;
  }
  if (std::isfinite(a) && std::isfinite(b)) {
    const auto [r_up, r_lo] = brown_deviation_bounds(level, args.delta, batch->size(), a, b);
    j["deviation_radii"] = {{"upper", r_up}, {"lower", r_lo}};
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string name;
  std::string config;
  std::optional<double> alpha, delta, b_truncation, eps_model;
  std::vector<std::size_t> n;
  std::optional<int> reps, bins, workers, timing_repeats;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> dists;
  std::string out;
};

int run_experiment_cmd(const ExperimentArgs& args) {
  using namespace cvarbound::experiments;
  ExperimentConfig c = default_config(parse_experiment(args.name));
  if (!args.config.empty()) {
    c = config_from_json(read_json_file(args.config), c);
    require(to_string(c.experiment) == args.name, "invalid_config",
            "config file names a different experiment than the command line");
  }
  if (args.alpha) c.alpha = *args.alpha;
  if (args.delta) c.delta = *args.delta;
  if (!args.n.empty()) c.n_grid = args.n;
  if (args.reps) c.repetitions = *args.reps;
  if (args.seed) c.master_seed = *args.seed;
  if (args.bins) c.bins = *args.bins;
  if (args.workers) c.workers = *args.workers;
  if (args.timing_repeats) c.timing_repeats = *args.timing_repeats;
  if (args.b_truncation) c.b_truncation = *args.b_truncation;
  if (args.eps_model) c.eps_model_override = *args.eps_model;
  if (!args.dists.empty()) {
    c.distributions.clear();
    for (const auto& p : args.dists) c.distributions.push_back(dist::from_json(read_json_file(p)));
  }
  if (!args.out.empty()) c.output_path = args.out;

  const auto rows = run_experiment(c);
  write_outputs(c, rows);
  json j = {{"experiment", to_string(c.experiment)}, {"rows", rows.size()}, {"output", c.output_path},
            {"summary", summarize(c, rows)}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

struct DiscrepancyArgs {
  std::vector<std::string> dists;
  int bins = 10000;
  std::optional<double> lo, hi;
  std::optional<std::size_t> sim_n;
  std::uint64_t seed = 0;
};

int run_discrepancy(const DiscrepancyArgs& args) {
  require(args.dists.size() == 2, "invalid_arguments", "discrepancy needs exactly two --dist files");
  const auto x = dist::from_json(read_json_file(args.dists[0]));
  const auto y = dist::from_json(read_json_file(args.dists[1]));
  const double lo = args.lo.value_or(x.lower());
  const double hi = args.hi.value_or(x.upper());
  require(std::isfinite(lo) && std::isfinite(hi), "missing_support",
          "--lo/--hi are required when the first distribution is unbounded");
  const double eps = dist::binned_discrepancy(x, y, args.bins, lo, hi, args.sim_n, args.seed);
  json j = {{"eps", eps}, {"bins", args.bins}, {"lo", lo}, {"hi", hi},
            {"method", args.sim_n ? "simulated" : "analytic"}};
  if (args.sim_n) j["sim_n"] = *args.sim_n;
  std::cout << j.dump(2) << '\n';
  return 0;
}

int emit_error(const std::string& code, const std::string& message) {
  std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CVaR bounds from samples and surrogate models"};
  app.require_subcommand(1);

  BoundArgs bound;
  auto* cmd_bound = app.add_subcommand("bound", "uniform-discrepancy bounds on CVaR of X given Y");
  add_source(cmd_bound, bound.src);
  cmd_bound->add_option("--alpha", bound.alpha, "tail level in (0, 1]");
  cmd_bound->add_option("--eps", bound.eps, "uniform CDF discrepancy in [0, 1]");
  cmd_bound->add_option("--a", bound.a, "lower support of X");
  cmd_bound->add_option("--b", bound.b, "upper support of X");
  cmd_bound->add_option("--a-y", bound.a_y, "lower support of Y");
  cmd_bound->add_option("--b-y", bound.b_y, "upper support of Y");
  cmd_bound->add_option("--b-truncation", bound.b_truncation, "upper support for unbounded distributions");

  ConcentrationArgs conc;
  auto* cmd_conc = app.add_subcommand("concentration", "confidence bounds from a sample");
  add_source(cmd_conc, conc.src);
  cmd_conc->add_option("--alpha", conc.alpha, "tail level in (0, 1]");
  cmd_conc->add_option("--delta", conc.delta, "error probability in (0, 1)");
  cmd_conc->add_option("--eps", conc.eps, "treat the sample as a surrogate with this model discrepancy");
  cmd_conc->add_option("--a", conc.a, "lower support of X");
  cmd_conc->add_option("--b", conc.b, "upper support of X");
  cmd_conc->add_option("--a-y", conc.a_y, "lower support of the surrogate");
  cmd_conc->add_option("--b-y", conc.b_y, "upper support of the surrogate");
  cmd_conc->add_option("--b-truncation", conc.b_truncation, "upper support for unbounded distributions");

  ExperimentArgs exp;
  auto* cmd_exp = app.add_subcommand("experiment", "run an experiment and write CSV + manifest");
  cmd_exp->add_option("name", exp.name, "surrogate_convergence | timing | coincidence | coverage")->required();
  cmd_exp->add_option("--config", exp.config, "JSON config file");
  cmd_exp->add_option("--alpha", exp.alpha);
  cmd_exp->add_option("--delta", exp.delta);
  cmd_exp->add_option("--n", exp.n, "sample sizes (repeatable)");
  cmd_exp->add_option("--reps", exp.reps);
  cmd_exp->add_option("--seed", exp.seed, "master seed");
  cmd_exp->add_option("--dist", exp.dists, "distribution JSON files (repeatable, replaces the defaults)");
  cmd_exp->add_option("--out", exp.out, "CSV output path");
  cmd_exp->add_option("--bins", exp.bins);
  cmd_exp->add_option("--b-truncation", exp.b_truncation);
  cmd_exp->add_option("--eps-model", exp.eps_model, "override the surrogate discrepancy");
  cmd_exp->add_option("--workers", exp.workers);
  cmd_exp->add_option("--timing-repeats", exp.timing_repeats);

  DiscrepancyArgs disc;
  auto* cmd_disc = app.add_subcommand("discrepancy", "max CDF difference on a uniform grid of bin edges");
  cmd_disc->add_option("--dist", disc.dists, "two distribution JSON files (give --dist twice)");
  cmd_disc->add_option("--bins", disc.bins);
  cmd_disc->add_option("--lo", disc.lo);
  cmd_disc->add_option("--hi", disc.hi);
  cmd_disc->add_option("--sim-n", disc.sim_n, "estimate with ECDFs of this many draws");
  cmd_disc->add_option("--seed", disc.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("usage", e.what());
  }

  try {
    if (*cmd_bound) return run_bound(bound);
    if (*cmd_conc) return run_concentration(conc);
    if (*cmd_exp) return run_experiment_cmd(exp);
    if (*cmd_disc) return run_discrepancy(disc);
  } catch (const ValidationError& e) {
    return emit_error(e.code(), e.what());
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return 1;
  }
  return 0;
}
