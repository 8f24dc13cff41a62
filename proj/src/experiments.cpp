#include "cvarbound/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cvarbound/concentration.hpp"
#include "cvarbound/error.hpp"
#include "cvarbound/rng.hpp"

#ifndef CVARBOUND_GIT_HASH
#define CVARBOUND_GIT_HASH "unknown"
#endif

namespace cvarbound::experiments {
namespace {

using dist::DistributionSpec;
using Clock = std::chrono::steady_clock;

struct Cell {
  std::size_t dist_index;
  std::size_t n;
  int repetition;
};

std::vector<Cell> make_cells(const ExperimentConfig& c, std::size_t n_dists) {
  std::vector<Cell> cells;
  for (std::size_t d = 0; d < n_dists; ++d)
    for (std::size_t n : c.n_grid)
      for (int r = 0; r < c.repetitions; ++r) cells.push_back({d, n, r});
  return cells;
}

// Runs `work` on every cell and concatenates the per-cell rows in cell order,
// so the output is independent of scheduling.
std::vector<ResultRow> run_cells(const std::vector<Cell>& cells, int workers,
                                 const std::function<std::vector<ResultRow>(const Cell&)>& work) {
  std::vector<std::vector<ResultRow>> out(cells.size());
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(cells.size(), 1));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto loop = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < cells.size();) {
      try {
        out[i] = work(cells[i]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = cells.size();
      }
    }
  };
  if (threads <= 1) {
    loop();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<ResultRow> rows;
  for (auto& v : out) std::move(v.begin(), v.end(), std::back_inserter(rows));
  return rows;
}

double upper_support(const DistributionSpec& spec, const ExperimentConfig& c) {
  const double u = spec.upper();
  return std::isfinite(u) ? u : c.b_truncation.value_or(u);
}

SupportBounds finite_supports(const DistributionSpec& x, const DistributionSpec& y, const ExperimentConfig& c) {
  SupportBounds s{x.lower(), upper_support(x, c), y.lower(), upper_support(y, c)};
  require(std::isfinite(s.a_x) && std::isfinite(s.b_x) && std::isfinite(s.a_y) && std::isfinite(s.b_y),
          "missing_support", "surrogate experiments need finite supports for both distributions");
  s.validate();
  return s;
}

// Target and surrogate; a lone mixture gets its moment-matched Normal.
std::pair<DistributionSpec, DistributionSpec> target_and_surrogate(const ExperimentConfig& c) {
  if (c.distributions.size() >= 2) return {c.distributions[0], c.distributions[1]};
  return {c.distributions[0], dist::moment_matched_normal(c.distributions[0])};
}

ResultRow base_row(const ExperimentConfig& c, const std::string& label, const Cell& cell, const char* kind) {
  ResultRow r;
  r.experiment = to_string(c.experiment);
  r.distribution = label;
  r.n = cell.n;
  r.repetition = cell.repetition;
  r.bound_kind = kind;
  return r;
}

std::string fmt17(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.17g", key, v);
  return buf;
}

template <class F>
std::int64_t median_ns(int repeats, F&& f) {
  f();  // warmup
  std::vector<std::int64_t> t(static_cast<std::size_t>(repeats));
  for (auto& x : t) {
    const auto start = Clock::now();
    f();
    x = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  }
  std::nth_element(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(t.size() / 2), t.end());
  return std::max<std::int64_t>(t[t.size() / 2], 1);
}

volatile double g_sink = 0.0;

}  // namespace

const char* to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::SurrogateConvergence: return "surrogate_convergence";
    case ExperimentKind::Timing: return "timing";
    case ExperimentKind::Coincidence: return "coincidence";
    case ExperimentKind::Coverage: return "coverage";
  }
  return "?";
}

ExperimentKind parse_experiment(const std::string& name) {
  for (auto k : {ExperimentKind::SurrogateConvergence, ExperimentKind::Timing, ExperimentKind::Coincidence,
                 ExperimentKind::Coverage}) {
    if (name == to_string(k)) return k;
  }
  throw ValidationError("unknown_experiment", "unknown experiment '" + name + "'");
}

void ExperimentConfig::validate() const {
  TailLevel{alpha};
  require(std::isfinite(delta) && delta > 0.0 && delta < 1.0, "invalid_delta", "delta must lie in (0, 1)");
  if (experiment == ExperimentKind::Coincidence)
    require(delta <= 0.5, "invalid_delta", "order-statistic bounds need delta in (0, 0.5]");
  require(repetitions >= 1, "invalid_config", "repetitions must be at least 1");
  require(!n_grid.empty(), "invalid_config", "n_grid must be nonempty");
  for (auto n : n_grid) require(n >= 1, "invalid_n", "every n in n_grid must be at least 1");
  require(!distributions.empty(), "invalid_config", "at least one distribution is required");
  require(bins >= 2, "invalid_config", "bins must be at least 2");
  require(timing_repeats >= 1, "invalid_config", "timing_repeats must be at least 1");
  require(true_cvar_nodes >= 1000, "invalid_config", "true_cvar_nodes must be at least 1000");
  require(workers >= 0, "invalid_config", "workers must be nonnegative");
  if (b_truncation) require(std::isfinite(*b_truncation), "invalid_config", "b_truncation must be finite");
  if (eps_model_override)
    require(*eps_model_override >= 0.0 && *eps_model_override <= 1.0, "invalid_eps",
            "eps_model must lie in [0, 1]");
  if (experiment == ExperimentKind::SurrogateConvergence || experiment == ExperimentKind::Timing) {
    require(distributions.size() <= 2, "invalid_config", "surrogate experiments take [target, surrogate]");
    if (distributions.size() == 1)
      require(distributions[0].kind() == "truncated_gmm", "invalid_config",
              "a lone target must be a truncated_gmm so a surrogate can be moment-matched");
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.master_seed = 20240601;
  switch (kind) {
    case ExperimentKind::SurrogateConvergence:
      c.n_grid = {100, 200, 500, 1000, 2000, 5000, 10000};
      c.repetitions = 100;
      c.distributions = {dist::experiment_gmm()};
      c.output_path = "surrogate_convergence.csv";
      break;
    case ExperimentKind::Timing:
      c.n_grid = {10000};
      c.repetitions = 5;
      c.distributions = {dist::experiment_gmm()};
      c.workers = 1;
      c.output_path = "timing.csv";
      break;
    case ExperimentKind::Coincidence:
      c.n_grid = {10, 100, 1000};
      c.repetitions = 100;
      c.distributions = {dist::Beta{2, 2}, dist::Beta{0.5, 0.5}, dist::Beta{2, 5}, dist::Beta{5, 2},
                         dist::Beta{10, 2}, dist::Beta{2, 10}, dist::Laplace{0, 1}};
      c.output_path = "coincidence.csv";
      break;
    case ExperimentKind::Coverage:
      c.n_grid = {100};
      c.repetitions = 1000;
      c.distributions = {dist::TruncatedNormal{0.0, 0.09, -1.0, 1.0}};
      c.output_path = "coverage.csv";
      break;
  }
  return c;
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
  require(j.is_object(), "invalid_config", "config must be a JSON object");
  try {
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("delta")) c.delta = j.at("delta").get<double>();
    if (j.contains("n_grid")) c.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
    if (j.contains("repetitions")) c.repetitions = j.at("repetitions").get<int>();
    if (j.contains("master_seed")) c.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("distributions")) {
      c.distributions.clear();
      for (const auto& d : j.at("distributions")) c.distributions.push_back(dist::from_json(d));
    }
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
    if (j.contains("bins")) c.bins = j.at("bins").get<int>();
    if (j.contains("b_truncation") && !j.at("b_truncation").is_null())
      c.b_truncation = j.at("b_truncation").get<double>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
    if (j.contains("eps_model_override") && !j.at("eps_model_override").is_null())
      c.eps_model_override = j.at("eps_model_override").get<double>();
    if (j.contains("timing_repeats")) c.timing_repeats = j.at("timing_repeats").get<int>();
    if (j.contains("true_cvar_nodes")) c.true_cvar_nodes = j.at("true_cvar_nodes").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid_config", e.what());
  }
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json dists = nlohmann::json::array();
  for (const auto& d : c.distributions) dists.push_back(dist::to_json(d));
  nlohmann::json j = {
      {"experiment", to_string(c.experiment)},
      {"alpha", c.alpha},
      {"delta", c.delta},
      {"n_grid", c.n_grid},
      {"repetitions", c.repetitions},
      {"master_seed", c.master_seed},
      {"distributions", dists},
      {"output_path", c.output_path},
      {"bins", c.bins},
      {"b_truncation", c.b_truncation ? nlohmann::json(*c.b_truncation) : nlohmann::json(nullptr)},
      {"workers", c.workers},
      {"eps_model_override",
       c.eps_model_override ? nlohmann::json(*c.eps_model_override) : nlohmann::json(nullptr)},
      {"timing_repeats", c.timing_repeats},
      {"true_cvar_nodes", c.true_cvar_nodes},
  };
  return j;
}

std::uint64_t cell_seed(std::uint64_t master_seed, std::size_t dist_index, std::size_t n, int repetition) {
  std::uint64_t s = derive_seed(master_seed, dist_index);
  s = derive_seed(s, n);
  return derive_seed(s, static_cast<std::uint64_t>(repetition));
}

std::vector<ResultRow> run_surrogate_convergence(const ExperimentConfig& c) {
  c.validate();
  const auto [target, surrogate] = target_and_surrogate(c);
  const SupportBounds supports = finite_supports(target, surrogate, c);
  const TailLevel level(c.alpha);
  const double eps_model = c.eps_model_override.value_or(
      dist::binned_discrepancy(target, surrogate, c.bins, supports.a_x, supports.b_x));
  const double truth = dist::true_cvar(target, level, c.true_cvar_nodes);
  const std::string label = dist::describe(target);

  return run_cells(make_cells(c, 1), c.workers, [&](const Cell& cell) {
    const std::uint64_t s = cell_seed(c.master_seed, 0, cell.n, cell.repetition);
    std::vector<ResultRow> rows;

    ResultRow b = base_row(c, label, cell, "surrogate_bounds");
    b.seed = derive_seed(s, 0);
    const SampleBatch ys = dist::sample(surrogate, cell.n, *b.seed);
    const DiscrepancyBudget budget(c.delta, cell.n, eps_model);
    const BoundReport rep = surrogate_cvar_bounds(ys, level, budget, supports);
    b.lower = rep.lower;
    b.upper = rep.upper;
    b.estimate = cvar_sorted_form(ys, level);
    b.true_value = truth;
    if (b.lower) b.violated_lower = *b.lower > truth;
    if (b.upper) b.violated_upper = *b.upper < truth;
    b.note = fmt17("eps_prime", budget.eps_prime());
    if (rep.lower_absent_reason) b.note += ";lower_absent=" + *rep.lower_absent_reason;
    if (rep.upper_absent_reason) b.note += ";upper_absent=" + *rep.upper_absent_reason;
    rows.push_back(std::move(b));

    ResultRow t = base_row(c, label, cell, "target_estimate");
    t.seed = derive_seed(s, 1);
    t.estimate = cvar_sorted_form(dist::sample(target, cell.n, *t.seed), level);
    t.true_value = truth;
    rows.push_back(std::move(t));
    return rows;
  });
}

std::vector<ResultRow> run_timing(const ExperimentConfig& c) {
  c.validate();
  const auto [target, surrogate] = target_and_surrogate(c);
  const SupportBounds supports = finite_supports(target, surrogate, c);
  const TailLevel level(c.alpha);
  const double eps_model = c.eps_model_override.value_or(
      dist::binned_discrepancy(target, surrogate, c.bins, supports.a_x, supports.b_x));
  const std::string label = dist::describe(target);

  // Single worker so measurements do not compete for cores.
  return run_cells(make_cells(c, 1), 1, [&](const Cell& cell) {
    const std::uint64_t s = cell_seed(c.master_seed, 0, cell.n, cell.repetition);
    const std::uint64_t sx = derive_seed(s, 1);
    const std::uint64_t sy = derive_seed(s, 0);
    const DiscrepancyBudget budget(c.delta, cell.n, eps_model);

    const auto t_sx = median_ns(c.timing_repeats, [&] { g_sink = dist::sample(target, cell.n, sx).max(); });
    const auto t_sy = median_ns(c.timing_repeats, [&] { g_sink = dist::sample(surrogate, cell.n, sy).max(); });
    const auto t_ex = median_ns(c.timing_repeats, [&] {
      g_sink = cvar_sorted_form(dist::sample(target, cell.n, sx), level);
    });
    const auto t_ey = median_ns(c.timing_repeats, [&] {
      const auto r = surrogate_cvar_bounds(dist::sample(surrogate, cell.n, sy), level, budget, supports);
      g_sink = r.lower.value_or(0.0) + r.upper.value_or(0.0);
    });

    const double sample_ratio = static_cast<double>(t_sx) / static_cast<double>(t_sy);
    const double e2e_ratio = static_cast<double>(t_ex) / static_cast<double>(t_ey);
    auto row = [&](const char* kind, std::uint64_t seed, std::int64_t ns, double ratio) {
      ResultRow r = base_row(c, label, cell, kind);
      r.seed = seed;
      r.nanoseconds = ns;
      r.ratio = ratio;
      return r;
    };
    return std::vector<ResultRow>{row("sample_target", sx, t_sx, sample_ratio),
                                  row("sample_surrogate", sy, t_sy, sample_ratio),
                                  row("end_to_end_target", sx, t_ex, e2e_ratio),
                                  row("end_to_end_surrogate", sy, t_ey, e2e_ratio)};
  });
}

std::vector<ResultRow> run_coincidence(const ExperimentConfig& c) {
  c.validate();
  const TailLevel level(c.alpha);
  std::vector<std::string> labels;
  std::vector<double> truths;
  for (const auto& d : c.distributions) {
    labels.push_back(dist::describe(d));
    truths.push_back(dist::true_cvar(d, level, std::min(c.true_cvar_nodes, 100000)));
  }

  return run_cells(make_cells(c, c.distributions.size()), c.workers, [&](const Cell& cell) {
    const auto& spec = c.distributions[cell.dist_index];
    const std::uint64_t seed = cell_seed(c.master_seed, cell.dist_index, cell.n, cell.repetition);
    const SampleBatch batch = dist::sample(spec, cell.n, seed);
    const double a = spec.lower();
    const double b = upper_support(spec, c);
    const BoundReport ecdf_rep = ecdf_cvar_bounds(batch, level, c.delta, SupportBounds{a, b});
    const double estimate = cvar_sorted_form(batch, level);

    auto row = [&](const char* kind) {
      ResultRow r = base_row(c, labels[cell.dist_index], cell, kind);
      r.seed = seed;
      r.estimate = estimate;
      r.true_value = truths[cell.dist_index];
      return r;
    };

    ResultRow up = row("upper_pair");
    if (!std::isfinite(b)) {
      up.note = "skipped: upper side needs an explicit b";
    } else {
      try {
        up.upper = ecdf_rep.upper;
        up.baseline = order_stat_upper_bound(batch, level, c.delta, b);
        if (up.upper) up.gap = std::fabs(*up.upper - *up.baseline);
        if (ecdf_rep.upper_absent_reason) up.note = "ecdf_absent=" + *ecdf_rep.upper_absent_reason;
      } catch (const ValidationError& e) {
        up.upper.reset();
        up.baseline.reset();
        up.note = std::string("skipped: ") + e.code();
      }
    }

    ResultRow lo = row("lower_pair");
    lo.lower = ecdf_rep.lower;
    lo.baseline = order_stat_lower_bound(batch, level, c.delta, a);
    if (lo.lower && std::isfinite(*lo.baseline)) lo.gap = std::fabs(*lo.lower - *lo.baseline);
    if (ecdf_rep.lower_case) lo.note = to_string(*ecdf_rep.lower_case);
    if (ecdf_rep.lower_absent_reason) lo.note = "ecdf_absent=" + *ecdf_rep.lower_absent_reason;
    if (!std::isfinite(*lo.baseline)) lo.baseline.reset();

    return std::vector<ResultRow>{std::move(up), std::move(lo)};
  });
}

std::vector<ResultRow> run_coverage(const ExperimentConfig& c) {
  c.validate();
  const TailLevel level(c.alpha);
  std::vector<std::string> labels;
  std::vector<double> truths;
  for (const auto& d : c.distributions) {
    labels.push_back(dist::describe(d));
    truths.push_back(dist::true_cvar(d, level, c.true_cvar_nodes));
  }

  return run_cells(make_cells(c, c.distributions.size()), c.workers, [&](const Cell& cell) {
    const auto& spec = c.distributions[cell.dist_index];
    const double truth = truths[cell.dist_index];
    ResultRow r = base_row(c, labels[cell.dist_index], cell, "ecdf_bounds");
    r.seed = cell_seed(c.master_seed, cell.dist_index, cell.n, cell.repetition);
    const SampleBatch batch = dist::sample(spec, cell.n, *r.seed);
    const BoundReport rep =
        ecdf_cvar_bounds(batch, level, c.delta, SupportBounds{spec.lower(), upper_support(spec, c)});
    r.lower = rep.lower;
    r.upper = rep.upper;
    r.estimate = cvar_sorted_form(batch, level);
    r.true_value = truth;
    if (r.lower) r.violated_lower = *r.lower > truth;
    if (r.upper) r.violated_upper = *r.upper < truth;
    if (rep.lower_absent_reason) r.note = "lower_absent=" + *rep.lower_absent_reason;
    if (rep.upper_absent_reason) r.note += (r.note.empty() ? "" : ";") + ("upper_absent=" + *rep.upper_absent_reason);
    return std::vector<ResultRow>{std::move(r)};
  });
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  switch (c.experiment) {
    case ExperimentKind::SurrogateConvergence: return run_surrogate_convergence(c);
    case ExperimentKind::Timing: return run_timing(c);
    case ExperimentKind::Coincidence: return run_coincidence(c);
    case ExperimentKind::Coverage: return run_coverage(c);
  }
  return {};
}

std::vector<CoverageSummary> summarize_coverage(const std::vector<ResultRow>& rows) {
  struct Acc {
    std::size_t runs = 0, lower_n = 0, upper_n = 0, lower_v = 0, upper_v = 0;
  };
  std::map<std::pair<std::string, std::size_t>, Acc> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.distribution, r.n}];
    ++g.runs;
    if (r.violated_lower) { ++g.lower_n; g.lower_v += *r.violated_lower; }
    if (r.violated_upper) { ++g.upper_n; g.upper_v += *r.violated_upper; }
  }
  auto half = [](double p, std::size_t m) { return m ? 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(m)) : 0.0; };
  std::vector<CoverageSummary> out;
  for (const auto& [key, g] : groups) {
    CoverageSummary s;
    s.distribution = key.first;
    s.n = key.second;
    s.runs = g.runs;
    s.lower_violation_rate = g.lower_n ? static_cast<double>(g.lower_v) / static_cast<double>(g.lower_n) : 0.0;
    s.upper_violation_rate = g.upper_n ? static_cast<double>(g.upper_v) / static_cast<double>(g.upper_n) : 0.0;
    s.lower_half_width = half(s.lower_violation_rate, g.lower_n);
    s.upper_half_width = half(s.upper_violation_rate, g.upper_n);
    out.push_back(s);
  }
  return out;
}

nlohmann::json summarize(const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
  nlohmann::json j = nlohmann::json::object();
  j["row_count"] = rows.size();
  switch (c.experiment) {
    case ExperimentKind::Coverage: {
      nlohmann::json groups = nlohmann::json::array();
      for (const auto& s : summarize_coverage(rows)) {
        groups.push_back({{"distribution", s.distribution}, {"n", s.n}, {"runs", s.runs},
                          {"lower_violation_rate", s.lower_violation_rate},
                          {"upper_violation_rate", s.upper_violation_rate},
                          {"lower_half_width", s.lower_half_width}, {"upper_half_width", s.upper_half_width}});
      }
      j["coverage"] = groups;
      break;
    }
    case ExperimentKind::Coincidence: {
      double worst = 0.0;
      std::size_t compared = 0, skipped = 0;
      for (const auto& r : rows) {
        if (r.gap) { worst = std::max(worst, *r.gap); ++compared; } else { ++skipped; }
      }
      j["max_gap"] = worst;
      j["pairs_compared"] = compared;
      j["pairs_skipped"] = skipped;
      break;
    }
    case ExperimentKind::SurrogateConvergence: {
      std::map<std::size_t, std::pair<double, std::size_t>> width;
      std::size_t contained = 0, total = 0;
      for (const auto& r : rows) {
        if (r.bound_kind != "surrogate_bounds" || !r.lower || !r.upper) continue;
        auto& w = width[r.n];
        w.first += *r.upper - *r.lower;
        ++w.second;
        ++total;
        contained += (!*r.violated_lower && !*r.violated_upper);
      }
      nlohmann::json mw = nlohmann::json::object();
      for (const auto& [n, w] : width) mw[std::to_string(n)] = w.first / static_cast<double>(w.second);
      j["mean_width_by_n"] = mw;
      j["containment_rate"] = total ? static_cast<double>(contained) / static_cast<double>(total) : 0.0;
      break;
    }
    case ExperimentKind::Timing:
      // Ratios are machine-dependent and stay out of the deterministic manifest.
      break;
  }
  return j;
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> cols = {
      "experiment", "distribution", "n", "repetition", "seed", "bound_kind", "lower", "upper", "estimate",
      "true_value", "baseline", "gap", "violated_lower", "violated_upper", "nanoseconds", "ratio", "note"};
  return cols;
}

namespace {

std::string num(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::filesystem::path sidecar(const std::string& output_path, const char* suffix) {
  std::filesystem::path p(output_path);
  return p.parent_path() / (p.stem().string() + suffix);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), "io_error", "cannot open '" + path.string() + "' for writing");
  f << content;
  require(static_cast<bool>(f), "io_error", "failed writing '" + path.string() + "'");
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  auto flag = [](const std::optional<bool>& b) { return b ? std::string(*b ? "true" : "false") : std::string(); };
  for (const auto& r : rows) {
    out << quoted(r.experiment) << ',' << quoted(r.distribution) << ',' << r.n << ',' << r.repetition << ','
        << (r.seed ? std::to_string(*r.seed) : "") << ',' << quoted(r.bound_kind) << ',' << num(r.lower) << ','
        << num(r.upper) << ',' << num(r.estimate) << ',' << num(r.true_value) << ',' << num(r.baseline) << ','
        << num(r.gap) << ',' << flag(r.violated_lower) << ',' << flag(r.violated_upper) << ','
        << (r.nanoseconds ? std::to_string(*r.nanoseconds) : "") << ',' << num(r.ratio) << ','
        << quoted(r.note) << '\n';
  }
  return out.str();
}

void write_outputs(const ExperimentConfig& c, const std::vector<ResultRow>& rows) {
  require(!c.output_path.empty(), "invalid_config", "output_path is empty");
  const std::string started = utc_now();
  const std::filesystem::path csv(c.output_path);
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  write_file(csv, to_csv(rows));

  nlohmann::json manifest = {
      {"schema_version", kSchemaVersion},
      {"git_hash", git_hash()},
      {"rng", CounterRng::kName},
      {"columns", csv_columns()},
      {"config", config_to_json(c)},
      {"summary", summarize(c, rows)},
  };
  write_file(sidecar(c.output_path, ".manifest.json"), manifest.dump(2) + "\n");

  nlohmann::json meta = {{"written_at_utc", started}, {"results", csv.filename().string()}};
  write_file(sidecar(c.output_path, ".meta.json"), meta.dump(2) + "\n");
}

const char* git_hash() noexcept { return CVARBOUND_GIT_HASH; }

}  // namespace cvarbound::experiments
