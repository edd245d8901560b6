// scalenas: search-space simulation, evaluator training, MCEA search,
// scaling-law fitting, and rank-statistics reporting from one binary.
//
// Exit codes: 0 success, 1 usage/data error, 2 infeasible space, 3 I/O.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "scalenas/csv.hpp"
#include "scalenas/density.hpp"
#include "scalenas/flops.hpp"
#include "scalenas/io_util.hpp"
#include "scalenas/mcea.hpp"
#include "scalenas/rank_stats.hpp"
#include "scalenas/sampler.hpp"
#include "scalenas/scaling_fit.hpp"
#include "scalenas/space_io.hpp"
#include "scalenas/supernet.hpp"
#include "scalenas/svg.hpp"

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace scalenas;

constexpr int kShards = 64;  // fixed shard count keeps parallel runs seeded
constexpr std::uint64_t kBudgetTag = 0x6275646765743030ULL;
constexpr std::uint64_t kTrainTag = 0x747261696e303030ULL;
constexpr std::uint64_t kHssTag = 0x6873732d73686172ULL;
constexpr std::uint64_t kUniformTag = 0x756e692d73686172ULL;

int thread_cap() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("SCALENAS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1 && v <= 1024) hw = static_cast<int>(v);
  }
  return hw;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ordered_json strategy_json(int stage, const ScalingStrategy& s,
                           long long flops) {
  return ordered_json{{"stage", stage}, {"d", s.d()},     {"w", s.w()},
                      {"r", s.r()},     {"flops", flops}};
}

// One JSONL line per evaluator invocation, buffered for an atomic write.
class JsonlLogger final : public EvalLogger {
 public:
  void log(const EvalRecord& r) override {
    ordered_json j{{"t", r.iteration},
                   {"stage", r.stage},
                   {"arch", hash_hex(r.arch_hash)},
                   {"d", r.strategy.d()},
                   {"w", r.strategy.w()},
                   {"r", r.strategy.r()},
                   {"flops", r.flops},
                   {"acc", r.acc}};
    text_ += j.dump();
    text_ += '\n';
  }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

struct DrawColumns {
  std::vector<int> stage;
  std::vector<long long> flops;
};

// Deterministic sharded sampling: shard s always gets stream child(tag, s),
// so results do not depend on the worker count.
DrawColumns parallel_draws(const SearchSpace& space,
                           const MixtureWeights& weights, long long draws,
                           std::uint64_t seed, std::uint64_t tag,
                           bool uniform) {
  std::vector<DrawColumns> shards(kShards);
  const Rng root(seed);
  std::atomic<int> next{0};
  auto worker = [&]() {
    const HssSampler sampler(space, weights);
    for (int s = next.fetch_add(1); s < kShards; s = next.fetch_add(1)) {
      const long long lo = draws * s / kShards;
      const long long hi = draws * (s + 1) / kShards;
      Rng rng = root.child(tag ^ static_cast<std::uint64_t>(s));
      DrawColumns& out = shards[static_cast<std::size_t>(s)];
      out.stage.reserve(static_cast<std::size_t>(hi - lo));
      out.flops.reserve(static_cast<std::size_t>(hi - lo));
      for (long long i = lo; i < hi; ++i) {
        const SampleEvent ev =
            uniform ? sampler.sample_uniform(rng) : sampler.sample(rng);
        out.stage.push_back(ev.stage);
        out.flops.push_back(ev.flops);
      }
    }
  };
  const int n_threads =
      static_cast<int>(std::min<long long>(thread_cap(), kShards));
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  DrawColumns all;
  all.stage.reserve(static_cast<std::size_t>(draws));
  all.flops.reserve(static_cast<std::size_t>(draws));
  for (const DrawColumns& s : shards) {
    all.stage.insert(all.stage.end(), s.stage.begin(), s.stage.end());
    all.flops.insert(all.flops.end(), s.flops.begin(), s.flops.end());
  }
  return all;
}

void write_draw_csv(const std::string& path, const DrawColumns& cols) {
  CsvTable t;
  t.header = {"stage", "flops"};
  t.rows.reserve(cols.stage.size());
  for (std::size_t i = 0; i < cols.stage.size(); ++i)
    t.rows.push_back(
        {std::to_string(cols.stage[i]), std::to_string(cols.flops[i])});
  write_csv(path, t);
}

MixtureWeights resolve_weights(const RunConfig& rc) {
  if (rc.hss_weights == "grid-size") return MixtureWeights::grid_size(rc.space);
  return MixtureWeights::equal(rc.space.max_stage());
}

// --- simulate-space --------------------------------------------------------

int cmd_simulate_space(const RunConfig& rc) {
  const fs::path out(rc.out_dir);
  const MixtureWeights weights = resolve_weights(rc);

  if (rc.draws <= 0) {
    DrawColumns empty;
    write_draw_csv((out / "hss_samples.csv").string(), empty);
    write_draw_csv((out / "uniform_samples.csv").string(), empty);
    std::cerr << "warning: zero draws requested; wrote empty sample tables "
                 "and no plot\n";
    return 1;
  }

  const BudgetPlan plan =
      select_budgets(rc.space, static_cast<int>(rc.budget_samples),
                     rc.space.max_stage(), hash_combine(rc.seed, kBudgetTag));
  const DrawColumns hss =
      parallel_draws(rc.space, weights, rc.draws, rc.seed, kHssTag, false);
  const DrawColumns uni =
      parallel_draws(rc.space, weights, rc.draws, rc.seed, kUniformTag, true);

  write_draw_csv((out / "hss_samples.csv").string(), hss);
  write_draw_csv((out / "uniform_samples.csv").string(), uni);
  atomic_write_file((out / "flops_hist.svg").string(),
                    svg_flops_histograms(hss.flops, uni.flops, plan.budgets));

  const ModeReport mh = detect_flops_modes(hss.flops);
  const ModeReport mu = detect_flops_modes(uni.flops);
  std::cout << "f0: " << plan.f0 << "\nbudgets:";
  for (long long b : plan.budgets) std::cout << ' ' << b;
  std::cout << "\nhss draws: " << rc.draws << "  modes: " << mh.modes.size()
            << "\nuniform draws: " << rc.draws
            << "  modes: " << mu.modes.size() << "\nwrote: "
            << (out / "hss_samples.csv").string() << ' '
            << (out / "uniform_samples.csv").string() << ' '
            << (out / "flops_hist.svg").string() << "\n";
  return 0;
}

// --- evaluators -------------------------------------------------------------

std::unique_ptr<ToySupernet> build_supernet(const RunConfig& rc,
                                            const SearchSpace& space) {
  auto net = std::make_unique<ToySupernet>(space, rc.evaluator.supernet);
  const MixtureWeights weights = resolve_weights(rc);
  const HssSampler sampler(space, weights);
  const bool uniform = rc.evaluator.sampler == "uniform";
  Rng rng(hash_combine(rc.seed, kTrainTag));
  std::cerr << "training toy supernet: " << rc.evaluator.train_steps
            << " steps (" << rc.evaluator.sampler << " sampling)\n";
  net->train(
      [&sampler, uniform](Rng& r) {
        return uniform ? sampler.sample_uniform(r) : sampler.sample(r);
      },
      rc.evaluator.train_steps, rng);
  return net;
}

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& rc,
                                          const SearchSpace& space) {
  if (rc.evaluator.kind == "surrogate")
    return std::make_unique<SurrogateModel>(space, rc.evaluator.surrogate);
  if (!rc.evaluator.weights_file.empty()) {
    fs::path p(rc.evaluator.weights_file);
    return std::make_unique<ToySupernet>(
        ToySupernet::load(p.string(), space));
  }
  return build_supernet(rc, space);
}

// --- train-evaluator ---------------------------------------------------------

int cmd_train_evaluator(const RunConfig& rc) {
  if (rc.evaluator.kind != "toy-supernet")
    throw std::invalid_argument(
        "train-evaluator requires evaluator.kind = \"toy-supernet\"");
  const fs::path out(rc.out_dir);
  auto net = build_supernet(rc, rc.space);

  std::error_code ec;
  fs::create_directories(out, ec);
  const fs::path target = out / "evaluator.bin";
  const fs::path tmp = target.string() + ".tmp";
  net->save(tmp.string());
  fs::rename(tmp, target, ec);
  if (ec) throw FileError("cannot rename into place: " + target.string());

  std::cout << "trained " << rc.evaluator.train_steps << " steps; per-stage"
            << " visit counts:";
  for (long long v : net->visit_counts()) std::cout << ' ' << v;
  std::cout << "\nwrote: " << target.string() << "\n";
  return 0;
}

// --- search ------------------------------------------------------------------

ordered_json tuple_json(const BaseArch& alpha,
                        const std::vector<ScalingStrategy>& strategies,
                        double objective, const SearchSpace& space) {
  ordered_json t;
  t["objective"] = objective;
  t["base"] = ordered_json::parse(arch_to_json(alpha));
  t["strategies"] = ordered_json::array();
  for (std::size_t j = 0; j < strategies.size(); ++j) {
    const long long flops =
        count_flops(apply_strategy(alpha, strategies[j], space)).total_flops;
    t["strategies"].push_back(
        strategy_json(static_cast<int>(j), strategies[j], flops));
  }
  return t;
}

int cmd_search(const RunConfig& rc) {
  const fs::path out(rc.out_dir);
  const BudgetPlan plan = select_budgets(
      rc.space, static_cast<int>(rc.budget_samples), rc.space.max_stage(),
      hash_combine(rc.seed, kBudgetTag), rc.mcea.budget_tolerance);
  const SearchSpace space = with_budgets(rc.space, plan);

  const std::unique_ptr<Evaluator> evaluator = make_evaluator(rc, space);
  JsonlLogger logger;
  std::cerr << "running search: T=" << rc.mcea.T << " K=" << rc.mcea.K
            << " P=" << rc.mcea.P << " N=" << rc.mcea.N << "\n";
  const SearchState st = run_mcea(space, *evaluator, rc.mcea, &logger);

  ordered_json result;
  result["seed"] = rc.seed;
  result["tolerance"] = rc.mcea.budget_tolerance;
  result["f0"] = plan.f0;
  result["budgets"] = plan.budgets;
  result["best"] =
      tuple_json(st.best_alpha, st.best_strategies, st.best_objective, space);
  result["final"] = tuple_json(
      st.alpha, st.strategies,
      st.iterations.empty() ? st.best_objective
                            : st.iterations.back().objective,
      space);
  result["iterations"] = ordered_json::array();
  CsvTable telemetry;
  telemetry.header = {"t", "stage", "acc_std"};
  for (const IterationRecord& rec : st.iterations) {
    ordered_json it{{"t", rec.t},
                    {"objective", rec.objective},
                    {"best_objective", rec.best_objective},
                    {"stage_acc_std", rec.stage_acc_std}};
    result["iterations"].push_back(std::move(it));
    for (std::size_t j = 0; j < rec.stage_acc_std.size(); ++j)
      telemetry.rows.push_back({std::to_string(rec.t),
                                std::to_string(j + 1),
                                std::to_string(rec.stage_acc_std[j])});
  }

  atomic_write_file((out / "result.json").string(), result.dump(2) + "\n");
  atomic_write_file((out / "eval_log.jsonl").string(), logger.text());
  write_csv((out / "telemetry.csv").string(), telemetry);
  atomic_write_file((out / "telemetry.svg").string(),
                    svg_telemetry(st.iterations));

  std::cout << "best objective: " << st.best_objective << "\nstrategies:";
  for (std::size_t j = 1; j < st.best_strategies.size(); ++j) {
    const ScalingStrategy& s = st.best_strategies[j];
    std::cout << "  stage " << j << ": (" << s.d() << ", " << s.w() << ", "
              << s.r() << ")";
  }
  std::cout << "\nwrote: " << (out / "result.json").string() << ' '
            << (out / "eval_log.jsonl").string() << ' '
            << (out / "telemetry.csv").string() << ' '
            << (out / "telemetry.svg").string() << "\n";
  return 0;
}

// --- fit ----------------------------------------------------------------------

std::vector<std::pair<int, ScalingStrategy>> parse_staged_strategies(
    const std::string& path) {
  ordered_json j = ordered_json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON in " + path);
  const ordered_json* arr = nullptr;
  if (j.contains("strategies") && j.at("strategies").is_array())
    arr = &j.at("strategies");
  else if (j.contains("best") && j.at("best").contains("strategies"))
    arr = &j.at("best").at("strategies");
  if (arr == nullptr)
    throw IoError(path + ": expected a \"strategies\" array or a search "
                         "result with best.strategies");
  std::vector<std::pair<int, ScalingStrategy>> staged;
  for (const ordered_json& row : *arr) {
    const int stage = row.at("stage").get<int>();
    staged.emplace_back(stage, ScalingStrategy::from_reals(
                                   row.at("d").get<double>(),
                                   row.at("w").get<double>(),
                                   row.at("r").get<double>()));
  }
  if (staged.empty()) throw IoError(path + ": no strategies found");
  return staged;
}

int cmd_fit(const std::string& input, const std::string& family_flag,
            const std::string& stages_flag, const std::string& out_dir) {
  const auto staged = parse_staged_strategies(input);
  const ScalingPoints points = ScalingPoints::from_strategies(staged);

  std::vector<FitReport> reports;
  if (family_flag == "all") {
    reports = compare_families(points);
  } else {
    reports.push_back(fit_scaling_law(points, family_from_name(family_flag)));
  }

  std::vector<int> stages;
  std::stringstream ss(stages_flag);
  for (std::string tok; std::getline(ss, tok, ',');)
    if (!tok.empty()) stages.push_back(std::stoi(tok));
  if (stages.empty()) throw std::invalid_argument("no stages to extrapolate");

  const FitReport& best = reports.front();
  ordered_json out;
  out["reports"] = ordered_json::array();
  CsvTable cmp;
  cmp.header = {"family", "dimension", "a0", "a1", "rss"};
  for (const FitReport& r : reports) {
    const char* dim_names[3] = {"d", "w", "r"};
    const DimensionFit* fits[3] = {&r.d, &r.w, &r.r};
    ordered_json dims;
    for (int i = 0; i < 3; ++i) {
      dims[dim_names[i]] = ordered_json{{"a0", fits[i]->params.a0},
                                        {"a1", fits[i]->params.a1},
                                        {"rss", fits[i]->rss}};
      char a0[32], a1[32], rss[32];
      std::snprintf(a0, sizeof a0, "%.9g", fits[i]->params.a0);
      std::snprintf(a1, sizeof a1, "%.9g", fits[i]->params.a1);
      std::snprintf(rss, sizeof rss, "%.9g", fits[i]->rss);
      cmp.rows.push_back({family_name(r.family), dim_names[i], a0, a1, rss});
    }
    out["reports"].push_back(ordered_json{{"family", family_name(r.family)},
                                          {"dimensions", std::move(dims)},
                                          {"total_rss", r.total_rss()}});
  }
  out["extrapolations"] = ordered_json::array();
  int j_max = 3;
  for (int j : stages) j_max = std::max(j_max, j);
  for (int j : stages) {
    const ScalingStrategy s = extrapolate(best, j);
    out["extrapolations"].push_back(ordered_json{{"stage", j},
                                                 {"family",
                                                  family_name(best.family)},
                                                 {"d", s.d()},
                                                 {"w", s.w()},
                                                 {"r", s.r()}});
  }

  const fs::path out_p(out_dir);
  atomic_write_file((out_p / "fit.json").string(), out.dump(2) + "\n");
  write_csv((out_p / "fit_comparison.csv").string(), cmp);
  atomic_write_file((out_p / "fit_curves.svg").string(),
                    svg_fit_curves(points, reports, j_max));

  std::cout << "best family: " << family_name(best.family)
            << " (total rss " << best.total_rss() << ")\n";
  for (const ordered_json& e : out["extrapolations"])
    std::cout << "stage " << e.at("stage").get<int>() << ": d="
              << e.at("d").get<double>() << " w=" << e.at("w").get<double>()
              << " r=" << e.at("r").get<double>() << "\n";
  std::cout << "wrote: " << (out_p / "fit.json").string() << ' '
            << (out_p / "fit_comparison.csv").string() << ' '
            << (out_p / "fit_curves.svg").string() << "\n";
  return 0;
}

// --- rank ----------------------------------------------------------------------

int cmd_rank(const std::string& input, const std::string& out_dir,
             bool write_json) {
  const CsvTable t = read_csv(input);
  if (t.header.size() < 2 || t.header[0] != "acc" || t.header[1] != "flops")
    throw std::invalid_argument(input + ": expected header \"acc,flops\"");
  PairedSeries series;
  for (const auto& row : t.rows) {
    series.acc.push_back(std::stod(row[0]));
    series.flops.push_back(std::stod(row[1]));
  }
  series.validate();

  auto pct = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0);
    return std::string(buf);
  };

  ordered_json out;
  bool have_pearson = true, have_spearman = true;
  double p = 0.0, s = 0.0;
  try {
    p = pearson(series);
  } catch (const ConstantVectorError&) {
    have_pearson = false;
  }
  try {
    s = spearman(series);
  } catch (const ConstantVectorError&) {
    have_spearman = false;
  }
  const KendallResult k = kendall_report(series);

  std::cout << "pearson:  "
            << (have_pearson ? pct(p) : std::string("n/a (constant vector)"))
            << "\nspearman: "
            << (have_spearman ? pct(s) : std::string("n/a (constant vector)"))
            << "\nkendall:  " << pct(k.tau_abs);
  if (k.degenerate_constant) std::cout << "  [degenerate: constant vector]";
  std::cout << "\n";

  if (write_json) {
    out["pearson"] = have_pearson ? ordered_json(p) : ordered_json(nullptr);
    out["spearman"] = have_spearman ? ordered_json(s) : ordered_json(nullptr);
    out["kendall"] = k.tau_abs;
    out["degenerate_constant"] = k.degenerate_constant;
    out["count"] = series.size();
    const fs::path out_p(out_dir);
    atomic_write_file((out_p / "rank.json").string(), out.dump(2) + "\n");
    std::cout << "wrote: " << (out_p / "rank.json").string() << "\n";
  }
  return 0;
}

// --- report ----------------------------------------------------------------------

int cmd_report(const std::string& input, const std::string& out_dir,
               bool write_svg) {
  ordered_json j = ordered_json::parse(read_file(input), nullptr, false);
  if (j.is_discarded()) throw IoError("malformed JSON in " + input);

  std::cout << "budgets:";
  for (const auto& b : j.at("budgets")) std::cout << ' ' << b.get<long long>();
  std::cout << "\nbest objective: " << j.at("best").at("objective").get<double>()
            << "\n";
  for (const auto& s : j.at("best").at("strategies"))
    std::cout << "  stage " << s.at("stage").get<int>() << ": d="
              << s.at("d").get<double>() << " w=" << s.at("w").get<double>()
              << " r=" << s.at("r").get<double>() << " flops="
              << s.at("flops").get<long long>() << "\n";

  std::vector<IterationRecord> records;
  if (j.contains("iterations")) {
    for (const auto& it : j.at("iterations")) {
      IterationRecord rec;
      rec.t = it.at("t").get<int>();
      rec.objective = it.at("objective").get<double>();
      rec.best_objective = it.at("best_objective").get<double>();
      rec.stage_acc_std =
          it.at("stage_acc_std").get<std::vector<double>>();
      records.push_back(std::move(rec));
    }
    std::cout << "iterations: " << records.size() << "\n";
    if (!records.empty()) {
      const IterationRecord& last = records.back();
      std::cout << "final stage acc std:";
      for (double v : last.stage_acc_std) std::cout << ' ' << v;
      std::cout << "\n";
    }
  }
  if (write_svg && !records.empty()) {
    const fs::path out_p(out_dir);
    atomic_write_file((out_p / "telemetry.svg").string(),
                      svg_telemetry(records));
    std::cout << "wrote: " << (out_p / "telemetry.svg").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scalenas: joint base-architecture and scaling-strategy search"};
  app.require_subcommand(1);

  std::string config_path, out_dir, input_path;
  std::uint64_t seed = 0;
  long long samples = -1;
  std::string family = "all", stages = "4,5";
  bool rank_json = false;

  auto add_config_opts = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "run config JSON");
    if (config_required) c->required();
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--out", out_dir, "output directory");
  };

  CLI::App* sim = app.add_subcommand(
      "simulate-space", "sample paths and plot the FLOPs distribution");
  add_config_opts(sim, true);
  sim->add_option("--samples", samples, "number of draws per sampler");

  CLI::App* train = app.add_subcommand(
      "train-evaluator", "train and persist the toy supernet evaluator");
  add_config_opts(train, true);

  CLI::App* search = app.add_subcommand(
      "search", "run the alternating base/strategy search");
  add_config_opts(search, true);
  search->add_option("--samples", samples,
                     "Monte-Carlo samples for budget selection");

  CLI::App* fit = app.add_subcommand(
      "fit", "fit scaling laws to searched strategies and extrapolate");
  fit->add_option("input", input_path, "strategies JSON or search result")
      ->required();
  fit->add_option("--family", family,
                  "exponential | linear | squared | all");
  fit->add_option("--stages", stages, "comma-separated stages to extrapolate");
  fit->add_option("--out", out_dir, "output directory");

  CLI::App* rank = app.add_subcommand(
      "rank", "rank-correlation statistics of an (acc, flops) table");
  rank->add_option("input", input_path, "CSV with header acc,flops")
      ->required();
  rank->add_option("--out", out_dir, "output directory");
  rank->add_flag("--json", rank_json, "also write rank.json");

  CLI::App* report = app.add_subcommand(
      "report", "summarize a search result JSON");
  report->add_option("input", input_path, "result.json from search")
      ->required();
  report->add_option("--out", out_dir, "output directory (telemetry plot)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto load_rc = [&](CLI::App* sub) {
      RunConfig rc = load_run_config(config_path);
      if (sub->count("--seed")) {
        rc.seed = seed;
        rc.mcea.seed = seed;
      }
      if (sub->count("--out")) rc.out_dir = out_dir;
      return rc;
    };
    if (sim->parsed()) {
      RunConfig rc = load_rc(sim);
      if (sim->count("--samples")) rc.draws = samples;
      return cmd_simulate_space(rc);
    }
    if (train->parsed()) return cmd_train_evaluator(load_rc(train));
    if (search->parsed()) {
      RunConfig rc = load_rc(search);
      if (search->count("--samples")) rc.budget_samples = samples;
      return cmd_search(rc);
    }
    const std::string out = out_dir.empty() ? std::string("out") : out_dir;
    if (fit->parsed()) return cmd_fit(input_path, family, stages, out);
    if (rank->parsed())
      return cmd_rank(input_path, out, rank_json || !out_dir.empty());
    if (report->parsed())
      return cmd_report(input_path, out, !out_dir.empty());
  } catch (const InfeasibleSpaceError& e) {
    std::cerr << "error: infeasible search space: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
