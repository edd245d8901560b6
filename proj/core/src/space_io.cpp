#include "scalenas/space_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace scalenas {

namespace {

using nlohmann::json;

json parse(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw IoError("malformed JSON in " + what);
  return j;
}

int to_milli(const json& v, const std::string& what) {
  if (v.is_number_integer() && v.get<long long>() >= 1)
    return static_cast<int>(v.get<long long>() * 1000);
  if (!v.is_number()) throw IoError(what + " must be a number");
  const double x = v.get<double>();
  const long long m = std::llround(x * 1000.0);
  if (m < 0 || m > 1'000'000'000) throw IoError(what + " is out of range");
  return static_cast<int>(m);
}

AxisSpec axis_from_json(const json& j, const std::string& what) {
  if (!j.is_object()) throw IoError(what + " must be an object");
  AxisSpec a;
  a.min_milli = to_milli(j.at("min"), what + ".min");
  a.max_milli = j.contains("max") ? to_milli(j.at("max"), what + ".max")
                                  : a.min_milli;
  if (j.contains("step")) {
    const double st = j.at("step").get<double>();
    a.step_milli = static_cast<int>(std::llround(st * 1000.0));
  }
  if (a.step_milli < 0) throw IoError(what + ".step must be >= 0");
  if (a.max_milli < a.min_milli) throw IoError(what + ".max < min");
  if (a.step_milli == 0 && a.max_milli != a.min_milli)
    throw IoError(what + ": step 0 requires min == max");
  if (a.step_milli > 0 && (a.max_milli - a.min_milli) % a.step_milli != 0)
    throw IoError(what + ": (max - min) must be a multiple of step");
  return a;
}

json axis_to_json(const AxisSpec& a) {
  return json{{"min", a.min_milli / 1000.0},
              {"step", a.step_milli / 1000.0},
              {"max", a.max_milli / 1000.0}};
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

}  // namespace

namespace {
SearchSpace space_from_json_impl(const std::string& text);
RunConfig run_config_impl(const std::string& text, const std::string& base_dir);
}  // namespace

SearchSpace space_from_json_text(const std::string& text) {
  try {
    return space_from_json_impl(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("search space: ") + e.what());
  }
}

RunConfig run_config_from_json_text(const std::string& text,
                                    const std::string& base_dir) {
  try {
    return run_config_impl(text, base_dir);
  } catch (const json::exception& e) {
    throw IoError(std::string("run config: ") + e.what());
  }
}

namespace {

SearchSpace space_from_json_impl(const std::string& text) {
  const json j = parse(text, "search space");
  SearchSpace sp;
  sp.base_resolution = get_or(j, "base_resolution", 224);
  sp.num_classes = get_or(j, "num_classes", 1000);
  if (j.contains("stem")) {
    const json& st = j.at("stem");
    sp.stem_out_channels = get_or(st, "out_channels", 32);
    sp.stem_kernel = get_or(st, "kernel", 3);
    sp.stem_stride = get_or(st, "stride", 2);
    sp.stem_scale_width_out = get_or(st, "scale_width_out", true);
  }
  sp.head_channels = get_or(j, "head_channels", 1280);
  sp.forced_f0 = get_or(j, "forced_f0", 0LL);
  sp.budget_granularity = get_or(j, "budget_granularity", 50'000'000LL);

  if (!j.contains("stages") || !j.at("stages").is_array() ||
      j.at("stages").empty())
    throw IoError("search space needs a non-empty \"stages\" array");
  for (const json& row : j.at("stages")) {
    StageSpec st;
    st.name = get_or<std::string>(row, "name", "");
    st.n_min = get_or(row, "n_min", 1);
    st.n_max = get_or(row, "n_max", st.n_min);
    st.out_channels = row.at("out_channels").get<int>();
    st.stride = get_or(row, "stride", 1);
    if (row.contains("expand_rates"))
      st.expand_rates = row.at("expand_rates").get<std::vector<int>>();
    if (row.contains("kernels"))
      st.kernels = row.at("kernels").get<std::vector<int>>();
    if (row.contains("se_options"))
      st.se_options = row.at("se_options").get<std::vector<bool>>();
    if (row.contains("scalable")) {
      const json& sc = row.at("scalable");
      st.scalable_depth = get_or(sc, "depth", true);
      st.scalable_width_in = get_or(sc, "width_in", true);
      st.scalable_width_out = get_or(sc, "width_out", true);
      st.scalable_resolution = get_or(sc, "resolution", true);
    }
    sp.stages.push_back(std::move(st));
  }

  if (!j.contains("grids") || !j.at("grids").is_array() ||
      j.at("grids").empty())
    throw IoError("search space needs a non-empty \"grids\" array");
  bool has_stage0 = false;
  for (const json& row : j.at("grids")) {
    StrategyGrid g;
    g.stage_index = row.at("stage").get<int>();
    if (g.stage_index == 0) has_stage0 = true;
    g.depth = axis_from_json(row.at("depth"), "grid.depth");
    g.width = axis_from_json(row.at("width"), "grid.width");
    g.resolution = axis_from_json(row.at("resolution"), "grid.resolution");
    sp.grids.push_back(std::move(g));
  }
  if (!has_stage0) {
    StrategyGrid g0;
    g0.stage_index = 0;
    sp.grids.insert(sp.grids.begin(), g0);
  }
  for (std::size_t i = 0; i < sp.grids.size(); ++i)
    if (sp.grids[i].stage_index != static_cast<int>(i))
      throw IoError("grid stages must be consecutive from 0");

  sp.validate();
  return sp;
}

}  // namespace

std::string space_to_json_text(const SearchSpace& sp) {
  nlohmann::ordered_json j;
  j["base_resolution"] = sp.base_resolution;
  j["num_classes"] = sp.num_classes;
  j["stem"] = {{"out_channels", sp.stem_out_channels},
               {"kernel", sp.stem_kernel},
               {"stride", sp.stem_stride},
               {"scale_width_out", sp.stem_scale_width_out}};
  j["head_channels"] = sp.head_channels;
  j["forced_f0"] = sp.forced_f0;
  j["budget_granularity"] = sp.budget_granularity;
  j["stages"] = nlohmann::ordered_json::array();
  for (const StageSpec& st : sp.stages) {
    nlohmann::ordered_json row;
    row["name"] = st.name;
    row["n_min"] = st.n_min;
    row["n_max"] = st.n_max;
    row["out_channels"] = st.out_channels;
    row["stride"] = st.stride;
    row["expand_rates"] = st.expand_rates;
    row["kernels"] = st.kernels;
    row["se_options"] = st.se_options;
    row["scalable"] = {{"depth", st.scalable_depth},
                       {"width_in", st.scalable_width_in},
                       {"width_out", st.scalable_width_out},
                       {"resolution", st.scalable_resolution}};
    j["stages"].push_back(std::move(row));
  }
  j["grids"] = nlohmann::ordered_json::array();
  for (const StrategyGrid& g : sp.grids) {
    nlohmann::ordered_json row;
    row["stage"] = g.stage_index;
    row["depth"] = axis_to_json(g.depth);
    row["width"] = axis_to_json(g.width);
    row["resolution"] = axis_to_json(g.resolution);
    j["grids"].push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

SearchSpace load_space(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open search-space file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  try {
    return space_from_json_text(ss.str());
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

namespace {

RunConfig run_config_impl(const std::string& text,
                          const std::string& base_dir) {
  const json j = parse(text, "run config");
  RunConfig rc;
  rc.seed = get_or(j, "seed", std::uint64_t{0});
  rc.budget_samples = get_or(j, "budget_samples", 100'000LL);
  rc.hss_weights = get_or<std::string>(j, "hss_weights", "equal");
  if (rc.hss_weights != "equal" && rc.hss_weights != "grid-size")
    throw IoError("hss_weights must be \"equal\" or \"grid-size\"");
  rc.draws = get_or(j, "draws", 750'000LL);
  rc.out_dir = get_or<std::string>(j, "out_dir", "out");

  if (!j.contains("space_file"))
    throw IoError("run config needs \"space_file\"");
  rc.space_file = j.at("space_file").get<std::string>();
  std::filesystem::path sp(rc.space_file);
  if (sp.is_relative() && !base_dir.empty())
    sp = std::filesystem::path(base_dir) / sp;
  rc.space = load_space(sp.string());

  if (j.contains("evaluator")) {
    const json& e = j.at("evaluator");
    rc.evaluator.kind = get_or<std::string>(e, "kind", "surrogate");
    if (rc.evaluator.kind != "surrogate" && rc.evaluator.kind != "toy-supernet")
      throw IoError("evaluator.kind must be \"surrogate\" or \"toy-supernet\"");
    rc.evaluator.train_steps = get_or(e, "train_steps", 1500);
    rc.evaluator.sampler = get_or<std::string>(e, "sampler", "hss");
    if (rc.evaluator.sampler != "hss" && rc.evaluator.sampler != "uniform")
      throw IoError("evaluator.sampler must be \"hss\" or \"uniform\"");
    rc.evaluator.weights_file = get_or<std::string>(e, "weights_file", "");
    SurrogateConfig& s = rc.evaluator.surrogate;
    s.seed = get_or(e, "seed", std::uint64_t{1});
    s.noise_sigma = get_or(e, "noise_sigma", 0.0);
    s.beta_d = get_or(e, "beta_d", s.beta_d);
    s.beta_w = get_or(e, "beta_w", s.beta_w);
    s.beta_r = get_or(e, "beta_r", s.beta_r);
    s.kappa_d = get_or(e, "kappa_d", s.kappa_d);
    s.kappa_w = get_or(e, "kappa_w", s.kappa_w);
    s.kappa_r = get_or(e, "kappa_r", s.kappa_r);
    if (e.contains("supernet")) {
      const json& sn = e.at("supernet");
      SupernetConfig& c = rc.evaluator.supernet;
      c.l_max = get_or(sn, "l_max", c.l_max);
      c.w_max = get_or(sn, "w_max", c.w_max);
      c.f_max = get_or(sn, "f_max", c.f_max);
      c.classes = get_or(sn, "classes", c.classes);
      c.n_train = get_or(sn, "n_train", c.n_train);
      c.n_val = get_or(sn, "n_val", c.n_val);
      c.data_mean_scale = get_or(sn, "data_mean_scale", c.data_mean_scale);
      c.data_noise = get_or(sn, "data_noise", c.data_noise);
      c.data_seed = get_or(sn, "data_seed", c.data_seed);
      c.init_seed = get_or(sn, "init_seed", c.init_seed);
      c.lr0 = get_or(sn, "lr0", c.lr0);
      c.momentum = get_or(sn, "momentum", c.momentum);
      c.batch = get_or(sn, "batch", c.batch);
      c.width_base = get_or(sn, "width_base", c.width_base);
      c.feat_base = get_or(sn, "feat_base", c.feat_base);
    }
  }

  rc.mcea.M = rc.space.max_stage();
  if (j.contains("mcea")) {
    const json& m = j.at("mcea");
    rc.mcea.M = get_or(m, "M", rc.mcea.M);
    rc.mcea.T = get_or(m, "T", rc.mcea.T);
    rc.mcea.K = get_or(m, "K", rc.mcea.K);
    rc.mcea.P = get_or(m, "P", rc.mcea.P);
    rc.mcea.N = get_or(m, "N", rc.mcea.N);
    if (m.contains("pi")) rc.mcea.pi = m.at("pi").get<std::vector<double>>();
    rc.mcea.mutation_rate = get_or(m, "mutation_rate", rc.mcea.mutation_rate);
    rc.mcea.budget_tolerance =
        get_or(m, "budget_tolerance", rc.mcea.budget_tolerance);
    rc.mcea.multi_objective =
        get_or(m, "multi_objective", rc.mcea.multi_objective);
  }
  rc.mcea.seed = rc.seed;
  rc.mcea.validate();
  return rc;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::string base =
      std::filesystem::path(path).parent_path().string();
  try {
    return run_config_from_json_text(ss.str(), base);
  } catch (const std::invalid_argument& e) {
    throw IoError(path + ": " + e.what());
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

}  // namespace scalenas
