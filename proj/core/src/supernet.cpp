#include "scalenas/supernet.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "scalenas/flops.hpp"

namespace scalenas {

namespace {

constexpr std::uint32_t kMagic = 0x534e4556;  // "SNEV"
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_u64(std::ostream& os, std::uint64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& os, double v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double read_f64(std::istream& is) {
  double v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) write_f64(os, m(r, c));
}
void read_matrix(std::istream& is, Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = read_f64(is);
}

}  // namespace

ToySupernet::ToySupernet(const SearchSpace& space, const SupernetConfig& config)
    : space_(space), cfg_(config) {
  if (cfg_.l_max < 1 || cfg_.w_max < 2 || cfg_.f_max < 2 || cfg_.classes < 2)
    throw std::invalid_argument("bad supernet dimensions");

  int d_max_milli = 1000;
  for (const auto& g : space.grids)
    d_max_milli = std::max(d_max_milli, g.depth.max_milli);
  blocks_min_ = 0;
  blocks_max_ = 0;
  for (const auto& st : space.stages) {
    blocks_min_ += st.n_min;
    blocks_max_ += st.scalable_depth
                       ? static_cast<int>(ceil_scale(st.n_max, d_max_milli))
                       : st.n_max;
  }
  // Reference capacity mass: the mid-point base (median depth, mean expand
  // rate / kernel / SE share per block) maps to width_base units.
  double ref = space.stem_out_channels;
  for (const auto& st : space.stages) {
    double e_mid = 0.0, k_mid = 0.0, se_mid = 0.0;
    for (int e : st.expand_rates) e_mid += e;
    for (int k : st.kernels) k_mid += k;
    for (bool se : st.se_options) se_mid += se ? 1.0 : 0.0;
    e_mid /= static_cast<double>(st.expand_rates.size());
    k_mid /= static_cast<double>(st.kernels.size());
    se_mid /= static_cast<double>(st.se_options.size());
    const double n_mid = 0.5 * (st.n_min + st.n_max);
    ref += n_mid * (st.out_channels * e_mid + k_mid + 4.0 * se_mid);
  }
  base_channel_sum_ = std::max<long long>(1, std::llround(ref));

  visit_counts_.assign(space.grids.size(), 0);
  init_weights();
  build_dataset();
}

void ToySupernet::init_weights() {
  Rng rng(hash_combine(kFnvOffset, cfg_.init_seed));
  auto fill = [&rng](Eigen::MatrixXd& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) m(r, c) = rng.normal();
  };
  w_in_.setZero(cfg_.w_max, cfg_.f_max);
  fill(w_in_);
  w_mid_.assign(static_cast<std::size_t>(cfg_.l_max),
                Eigen::MatrixXd(cfg_.w_max, cfg_.w_max));
  for (auto& m : w_mid_) fill(m);
  w_out_.setZero(cfg_.classes, cfg_.w_max);
  fill(w_out_);
  b_out_.setZero(cfg_.classes);

  v_in_.setZero(cfg_.w_max, cfg_.f_max);
  v_mid_.assign(static_cast<std::size_t>(cfg_.l_max),
                Eigen::MatrixXd::Zero(cfg_.w_max, cfg_.w_max));
  v_out_.setZero(cfg_.classes, cfg_.w_max);
  v_bout_.setZero(cfg_.classes);
}

void ToySupernet::build_dataset() {
  Rng rng(hash_combine(kFnvOffset, cfg_.data_seed));
  Eigen::MatrixXd means(cfg_.classes, cfg_.f_max);
  for (int c = 0; c < cfg_.classes; ++c)
    for (int d = 0; d < cfg_.f_max; ++d)
      means(c, d) = cfg_.data_mean_scale * rng.normal();
  const int total = cfg_.n_train + cfg_.n_val;
  Eigen::MatrixXd X(total, cfg_.f_max);
  std::vector<int> y(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    const int cls = static_cast<int>(rng.uniform_u64(cfg_.classes));
    y[static_cast<std::size_t>(i)] = cls;
    for (int d = 0; d < cfg_.f_max; ++d)
      X(i, d) = means(cls, d) + cfg_.data_noise * rng.normal();
  }
  x_train_ = X.topRows(cfg_.n_train);
  x_val_ = X.bottomRows(cfg_.n_val);
  y_train_.assign(y.begin(), y.begin() + cfg_.n_train);
  y_val_.assign(y.begin() + cfg_.n_train, y.end());
}

PathSlice ToySupernet::map_path(const BaseArch& base,
                                const ScalingStrategy& s) const {
  const ScaledArch scaled = apply_strategy(base, s, space_);
  long long blocks = 0;
  long long chan_sum = scaled.stem_out_channels;
  for (const auto& st : scaled.stages) {
    blocks += static_cast<long long>(st.blocks.size());
    for (const BlockChoice& b : st.blocks)
      chan_sum += static_cast<long long>(st.out_channels) * b.expand_rate +
                  b.kernel + (b.use_se ? 4 : 0);
  }
  PathSlice p;
  const double span = std::max(1, blocks_max_ - blocks_min_);
  const double depth_pos =
      (static_cast<double>(blocks) - blocks_min_) / span;  // 0..1 in-range
  p.k = std::clamp(static_cast<int>(std::lround(2.0 + (cfg_.l_max - 2.0) *
                                                          depth_pos)),
                   1, cfg_.l_max);
  const double chan_ratio =
      static_cast<double>(chan_sum) / static_cast<double>(base_channel_sum_);
  p.c = std::clamp(static_cast<int>(std::lround(cfg_.width_base * chan_ratio)),
                   2, cfg_.w_max);
  const double res_ratio = static_cast<double>(scaled.input_resolution) /
                           static_cast<double>(space_.base_resolution);
  p.f = std::clamp(static_cast<int>(std::lround(cfg_.feat_base * res_ratio)),
                   2, cfg_.f_max);
  return p;
}

double ToySupernet::train_step(const Eigen::MatrixXd& X,
                               const std::vector<int>& y, const PathSlice& p,
                               double lr) {
  const int n = static_cast<int>(X.rows());
  const int k = p.k, c = p.c, f = p.f;
  const double inv_sf = 1.0 / std::sqrt(static_cast<double>(f));
  const double inv_sc = 1.0 / std::sqrt(static_cast<double>(c));

  // Forward: h0 = tanh(x W_in^T / sqrt(f)); h_{i+1} = h_i + tanh(h_i W_i^T / sqrt(c)).
  std::vector<Eigen::MatrixXd> hs, ts;
  hs.reserve(static_cast<std::size_t>(k) + 1);
  ts.reserve(static_cast<std::size_t>(k));
  Eigen::MatrixXd h0 =
      (X.leftCols(f) * w_in_.topLeftCorner(c, f).transpose() * inv_sf)
          .array()
          .tanh()
          .matrix();
  hs.push_back(std::move(h0));
  for (int i = 0; i < k; ++i) {
    Eigen::MatrixXd t =
        (hs.back() * w_mid_[static_cast<std::size_t>(i)].topLeftCorner(c, c).transpose() *
         inv_sc)
            .array()
            .tanh()
            .matrix();
    hs.push_back(hs.back() + t);
    ts.push_back(std::move(t));
  }
  Eigen::MatrixXd logits =
      hs.back() * w_out_.leftCols(c).transpose() * inv_sc;
  logits.rowwise() += b_out_.transpose();

  // Softmax cross-entropy.
  Eigen::MatrixXd P = logits;
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mx = P.row(i).maxCoeff();
    P.row(i) = (P.row(i).array() - mx).exp();
    P.row(i) /= P.row(i).sum();
    loss -= std::log(P(i, y[static_cast<std::size_t>(i)]) + 1e-12);
  }
  loss /= n;

  Eigen::MatrixXd G = P;
  for (int i = 0; i < n; ++i) G(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  G /= static_cast<double>(n);

  // Backward.
  Eigen::MatrixXd g_wout = G.transpose() * hs.back() * inv_sc;
  Eigen::VectorXd g_bout = G.colwise().sum();
  Eigen::MatrixXd gh = G * w_out_.leftCols(c) * inv_sc;
  std::vector<Eigen::MatrixXd> g_mid(static_cast<std::size_t>(k));
  for (int i = k - 1; i >= 0; --i) {
    const Eigen::MatrixXd& t = ts[static_cast<std::size_t>(i)];
    Eigen::MatrixXd gz =
        (gh.array() * (1.0 - t.array().square())).matrix() * inv_sc;
    g_mid[static_cast<std::size_t>(i)] =
        gz.transpose() * hs[static_cast<std::size_t>(i)];
    gh += gz * w_mid_[static_cast<std::size_t>(i)].topLeftCorner(c, c);
  }
  Eigen::MatrixXd gz0 =
      (gh.array() * (1.0 - hs[0].array().square())).matrix() * inv_sf;
  Eigen::MatrixXd g_win = gz0.transpose() * X.leftCols(f);

  // Momentum updates restricted to the path's slice.
  auto upd = [this, lr](Eigen::Ref<Eigen::MatrixXd> w,
                        Eigen::Ref<Eigen::MatrixXd> v,
                        const Eigen::MatrixXd& g) {
    v = cfg_.momentum * v + g;
    w -= lr * v;
  };
  upd(w_out_.leftCols(c), v_out_.leftCols(c), g_wout);
  v_bout_ = cfg_.momentum * v_bout_ + g_bout;
  b_out_ -= lr * v_bout_;
  for (int i = 0; i < k; ++i)
    upd(w_mid_[static_cast<std::size_t>(i)].topLeftCorner(c, c),
        v_mid_[static_cast<std::size_t>(i)].topLeftCorner(c, c),
        g_mid[static_cast<std::size_t>(i)]);
  upd(w_in_.topLeftCorner(c, f), v_in_.topLeftCorner(c, f), g_win);
  return loss;
}

void ToySupernet::train(const std::function<SampleEvent(Rng&)>& sampler,
                        int steps, Rng& rng) {
  if (frozen_) throw std::logic_error("supernet already frozen");
  if (steps < 0) throw std::invalid_argument("steps must be >= 0");
  double initial_loss = -1.0;
  Eigen::MatrixXd batch_x(cfg_.batch, cfg_.f_max);
  std::vector<int> batch_y(static_cast<std::size_t>(cfg_.batch));
  for (int step = 0; step < steps; ++step) {
    const double lr =
        cfg_.lr0 * 0.5 * (1.0 + std::cos(M_PI * step / std::max(1, steps)));
    SampleEvent ev = sampler(rng);
    if (ev.stage >= 0 && ev.stage < static_cast<int>(visit_counts_.size()))
      ++visit_counts_[static_cast<std::size_t>(ev.stage)];
    const PathSlice p = map_path(ev.base, ev.strategy);
    for (int i = 0; i < cfg_.batch; ++i) {
      const int idx = static_cast<int>(rng.uniform_u64(cfg_.n_train));
      batch_x.row(i) = x_train_.row(idx);
      batch_y[static_cast<std::size_t>(i)] = y_train_[static_cast<std::size_t>(idx)];
    }
    const double loss = train_step(batch_x, batch_y, p, lr);
    if (initial_loss < 0.0) initial_loss = loss;
    if (loss > 10.0 * initial_loss)
      throw TrainingDivergedError("training loss exceeded 10x initial value");
  }
  frozen_ = true;
}

double ToySupernet::evaluate_slice(const PathSlice& p) const {
  const int k = p.k, c = p.c, f = p.f;
  const double inv_sf = 1.0 / std::sqrt(static_cast<double>(f));
  const double inv_sc = 1.0 / std::sqrt(static_cast<double>(c));
  Eigen::MatrixXd h =
      (x_val_.leftCols(f) * w_in_.topLeftCorner(c, f).transpose() * inv_sf)
          .array()
          .tanh()
          .matrix();
  for (int i = 0; i < k; ++i)
    h += (h * w_mid_[static_cast<std::size_t>(i)].topLeftCorner(c, c).transpose() *
          inv_sc)
             .array()
             .tanh()
             .matrix();
  Eigen::MatrixXd logits = h * w_out_.leftCols(c).transpose() * inv_sc;
  logits.rowwise() += b_out_.transpose();
  int correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (static_cast<int>(arg) == y_val_[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(y_val_.size());
}

double ToySupernet::evaluate(const BaseArch& base,
                             const ScalingStrategy& s) const {
  if (!frozen_) throw std::logic_error("evaluate requires a frozen supernet");
  return evaluate_slice(map_path(base, s));
}

std::uint64_t ToySupernet::space_fingerprint() const {
  std::uint64_t h = kFnvOffset;
  h = hash_combine(h, static_cast<std::uint64_t>(space_.base_resolution));
  h = hash_combine(h, static_cast<std::uint64_t>(space_.stem_out_channels));
  for (const auto& st : space_.stages) {
    h = hash_combine(h, static_cast<std::uint64_t>(st.n_min));
    h = hash_combine(h, static_cast<std::uint64_t>(st.n_max));
    h = hash_combine(h, static_cast<std::uint64_t>(st.out_channels));
  }
  for (const auto& g : space_.grids) {
    h = hash_combine(h, static_cast<std::uint64_t>(g.depth.max_milli));
    h = hash_combine(h, static_cast<std::uint64_t>(g.width.max_milli));
    h = hash_combine(h, static_cast<std::uint64_t>(g.resolution.max_milli));
  }
  return h;
}

void ToySupernet::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  write_u32(os, kMagic);
  write_u32(os, kVersion);
  write_u64(os, space_fingerprint());
  write_u32(os, static_cast<std::uint32_t>(cfg_.l_max));
  write_u32(os, static_cast<std::uint32_t>(cfg_.w_max));
  write_u32(os, static_cast<std::uint32_t>(cfg_.f_max));
  write_u32(os, static_cast<std::uint32_t>(cfg_.classes));
  write_u32(os, static_cast<std::uint32_t>(cfg_.n_train));
  write_u32(os, static_cast<std::uint32_t>(cfg_.n_val));
  write_f64(os, cfg_.data_mean_scale);
  write_f64(os, cfg_.data_noise);
  write_u64(os, cfg_.data_seed);
  write_u64(os, cfg_.init_seed);
  write_f64(os, cfg_.lr0);
  write_f64(os, cfg_.momentum);
  write_u32(os, static_cast<std::uint32_t>(cfg_.batch));
  write_u32(os, static_cast<std::uint32_t>(cfg_.width_base));
  write_u32(os, static_cast<std::uint32_t>(cfg_.feat_base));
  write_u32(os, frozen_ ? 1 : 0);
  for (long long v : visit_counts_)
    write_u64(os, static_cast<std::uint64_t>(v));
  write_matrix(os, w_in_);
  for (const auto& m : w_mid_) write_matrix(os, m);
  write_matrix(os, w_out_);
  for (Eigen::Index i = 0; i < b_out_.size(); ++i) write_f64(os, b_out_(i));
  if (!os) throw std::runtime_error("write failed: " + path);
}

ToySupernet ToySupernet::load(const std::string& path,
                              const SearchSpace& space) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  if (read_u32(is) != kMagic) throw std::runtime_error("bad evaluator file magic");
  if (read_u32(is) != kVersion)
    throw std::runtime_error("unsupported evaluator file version");
  const std::uint64_t fingerprint = read_u64(is);
  SupernetConfig cfg;
  cfg.l_max = static_cast<int>(read_u32(is));
  cfg.w_max = static_cast<int>(read_u32(is));
  cfg.f_max = static_cast<int>(read_u32(is));
  cfg.classes = static_cast<int>(read_u32(is));
  cfg.n_train = static_cast<int>(read_u32(is));
  cfg.n_val = static_cast<int>(read_u32(is));
  cfg.data_mean_scale = read_f64(is);
  cfg.data_noise = read_f64(is);
  cfg.data_seed = read_u64(is);
  cfg.init_seed = read_u64(is);
  cfg.lr0 = read_f64(is);
  cfg.momentum = read_f64(is);
  cfg.batch = static_cast<int>(read_u32(is));
  cfg.width_base = static_cast<int>(read_u32(is));
  cfg.feat_base = static_cast<int>(read_u32(is));
  ToySupernet net(space, cfg);
  if (net.space_fingerprint() != fingerprint)
    throw std::runtime_error("evaluator file was built for a different space");
  net.frozen_ = read_u32(is) != 0;
  for (auto& v : net.visit_counts_) v = static_cast<long long>(read_u64(is));
  read_matrix(is, net.w_in_);
  for (auto& m : net.w_mid_) read_matrix(is, m);
  read_matrix(is, net.w_out_);
  for (Eigen::Index i = 0; i < net.b_out_.size(); ++i)
    net.b_out_(i) = read_f64(is);
  if (!is) throw std::runtime_error("truncated evaluator file: " + path);
  return net;
}

}  // namespace scalenas
