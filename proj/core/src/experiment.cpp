#include "rfim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "rfim/optim.hpp"
#include "rfim/rng.hpp"
#include "rfim/whitening.hpp"

namespace rfim {

namespace {
constexpr double kDivergenceCeiling = 1e6;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::GD: return "GD";
    case Method::WhiteGD: return "WhiteGD";
    case Method::NGD: return "NGD";
    case Method::WhiteNGD: return "WhiteNGD";
    case Method::SGD: return "SGD";
    case Method::ADAM: return "ADAM";
    case Method::RNGD: return "RNGD";
  }
  throw std::logic_error("method_name: unknown method");
}

Method method_from_name(const std::string& name) {
  for (Method m : {Method::GD, Method::WhiteGD, Method::NGD, Method::WhiteNGD, Method::SGD,
                   Method::ADAM, Method::RNGD}) {
    if (method_name(m) == name) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

bool is_logistic_method(Method m) {
  return m == Method::GD || m == Method::WhiteGD || m == Method::NGD || m == Method::WhiteNGD;
}

void ExperimentConfig::validate() const {
  if (model != "logistic" && model != "mlp") {
    throw std::invalid_argument("config: model must be \"logistic\" or \"mlp\"");
  }
  if (is_logistic_method(method) != (model == "logistic")) {
    throw std::invalid_argument("config: method " + method_name(method) +
                                " is incompatible with model " + model);
  }
  if (model == "mlp") {
    if (layer_sizes.size() < 2) throw std::invalid_argument("config: mlp needs >= 2 layer sizes");
  }
  if (gamma_grid.empty() || momentum_grid.empty()) {
    throw std::invalid_argument("config: grids must be nonempty");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("config: gamma must be positive");
  if (epochs == 0) throw std::invalid_argument("config: epochs must be >= 1");
  if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0)) {
    throw std::invalid_argument("config: train_fraction in (0,1)");
  }
  if (refresh_period < 1) throw std::invalid_argument("config: refresh_period must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("config: lambda in [0,1]");
  if (eps_rel < 0.0) throw std::invalid_argument("config: eps_rel must be >= 0");
  if (!(omega > 0.0)) throw std::invalid_argument("config: omega must be positive");
}

namespace {

using nlohmann::ordered_json;

template <typename T>
void read_if(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  ExperimentConfig cfg;
  if (j.contains("method")) cfg.method = method_from_name(j.at("method").get<std::string>());
  read_if(j, "model", cfg.model);
  read_if(j, "layer_sizes", cfg.layer_sizes);
  read_if(j, "omega", cfg.omega);
  read_if(j, "source", cfg.data.source);
  read_if(j, "class_a", cfg.data.class_a);
  read_if(j, "class_b", cfg.data.class_b);
  read_if(j, "train_fraction", cfg.data.train_fraction);
  read_if(j, "train_cap", cfg.data.train_cap);
  read_if(j, "synth_n", cfg.data.synth_n);
  read_if(j, "synth_dim", cfg.data.synth_dim);
  read_if(j, "synth_separation", cfg.data.synth_separation);
  read_if(j, "gamma_grid", cfg.gamma_grid);
  read_if(j, "momentum_grid", cfg.momentum_grid);
  read_if(j, "gamma", cfg.gamma);
  read_if(j, "momentum", cfg.momentum);
  read_if(j, "epochs", cfg.epochs);
  read_if(j, "batch_size", cfg.batch_size);
  read_if(j, "refresh_period", cfg.refresh_period);
  read_if(j, "lambda", cfg.lambda);
  read_if(j, "eps_rel", cfg.eps_rel);
  read_if(j, "seed", cfg.seed);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json_text(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["method"] = method_name(cfg.method);
  j["model"] = cfg.model;
  j["layer_sizes"] = cfg.layer_sizes;
  j["omega"] = cfg.omega;
  j["source"] = cfg.data.source;
  j["class_a"] = cfg.data.class_a;
  j["class_b"] = cfg.data.class_b;
  j["train_fraction"] = cfg.data.train_fraction;
  j["train_cap"] = cfg.data.train_cap;
  j["synth_n"] = cfg.data.synth_n;
  j["synth_dim"] = cfg.data.synth_dim;
  j["synth_separation"] = cfg.data.synth_separation;
  j["gamma_grid"] = cfg.gamma_grid;
  j["momentum_grid"] = cfg.momentum_grid;
  j["gamma"] = cfg.gamma;
  j["momentum"] = cfg.momentum;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["refresh_period"] = cfg.refresh_period;
  j["lambda"] = cfg.lambda;
  j["eps_rel"] = cfg.eps_rel;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

std::string dataset_directory() {
  if (const char* env = std::getenv("RFIM_DATA_DIR")) return env;
  return "data";
}

namespace {

std::string mnist_images_path() { return dataset_directory() + "/train-images-idx3-ubyte"; }
std::string mnist_labels_path() { return dataset_directory() + "/train-labels-idx1-ubyte"; }

bool file_exists(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return static_cast<bool>(f);
}

}  // namespace

bool mnist_available() {
  return file_exists(mnist_images_path()) && file_exists(mnist_labels_path());
}

TrainingSet resolve_training_set(const ExperimentConfig& cfg, std::uint64_t seed) {
  const bool logistic = cfg.model == "logistic";
  std::string source = cfg.data.source;
  if (source == "auto") source = mnist_available() ? "mnist" : "synth";
  if (source == "synth_classes") source = "synth";  // alias; the model decides the class count

  Dataset full;
  if (source == "mnist") {
    full = load_idx(mnist_images_path(), mnist_labels_path());
    if (logistic) full = binary_subset(full, cfg.data.class_a, cfg.data.class_b);
  } else if (source == "synth") {
    if (logistic) {
      full = synth_blobs(cfg.data.synth_n, cfg.data.synth_dim, cfg.data.synth_separation,
                         Rng::mix(seed, 0xd5));
    } else {
      full = synth_classes(cfg.data.synth_n, cfg.layer_sizes.front(), cfg.layer_sizes.back(),
                           cfg.data.synth_separation, Rng::mix(seed, 0xd5));
    }
  } else {
    throw std::invalid_argument("config: unknown data source \"" + cfg.data.source + "\"");
  }

  Split split = train_test_split(full.size(), SplitSpec{cfg.data.train_fraction, seed});
  if (cfg.data.train_cap > 0 && split.train.size() > cfg.data.train_cap) {
    split.train.resize(cfg.data.train_cap);
  }
  Dataset train = subset(full, split.train);

  TrainingSet ts;
  ts.xs = std::move(train.features);
  ts.labels = std::move(train.labels);
  ts.source = source;
  return ts;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool record_cost(RunRecord& rec, double cost, std::size_t iteration) {
  rec.costs.push_back(cost);
  if (!std::isfinite(cost) || cost > kDivergenceCeiling) {
    rec.diverged = true;
    rec.diverged_at = iteration;
    return false;
  }
  return true;
}

void run_logistic(const ExperimentConfig& cfg, const TrainingSet& ts, RunRecord& rec) {
  std::vector<Vector> zs;
  zs.reserve(ts.xs.size());
  if (cfg.method == Method::WhiteGD || cfg.method == Method::WhiteNGD) {
    const Whitener w = whiten_fit(ts.xs);
    for (const Vector& x : ts.xs) zs.push_back(augment(whiten_apply(w, x)));
  } else {
    for (const Vector& x : ts.xs) zs.push_back(augment(x));
  }
  const std::vector<int>& labels = ts.labels;
  const std::size_t n = zs.size();

  Vector theta(zs.front().size(), 0.0);
  VectorMomentumState momentum = VectorMomentumState::make(theta.size(), cfg.momentum, cfg.gamma);

  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
  std::size_t iteration = 0;
  std::vector<Vector> bz;
  std::vector<int> by;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !rec.diverged; ++epoch) {
    const auto t0 = Clock::now();
    const auto batches =
        full_batch ? std::vector<std::vector<std::size_t>>{} : minibatches(n, cfg.batch_size, cfg.seed, epoch);
    const std::size_t steps = full_batch ? 1 : batches.size();
    for (std::size_t bi = 0; bi < steps; ++bi) {
      const std::vector<Vector>* batch_z = &zs;
      const std::vector<int>* batch_y = &labels;
      if (!full_batch) {
        bz.clear();
        by.clear();
        for (std::size_t i : batches[bi]) {
          bz.push_back(zs[i]);
          by.push_back(labels[i]);
        }
        batch_z = &bz;
        batch_y = &by;
      }
      const double cost = logistic_loss(theta, *batch_z, *batch_y);
      if (!record_cost(rec, cost, iteration)) break;
      if (cfg.method == Method::GD || cfg.method == Method::WhiteGD) {
        const Vector grad = logistic_gradient(theta, *batch_z, *batch_y);
        sgd_step(theta, grad, momentum);
      } else {
        theta = ngd_logistic_step(theta, *batch_z, *batch_y, cfg.gamma, cfg.eps_rel);
      }
      ++iteration;
    }
    rec.train_errors.push_back(logistic_error(theta, zs, labels));
    rec.epoch_seconds.push_back(seconds_since(t0));
  }
}

void run_mlp(const ExperimentConfig& cfg, const TrainingSet& ts, RunRecord& rec) {
  MlpSpec spec;
  spec.layer_sizes = cfg.layer_sizes;
  spec.hidden = ActivationKind::relu_smooth(cfg.omega);
  spec.head = Head::SoftmaxCrossEntropy;
  spec.validate();

  MlpParams params = init_params(spec, cfg.seed);
  MomentumState momentum = MomentumState::make(params, cfg.momentum, cfg.gamma);
  AdamState adam = AdamState::make(params, cfg.gamma);
  RngdState rngd;
  if (cfg.method == Method::RNGD) {
    rngd = RngdState::make(spec, cfg.lambda, cfg.refresh_period, cfg.eps_rel);
  }

  const std::size_t n = ts.xs.size();
  const std::size_t batch_size = cfg.batch_size == 0 ? n : cfg.batch_size;

  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs && !rec.diverged; ++epoch) {
    const auto t0 = Clock::now();
    for (const auto& batch : minibatches(n, batch_size, cfg.seed, epoch)) {
      std::vector<Vector> bx;
      std::vector<int> by;
      bx.reserve(batch.size());
      by.reserve(batch.size());
      for (std::size_t i : batch) {
        bx.push_back(ts.xs[i]);
        by.push_back(ts.labels[i]);
      }
      ForwardTrace trace = forward(spec, params, bx);
      const double cost = loss_cross_entropy(spec, trace, by);
      rec.clamp_events += trace.clamp_events;
      if (!record_cost(rec, cost, iteration)) break;
      const MlpParams grads = backward(spec, params, trace, by);
      switch (cfg.method) {
        case Method::SGD:
          sgd_step(params, grads, momentum);
          break;
        case Method::ADAM:
          adam_step(params, grads, adam);
          break;
        case Method::RNGD:
          rngd_step(params, grads, rngd, cfg.gamma);
          rngd_ema_update(rngd, spec, trace);
          if (rngd.iteration % rngd.period == 0) rngd_refresh(rngd);
          break;
        default:
          throw std::logic_error("run_mlp: unexpected method");
      }
      ++iteration;
    }
    rec.train_errors.push_back(classification_error(spec, params, ts.xs, ts.labels));
    rec.epoch_seconds.push_back(seconds_since(t0));
  }
}

}  // namespace

RunRecord run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunRecord rec;
  rec.seed = cfg.seed;
  rec.config_echo = config_to_json(cfg);
  const TrainingSet ts = resolve_training_set(cfg, cfg.seed);
  if (ts.xs.empty()) throw std::runtime_error("run: empty training set");
  try {
    if (cfg.model == "logistic") {
      run_logistic(cfg, ts, rec);
    } else {
      run_mlp(cfg, ts, rec);
    }
  } catch (const std::runtime_error&) {
    // numerical failure (overflow in a forward pass or a solve): the record
    // keeps everything up to the failing iteration
    rec.diverged = true;
    rec.diverged_at = rec.costs.size();
  }
  return rec;
}

const GridCell& GridResult::best_cell() const {
  if (!has_best) throw std::logic_error("grid: no valid cell");
  return cells[best];
}

namespace {

void parallel_for(std::size_t jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(jobs, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) body(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

}  // namespace

GridResult run_grid(const ExperimentConfig& cfg, std::size_t repeats) {
  cfg.validate();
  if (repeats == 0) throw std::invalid_argument("run_grid: repeats must be >= 1");

  GridResult result;
  for (double gamma : cfg.gamma_grid) {
    for (double momentum : cfg.momentum_grid) {
      GridCell cell;
      cell.gamma = gamma;
      cell.momentum = momentum;
      result.cells.push_back(cell);
    }
  }

  const std::size_t num_cells = result.cells.size();
  std::vector<std::vector<RunRecord>> records(num_cells, std::vector<RunRecord>(repeats));
  parallel_for(num_cells * repeats, [&](std::size_t job) {
    const std::size_t c = job / repeats;
    const std::size_t r = job % repeats;
    ExperimentConfig local = cfg;
    local.gamma = result.cells[c].gamma;
    local.momentum = result.cells[c].momentum;
    local.seed = cfg.seed + r;
    records[c][r] = run(local);
  });

  for (std::size_t c = 0; c < num_cells; ++c) {
    GridCell& cell = result.cells[c];
    const auto& runs = records[c];
    bool valid = true;
    for (const RunRecord& r : runs) {
      if (r.diverged || r.costs.empty()) valid = false;
    }
    if (valid) {
      for (std::size_t r = 1; r < runs.size(); ++r) {
        if (runs[r].costs.size() != runs[0].costs.size()) valid = false;
      }
    }
    cell.valid = valid;
    if (!valid) {
      for (const RunRecord& r : runs) {
        if (r.diverged) {
          cell.averaged = r;
          break;
        }
      }
      continue;
    }
    RunRecord avg;
    avg.seed = cfg.seed;
    avg.config_echo = runs[0].config_echo;
    const double inv = 1.0 / static_cast<double>(runs.size());
    avg.costs.assign(runs[0].costs.size(), 0.0);
    avg.train_errors.assign(runs[0].train_errors.size(), 0.0);
    avg.epoch_seconds.assign(runs[0].epoch_seconds.size(), 0.0);
    for (const RunRecord& r : runs) {
      for (std::size_t i = 0; i < avg.costs.size(); ++i) avg.costs[i] += r.costs[i] * inv;
      for (std::size_t i = 0; i < avg.train_errors.size(); ++i) {
        avg.train_errors[i] += r.train_errors[i] * inv;
      }
      for (std::size_t i = 0; i < avg.epoch_seconds.size(); ++i) {
        avg.epoch_seconds[i] += r.epoch_seconds[i] * inv;
      }
      avg.clamp_events += r.clamp_events;
    }
    cell.averaged = std::move(avg);
    cell.final_error = cell.averaged.final_error();
    cell.final_cost = cell.averaged.final_cost();
  }

  // lowest final error; ties by smaller gamma, then smaller momentum
  for (std::size_t c = 0; c < num_cells; ++c) {
    const GridCell& cell = result.cells[c];
    if (!cell.valid) continue;
    if (!result.has_best) {
      result.best = c;
      result.has_best = true;
      continue;
    }
    const GridCell& incumbent = result.cells[result.best];
    const auto key = [](const GridCell& g) {
      return std::make_tuple(g.final_error, g.gamma, g.momentum);
    };
    if (key(cell) < key(incumbent)) result.best = c;
  }
  return result;
}

TauSharp tau_sharp_ratio(const RunRecord& record, double tau, std::size_t total_iterations) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau_sharp_ratio: tau in (0,1]");
  if (total_iterations == 0) throw std::invalid_argument("tau_sharp_ratio: empty window");
  const std::size_t window =
      static_cast<std::size_t>(std::ceil(tau * static_cast<double>(total_iterations)));
  if (record.costs.size() < window) {
    throw std::invalid_argument("tau_sharp_ratio: trace shorter than the window");
  }
  const std::size_t start = record.costs.size() - window;
  double mean = 0.0;
  for (std::size_t i = start; i < record.costs.size(); ++i) mean += record.costs[i];
  mean /= static_cast<double>(window);
  double var = 0.0;
  for (std::size_t i = start; i < record.costs.size(); ++i) {
    const double d = record.costs[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(window);
  return TauSharp{mean, std::sqrt(var)};
}

void emit_curves(const RunRecord& record, const std::string& path, std::size_t smooth_window) {
  if (smooth_window == 0) throw std::invalid_argument("emit_curves: window must be >= 1");
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("emit_curves: cannot open " + path);
  std::fputs("iteration,cost,smoothed_cost\n", f);
  const std::size_t n = record.costs.size();
  std::vector<double> smoothed(n, 0.0);
  for (std::size_t start = 0; start < n; start += smooth_window) {
    const std::size_t end = std::min(n, start + smooth_window);
    double mean = 0.0;
    for (std::size_t i = start; i < end; ++i) mean += record.costs[i];
    mean /= static_cast<double>(end - start);
    for (std::size_t i = start; i < end; ++i) smoothed[i] = mean;
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::fprintf(f, "%zu,%.17g,%.17g\n", i, record.costs[i], smoothed[i]);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("emit_curves: write failure on " + path);
}

}  // namespace rfim
