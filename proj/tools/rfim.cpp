#include <cstdio>
#include <filesystem>
#include <numeric>
#include <string>

#include "CLI11.hpp"
#include "rfim/experiment.hpp"
#include "rfim/whitening.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = ".";
  std::string method;
  long seed = -1;
  long epochs = -1;
  long batch_size = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--out-dir", args.out_dir, "Directory for CSV output");
  cmd->add_option("--method", args.method, "Override: GD|WhiteGD|NGD|WhiteNGD|SGD|ADAM|RNGD");
  cmd->add_option("--seed", args.seed, "Override: run seed");
  cmd->add_option("--epochs", args.epochs, "Override: epoch count");
  cmd->add_option("--batch-size", args.batch_size, "Override: minibatch size (0 = full batch)");
}

rfim::ExperimentConfig build_config(const CommonArgs& args) {
  rfim::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = rfim::load_config(args.config_path);
  if (!args.method.empty()) {
    cfg.method = rfim::method_from_name(args.method);
    cfg.model = rfim::is_logistic_method(cfg.method) ? "logistic" : "mlp";
  }
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  if (args.epochs >= 0) cfg.epochs = static_cast<std::size_t>(args.epochs);
  if (args.batch_size >= 0) cfg.batch_size = static_cast<std::size_t>(args.batch_size);
  return cfg;
}

std::string curve_path(const CommonArgs& args, const rfim::ExperimentConfig& cfg,
                       const std::string& stem) {
  std::filesystem::create_directories(args.out_dir);
  return args.out_dir + "/" + stem + "_" + rfim::method_name(cfg.method) + "_seed" +
         std::to_string(cfg.seed) + ".csv";
}

int cmd_train(const CommonArgs& args) {
  const rfim::ExperimentConfig cfg = build_config(args);
  const rfim::RunRecord rec = rfim::run(cfg);
  const std::string path = curve_path(args, cfg, "train");
  rfim::emit_curves(rec, path);
  const double wall = std::accumulate(rec.epoch_seconds.begin(), rec.epoch_seconds.end(), 0.0);
  std::printf("method=%s seed=%llu iterations=%zu final_cost=%.6g final_error=%.4f wall=%.2fs\n",
              rfim::method_name(cfg.method).c_str(), static_cast<unsigned long long>(cfg.seed),
              rec.costs.size(), rec.final_cost(), rec.final_error(), wall);
  if (rec.diverged) {
    std::printf("DIVERGED at iteration %zu\n", rec.diverged_at);
  }
  if (rec.costs.size() >= 2) {
    const rfim::TauSharp sharp = rfim::tau_sharp_ratio(rec, 0.5, rec.costs.size());
    std::printf("tau_sharp(0.5)=%.6g +- %.6g\n", sharp.mean, sharp.stddev);
  }
  std::printf("curve written to %s\n", path.c_str());
  return rec.diverged ? 1 : 0;
}

int cmd_grid(const CommonArgs& args, std::size_t repeats) {
  const rfim::ExperimentConfig cfg = build_config(args);
  const rfim::GridResult grid = rfim::run_grid(cfg, repeats);

  std::filesystem::create_directories(args.out_dir);
  const std::string table_path =
      args.out_dir + "/grid_" + rfim::method_name(cfg.method) + ".csv";
  std::FILE* f = std::fopen(table_path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "cannot open %s\n", table_path.c_str());
    return 1;
  }
  std::fputs("gamma,momentum,valid,final_cost,final_error\n", f);
  for (const rfim::GridCell& cell : grid.cells) {
    std::fprintf(f, "%.17g,%.17g,%d,%.17g,%.17g\n", cell.gamma, cell.momentum,
                 cell.valid ? 1 : 0, cell.final_cost, cell.final_error);
  }
  std::fclose(f);

  std::printf("%-10s %-10s %-7s %-14s %-10s\n", "gamma", "momentum", "valid", "final_cost",
              "final_err");
  for (const rfim::GridCell& cell : grid.cells) {
    std::printf("%-10.4g %-10.4g %-7s %-14.6g %-10.4f\n", cell.gamma, cell.momentum,
                cell.valid ? "yes" : "no", cell.final_cost, cell.final_error);
  }
  if (!grid.has_best) {
    std::printf("no valid grid cell (all diverged)\n");
    return 1;
  }
  const rfim::GridCell& best = grid.best_cell();
  std::printf("best: gamma=%.4g momentum=%.4g final_cost=%.6g final_error=%.4f\n", best.gamma,
              best.momentum, best.final_cost, best.final_error);
  rfim::ExperimentConfig echo = cfg;
  echo.gamma = best.gamma;
  echo.momentum = best.momentum;
  rfim::emit_curves(best.averaged, curve_path(args, echo, "grid_best"));
  return 0;
}

int cmd_verify(const std::string& suite) {
  int failures = 0;
  for (const rfim::PropertyResult& p : rfim::verify(suite)) {
    std::printf("PROPERTY %s %s err=%.6g tol=%.6g\n", p.name.c_str(), p.pass ? "PASS" : "FAIL",
                p.err, p.tol);
    if (!p.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}

int cmd_whiten(const CommonArgs& args) {
  rfim::ExperimentConfig cfg = build_config(args);
  const rfim::TrainingSet ts = rfim::resolve_training_set(cfg, cfg.seed);
  const rfim::Whitener w = rfim::whiten_fit(ts.xs);
  const std::vector<rfim::Vector> white = rfim::whiten_apply_all(w, ts.xs);

  rfim::Vector mean(w.retained, 0.0);
  for (const rfim::Vector& z : white) {
    for (std::size_t j = 0; j < w.retained; ++j) mean[j] += z[j];
  }
  double worst_mean = 0.0;
  for (double& m : mean) {
    m /= static_cast<double>(white.size());
    worst_mean = std::max(worst_mean, std::abs(m));
  }
  double worst_cov = 0.0;
  rfim::Matrix cov(w.retained, w.retained);
  rfim::Vector centered(w.retained);
  for (const rfim::Vector& z : white) {
    for (std::size_t j = 0; j < w.retained; ++j) centered[j] = z[j] - mean[j];
    rfim::add_scaled_outer(cov, 1.0, centered);
  }
  for (std::size_t i = 0; i < w.retained; ++i) {
    for (std::size_t j = 0; j < w.retained; ++j) {
      const double want = i == j ? 1.0 : 0.0;
      worst_cov = std::max(worst_cov, std::abs(cov(i, j) / static_cast<double>(white.size()) - want));
    }
  }
  std::printf("source=%s samples=%zu input_dim=%zu retained=%zu dropped=%zu\n", ts.source.c_str(),
              ts.xs.size(), w.input_dim, w.retained, w.input_dim - w.retained);
  std::printf("max|mean|=%.3g max|cov-I|=%.3g threshold=%.3g\n", worst_mean, worst_cov,
              w.threshold);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relative Fisher information metrics and RNGD experiment harness"};
  app.require_subcommand(1);

  CommonArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Run a single configured training run");
  add_common(train, train_args);

  CommonArgs grid_args;
  std::size_t repeats = 10;
  CLI::App* grid = app.add_subcommand("grid", "Grid search over gamma/momentum with repeats");
  add_common(grid, grid_args);
  grid->add_option("--repeats", repeats, "Seeded runs averaged per grid cell");

  std::string suite = "all";
  CLI::App* verify = app.add_subcommand("verify", "Run the oracle/property suites");
  verify->add_option("--suite", suite, "all|oracles|invariance|rank|whitening");

  CommonArgs whiten_args;
  CLI::App* whiten = app.add_subcommand("whiten", "Fit the whitener and report retained dims");
  add_common(whiten, whiten_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(train_args);
    if (grid->parsed()) return cmd_grid(grid_args, repeats);
    if (verify->parsed()) return cmd_verify(suite);
    if (whiten->parsed()) return cmd_whiten(whiten_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
