// Acceptance suite: every release gate below runs at its stated tolerance and
// prints exactly one PASS/FAIL line. The binary exits nonzero when any gate
// fails.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "rfim/experiment.hpp"
#include "rfim/metrics.hpp"
#include "rfim/optim.hpp"
#include "rfim/oracles.hpp"
#include "rfim/rng.hpp"
#include "rfim/whitening.hpp"

using namespace rfim;

namespace {

int g_failures = 0;

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::printf("ACCEPTANCE %02d %-28s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void guarded(int id, const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

Vector rand_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

double rel_frob(const Matrix& got, const Matrix& want) {
  return frobenius_norm(got - want) / std::max(frobenius_norm(want), 1e-300);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---- 1: exact Bernoulli oracle equivalence ---------------------------------

void criterion_1() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(Rng::mix(seed, 0xa1));
    const std::size_t d = 1 + rng.below(5);
    const Vector x = rand_vec(rng, d);
    const Vector w = rand_vec(rng, d + 1);
    worst = std::max(worst, rel_frob(neuron_rfim(ActivationKind::tanh_unit(), w, x),
                                     fisher_enumerate(OutputModel::bernoulli_tanh(), w, x)));
    worst = std::max(worst, rel_frob(neuron_rfim(ActivationKind::sigm_unit(), w, x),
                                     fisher_enumerate(OutputModel::bernoulli_sigm(), w, x)));
  }
  const double secs = elapsed(t0);
  report(1, "oracle_exact_bernoulli", worst <= 1e-10 && secs < 5.0,
         fmt("max_rel_err=%.3g tol=1e-10 runtime=%.2fs limit=5s", worst, secs));
}

// ---- 2: Gaussian families vs derivative identity and Monte Carlo ------------

void criterion_2() {
  const auto t0 = Clock::now();
  double worst_identity = 0.0;
  double worst_se = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(Rng::mix(seed, 0xa2));
    const std::size_t d = 1 + rng.below(5);
    const Vector x = rand_vec(rng, d);
    const Vector w = rand_vec(rng, d + 1, 0.7);
    const Vector xt = augment(x);
    for (const ActivationKind& kind :
         {ActivationKind::relu_smooth(), ActivationKind::elu_unit()}) {
      const Matrix analytic = neuron_rfim(kind, w, x);
      const double fp = deriv(kind, dot(w, xt));
      Matrix want(xt.size(), xt.size());
      add_scaled_outer(want, fp * fp / (kind.sigma * kind.sigma), xt);
      worst_identity = std::max(worst_identity, max_abs_diff(analytic, want));

      const McFisher mc = fisher_monte_carlo(OutputModel::gaussian(kind), w, x, 1000000,
                                             Rng::mix(seed, kind.family == Activation::Elu));
      for (std::size_t i = 0; i < analytic.rows(); ++i) {
        for (std::size_t j = 0; j < analytic.cols(); ++j) {
          const double se = std::max(mc.standard_error(i, j), 1e-300);
          worst_se = std::max(worst_se, std::abs(analytic(i, j) - mc.mean(i, j)) / se);
        }
      }
    }
  }
  const double secs = elapsed(t0);
  report(2, "oracle_gaussian_families",
         worst_identity <= 1e-12 && worst_se <= 3.0 && secs < 60.0,
         fmt("identity_err=%.3g tol=1e-12 mc_err=%.2fse tol=3se runtime=%.1fs limit=60s",
             worst_identity, worst_se, secs));
}

// ---- 3: layer structure ------------------------------------------------------

void criterion_3() {
  double worst_off = 0.0;
  double worst_null = 0.0;
  double worst_psd = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(Rng::mix(seed, 0xa3));
    const std::size_t d = 3, m = 3;
    const Vector x = rand_vec(rng, d);
    Matrix w(d + 1, m);
    for (double& v : w.data()) v = rng.normal();
    const Matrix full = layer_fisher_enumerate(ActivationKind::tanh_unit(), w, x);
    const std::size_t bd = d + 1;
    for (std::size_t bi = 0; bi < m; ++bi) {
      for (std::size_t bj = 0; bj < m; ++bj) {
        if (bi == bj) continue;
        for (std::size_t r = 0; r < bd; ++r) {
          for (std::size_t c = 0; c < bd; ++c) {
            worst_off = std::max(worst_off, std::abs(full(bi * bd + r, bj * bd + c)));
          }
        }
      }
    }

    Matrix ws(d + 1, 4);
    for (double& v : ws.data()) v = rng.normal();
    const FullMetric soft = softmax_rfim(ws, x);
    const Vector xt = augment(x);
    Vector stacked(4 * xt.size());
    for (std::size_t b = 0; b < 4; ++b) {
      for (std::size_t r = 0; r < xt.size(); ++r) stacked[b * xt.size() + r] = xt[r];
    }
    for (double v : matvec(soft.matrix, stacked)) worst_null = std::max(worst_null, std::abs(v));
    const EigenDecomposition eig = jacobi_eigen(soft.matrix);
    worst_psd = std::max(worst_psd, -eig.values.back());
  }
  const bool pass = worst_off <= 1e-10 && worst_null <= 1e-10 && worst_psd <= 1e-10;
  report(3, "layer_structure", pass,
         fmt("offdiag=%.3g null=%.3g min_eig_defect=%.3g tol=1e-10", worst_off, worst_null,
             std::max(0.0, worst_psd)));
}

// ---- 4: two-layer metric vs enumeration --------------------------------------

void criterion_4() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(Rng::mix(seed, 0xa4));
    const Vector x = rand_vec(rng, 3);
    Matrix first(4, 2), second(3, 2);
    for (double& v : first.data()) v = rng.normal();
    for (double& v : second.data()) v = rng.normal();
    const ActivationKind kind = ActivationKind::tanh_unit();
    worst = std::max(worst, rel_frob(two_layer_rfim(kind, first, second, x).matrix,
                                     two_layer_fisher_enumerate(kind, first, second, x)));
  }
  const double secs = elapsed(t0);
  report(4, "two_layer_metric", worst <= 1e-8 && secs < 10.0,
         fmt("max_rel_err=%.3g tol=1e-8 runtime=%.2fs limit=10s", worst, secs));
}

// ---- 5: smoothing limit -------------------------------------------------------

void criterion_5() {
  double worst_gap = 0.0;
  for (double omega : {1.0, 0.1, 0.01}) {
    const ActivationKind kind = ActivationKind::relu_smooth(omega);
    const double bound = omega * std::log(2.0);
    double sup = 0.0;
    for (int i = -10000; i <= 10000; ++i) {
      const double t = i * 1e-3;
      sup = std::max(sup, std::abs(eval(kind, t) - std::max(0.0, t)));
    }
    worst_gap = std::max(worst_gap, sup - bound);
  }
  const ActivationKind kind = ActivationKind::relu_smooth(0.1);
  const double low = nu(kind, -50.0 * 0.1);
  const double high = nu(kind, 50.0 * 0.1);
  const double endpoint_err = std::max(std::abs(low - 0.0), std::abs(high - 1.0));
  const bool pass = worst_gap <= 1e-12 && endpoint_err <= 1e-6;
  report(5, "relu_smoothing_limit", pass,
         fmt("sup_gap_over_bound=%.3g endpoint_err=%.3g tol=1e-6", std::max(0.0, worst_gap),
             endpoint_err));
}

// ---- 6: reparameterization invariance ----------------------------------------

void criterion_6() {
  double worst = 0.0;
  const double gamma = 0.7;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(Rng::mix(seed, 0xa6));
    const std::size_t d1 = 5;
    std::vector<Vector> zs;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
      zs.push_back(rand_vec(rng, d1));
      labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
    }
    const Vector theta = rand_vec(rng, d1, 0.5);
    Matrix j = Matrix::identity(d1);
    for (double& v : j.data()) v += 0.3 * rng.normal();
    const Matrix j_inv = invert(j);

    const Vector step =
        regularized_solve(logistic_batch_metric(theta, zs), logistic_gradient(theta, zs, labels), 0.0);
    Vector dtheta(d1);
    for (std::size_t i = 0; i < d1; ++i) dtheta[i] = -gamma * step[i];

    std::vector<Vector> us;
    const Matrix j_inv_t = transpose(j_inv);
    for (const Vector& z : zs) us.push_back(matvec(j_inv_t, z));
    const Vector lambda0 = matvec(j, theta);
    const Vector step_l = regularized_solve(logistic_batch_metric(lambda0, us),
                                            logistic_gradient(lambda0, us, labels), 0.0);
    Vector dlambda(d1);
    for (std::size_t i = 0; i < d1; ++i) dlambda[i] = -gamma * step_l[i];

    worst = std::max(worst, norm(dtheta - matvec(j_inv, dlambda)) / norm(dtheta));
  }
  report(6, "reparameterization", worst <= 1e-6,
         fmt("max_rel_err=%.3g tol=1e-6 seeds=20", worst));
}

// ---- 7: gradient correctness --------------------------------------------------

void criterion_7() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    MlpSpec spec;
    spec.layer_sizes = {4, 3, 2};
    spec.hidden = ActivationKind::tanh_unit();
    spec.head = Head::SoftmaxCrossEntropy;
    MlpParams params = init_params(spec, seed);
    Rng rng(Rng::mix(seed, 0xa7));
    std::vector<Vector> batch;
    std::vector<int> labels;
    for (int i = 0; i < 6; ++i) {
      batch.push_back(rand_vec(rng, 4));
      labels.push_back(static_cast<int>(rng.below(2)));
    }
    ForwardTrace trace = forward(spec, params, batch);
    const MlpParams grads = backward(spec, params, trace, labels);
    const double h = 1e-5;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
      for (std::size_t idx = 0; idx < params.weights[l].data().size(); ++idx) {
        const double saved = params.weights[l].data()[idx];
        params.weights[l].data()[idx] = saved + h;
        ForwardTrace tp = forward(spec, params, batch);
        const double fp = loss_cross_entropy(spec, tp, labels);
        params.weights[l].data()[idx] = saved - h;
        ForwardTrace tm = forward(spec, params, batch);
        const double fm = loss_cross_entropy(spec, tm, labels);
        params.weights[l].data()[idx] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        const double an = grads.weights[l].data()[idx];
        worst = std::max(worst, std::abs(an - fd) / std::max({1.0, std::abs(an), std::abs(fd)}));
      }
    }
  }
  report(7, "gradient_correctness", worst <= 1e-5,
         fmt("max_rel_err=%.3g tol=1e-5 net=4-3-2 seeds=20", worst));
}

// ---- 8: rank bound -------------------------------------------------------------

void criterion_8() {
  Rng rng(0xa8);
  std::vector<Vector> xs;
  for (int i = 0; i < 5; ++i) xs.push_back(rand_vec(rng, 10));
  const Vector w = rand_vec(rng, 11, 0.3);
  const Matrix g = batch_neuron_rfim(ActivationKind::tanh_unit(), w, xs);
  const std::size_t rank = numeric_rank(g, 1e-9);
  report(8, "rank_bound", rank == 5, fmt("numeric_rank=%zu want=5 threshold=1e-9", rank));
}

// ---- 9: logistic experiment ordering -------------------------------------------

void criterion_9() {
  const auto t0 = Clock::now();
  ExperimentConfig base;
  base.model = "logistic";
  base.epochs = 100;
  base.batch_size = 0;
  base.eps_rel = 1e-2;
  base.seed = 1;
  base.gamma_grid = {1e-2, 1e-1, 1.0, 10.0, 100.0};
  base.momentum_grid = {0.0, 0.8};
  base.data.train_fraction = 0.5;
  base.data.train_cap = 2000;
  if (mnist_available()) {
    base.data.source = "mnist";
    base.data.class_a = 3;
    base.data.class_b = 5;
  } else {
    // high-dimensional, nearly separable blobs stand in for the digit pair
    base.data.source = "synth";
    base.data.synth_n = 4000;
    base.data.synth_dim = 200;
    base.data.synth_separation = 4.5;
  }

  double cost[4] = {0, 0, 0, 0};
  const Method methods[4] = {Method::GD, Method::WhiteGD, Method::NGD, Method::WhiteNGD};
  for (int m = 0; m < 4; ++m) {
    ExperimentConfig cfg = base;
    cfg.method = methods[m];
    if (m >= 2) cfg.momentum_grid = {0.0};  // the natural step carries no momentum
    const GridResult grid = run_grid(cfg, 10);
    if (!grid.has_best) {
      report(9, "logistic_ordering", false,
             fmt("%s: every grid cell diverged", method_name(methods[m]).c_str()));
      return;
    }
    cost[m] = grid.best_cell().final_cost;
  }
  const double gd = cost[0], white_gd = cost[1], ngd = cost[2], white_ngd = cost[3];
  const bool order = white_ngd <= ngd && ngd < white_gd && white_gd < gd;
  const bool margin = white_ngd <= 0.5 * gd;
  const double secs = elapsed(t0);
  report(9, "logistic_ordering", order && margin && secs < 600.0,
         fmt("data=%s WhiteNGD=%.3g NGD=%.3g WhiteGD=%.3g GD=%.3g runtime=%.0fs limit=600s",
             base.data.source.c_str(), white_ngd, ngd, white_gd, gd, secs));
}

// ---- 10: MLP experiment ordering -----------------------------------------------

void criterion_10() {
  const auto t0 = Clock::now();
  ExperimentConfig base;
  base.model = "mlp";
  base.layer_sizes = {784, 32, 32, 10};
  base.epochs = 5;
  base.batch_size = 64;
  base.refresh_period = 100;
  base.lambda = 0.995;
  base.eps_rel = 1e-2;
  base.omega = 0.1;
  base.data.train_fraction = 0.5;
  base.data.train_cap = 10000;
  if (mnist_available()) {
    base.data.source = "mnist";
  } else {
    base.data.source = "synth";
    base.data.synth_n = 20000;
    base.data.synth_separation = 12.0;
  }

  // the reference protocol keeps the best learning curve per method over a
  // small rate grid; selection by mean final training cost over the seeds
  const Method methods[3] = {Method::SGD, Method::ADAM, Method::RNGD};
  const double rate_grid[3] = {1e-3, 1e-2, 1e-1};
  double sharp[3][3];       // method x seed at the selected rate
  double best_gamma[3];
  double mean_sharp[3];
  for (int m = 0; m < 3; ++m) {
    double best_cost = 1e300;
    int best_rate = -1;
    double candidate[3][3];  // rate x seed
    for (int r = 0; r < 3; ++r) {
      double total_cost = 0.0;
      bool ok = true;
      for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        ExperimentConfig cfg = base;
        cfg.method = methods[m];
        cfg.gamma = rate_grid[r];
        cfg.seed = seed;
        const RunRecord rec = run(cfg);
        if (rec.diverged) {
          ok = false;
          break;
        }
        total_cost += rec.final_cost();
        candidate[r][seed - 1] = tau_sharp_ratio(rec, 0.5, rec.costs.size()).mean;
      }
      if (ok && total_cost < best_cost) {
        best_cost = total_cost;
        best_rate = r;
      }
    }
    if (best_rate < 0) {
      report(10, "mlp_ordering", false,
             fmt("%s: every rate diverged", method_name(methods[m]).c_str()));
      return;
    }
    best_gamma[m] = rate_grid[best_rate];
    mean_sharp[m] = 0.0;
    for (int s = 0; s < 3; ++s) {
      sharp[m][s] = candidate[best_rate][s];
      mean_sharp[m] += sharp[m][s] / 3.0;
    }
  }

  int wins_rngd_adam = 0, wins_adam_sgd = 0;
  for (int s = 0; s < 3; ++s) {
    if (sharp[2][s] < sharp[1][s]) ++wins_rngd_adam;
    if (sharp[1][s] < sharp[0][s]) ++wins_adam_sgd;
  }
  const bool pass = wins_rngd_adam >= 2 && wins_adam_sgd >= 2;
  const double secs = elapsed(t0);
  report(10, "mlp_ordering", pass && secs < 900.0,
         fmt("data=%s tau0.5: RNGD=%.3g@%g ADAM=%.3g@%g SGD=%.3g@%g wins=%d/3,%d/3 "
             "runtime=%.0fs limit=900s",
             base.data.source.c_str(), mean_sharp[2], best_gamma[2], mean_sharp[1], best_gamma[1],
             mean_sharp[0], best_gamma[0], wins_rngd_adam, wins_adam_sgd, secs));
}

// ---- 11: RNGD degeneracy --------------------------------------------------------

void criterion_11() {
  ExperimentConfig sgd;
  sgd.method = Method::SGD;
  sgd.model = "mlp";
  sgd.layer_sizes = {12, 8, 4};
  sgd.data.source = "synth";
  sgd.data.synth_n = 400;
  sgd.data.synth_separation = 2.0;
  sgd.gamma = 0.05;
  sgd.momentum = 0.0;
  sgd.epochs = 4;
  sgd.batch_size = 32;
  sgd.seed = 3;

  ExperimentConfig rngd = sgd;
  rngd.method = Method::RNGD;
  rngd.lambda = 1.0;  // pins every metric at the identity

  const RunRecord a = run(sgd);
  const RunRecord b = run(rngd);
  bool identical = a.costs.size() == b.costs.size() && !a.diverged && !b.diverged;
  std::size_t first_diff = a.costs.size();
  if (identical) {
    for (std::size_t i = 0; i < a.costs.size(); ++i) {
      if (a.costs[i] != b.costs[i]) {
        identical = false;
        first_diff = i;
        break;
      }
    }
  }
  report(11, "rngd_identity_degeneracy", identical,
         identical ? fmt("bit-identical over %zu iterations", a.costs.size())
                   : fmt("first difference at iteration %zu", first_diff));
}

// ---- 12: whitening contract -------------------------------------------------------

void criterion_12() {
  ExperimentConfig cfg;
  cfg.model = "logistic";
  cfg.method = Method::WhiteNGD;
  cfg.data.train_fraction = 0.5;
  std::string detail_source;
  std::vector<Vector> xs;
  std::size_t expected_drop = 0;
  if (mnist_available()) {
    cfg.data.source = "mnist";
    cfg.data.train_cap = 2000;
    xs = resolve_training_set(cfg, 1).xs;
    detail_source = "mnist";
    // border pixels are constant; the exact count is data dependent
  } else {
    cfg.data.source = "synth";
    cfg.data.synth_n = 2000;
    cfg.data.synth_dim = 40;
    cfg.data.synth_separation = 3.0;
    xs = resolve_training_set(cfg, 1).xs;
    for (Vector& x : xs) {  // emulate dead border pixels
      x.push_back(0.0);
      x.push_back(1.0);
      x.push_back(0.5);
      x.push_back(0.5);
    }
    expected_drop = 4;
    detail_source = "synth+4const";
  }

  const Whitener w = whiten_fit(xs);
  const std::vector<Vector> white = whiten_apply_all(w, xs);
  const std::size_t r = w.retained;
  Vector mean(r, 0.0);
  for (const Vector& z : white) {
    for (std::size_t j = 0; j < r; ++j) mean[j] += z[j];
  }
  double worst_mean = 0.0;
  for (double& m : mean) {
    m /= static_cast<double>(white.size());
    worst_mean = std::max(worst_mean, std::abs(m));
  }
  Matrix cov(r, r);
  Vector centered(r);
  for (const Vector& z : white) {
    for (std::size_t j = 0; j < r; ++j) centered[j] = z[j] - mean[j];
    add_scaled_outer(cov, 1.0, centered);
  }
  double worst_cov = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      worst_cov = std::max(worst_cov, std::abs(cov(i, j) / static_cast<double>(white.size()) -
                                               (i == j ? 1.0 : 0.0)));
    }
  }
  const std::size_t dropped = w.input_dim - w.retained;
  const bool drop_ok = expected_drop == 0 ? dropped > 0 : dropped == expected_drop;
  const bool pass = worst_mean <= 1e-8 && worst_cov <= 1e-6 && drop_ok;
  report(12, "whitening_contract", pass,
         fmt("data=%s max|mean|=%.3g tol=1e-8 max|cov-I|=%.3g tol=1e-6 dropped=%zu",
             detail_source.c_str(), worst_mean, worst_cov, dropped));
}

// ---- 13: determinism ---------------------------------------------------------------

void criterion_13() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rfim_acceptance";
  fs::create_directories(dir);

  ExperimentConfig cfg;
  cfg.method = Method::RNGD;
  cfg.model = "mlp";
  cfg.layer_sizes = {10, 6, 4};
  cfg.data.source = "synth";
  cfg.data.synth_n = 600;
  cfg.data.synth_separation = 3.0;
  cfg.gamma = 1e-2;
  cfg.epochs = 3;
  cfg.batch_size = 25;
  cfg.refresh_period = 5;
  cfg.lambda = 0.9;
  cfg.seed = 11;

  const auto pa = (dir / "first.csv").string();
  const auto pb = (dir / "second.csv").string();
  emit_curves(run(cfg), pa);
  emit_curves(run(cfg), pb);

  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string a = slurp(pa);
  const bool pass = !a.empty() && a == slurp(pb);
  report(13, "determinism", pass, fmt("csv_bytes=%zu identical=%s", a.size(), pass ? "yes" : "no"));
}

}  // namespace

int main() {
  std::printf("dataset_directory=%s mnist_available=%s\n", dataset_directory().c_str(),
              mnist_available() ? "yes" : "no");
  guarded(1, "oracle_exact_bernoulli", criterion_1);
  guarded(2, "oracle_gaussian_families", criterion_2);
  guarded(3, "layer_structure", criterion_3);
  guarded(4, "two_layer_metric", criterion_4);
  guarded(5, "relu_smoothing_limit", criterion_5);
  guarded(6, "reparameterization", criterion_6);
  guarded(7, "gradient_correctness", criterion_7);
  guarded(8, "rank_bound", criterion_8);
  guarded(9, "logistic_ordering", criterion_9);
  guarded(10, "mlp_ordering", criterion_10);
  guarded(11, "rngd_identity_degeneracy", criterion_11);
  guarded(12, "whitening_contract", criterion_12);
  guarded(13, "determinism", criterion_13);
  if (g_failures == 0) {
    std::printf("all %d acceptance criteria passed\n", 13);
  } else {
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  }
  return g_failures == 0 ? 0 : 1;
}
