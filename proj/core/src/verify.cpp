#include <cmath>
#include <stdexcept>

#include "rfim/experiment.hpp"
#include "rfim/metrics.hpp"
#include "rfim/optim.hpp"
#include "rfim/oracles.hpp"
#include "rfim/rng.hpp"
#include "rfim/whitening.hpp"

// The verify() suites re-run the library's oracle cross-checks with fixed
// seeds and report machine-readable pass/fail lines. The acceptance tests
// cover the same ground at their own scales; this is the in-binary smoke set
// reachable from the CLI.

namespace rfim {

namespace {

Vector random_vector(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = scale * rng.normal();
  return m;
}

double rel_frobenius(const Matrix& got, const Matrix& want) {
  const double denom = std::max(frobenius_norm(want), 1e-300);
  return frobenius_norm(got - want) / denom;
}

PropertyResult neuron_enumeration(const char* name, const ActivationKind& kind,
                                  const OutputModel& model) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Rng rng(Rng::mix(seed, 0x17));
    const std::size_t d = 1 + static_cast<std::size_t>(rng.below(5));
    const Vector x = random_vector(rng, d);
    const Vector w = random_vector(rng, d + 1);
    const Matrix analytic = neuron_rfim(kind, w, x);
    const Matrix oracle = fisher_enumerate(model, w, x);
    worst = std::max(worst, rel_frobenius(analytic, oracle));
  }
  return {name, worst <= 1e-10, worst, 1e-10};
}

PropertyResult gaussian_derivative_identity(const char* name, const ActivationKind& kind) {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    Rng rng(Rng::mix(seed, 0x19));
    const std::size_t d = 1 + static_cast<std::size_t>(rng.below(5));
    const Vector x = random_vector(rng, d);
    const Vector w = random_vector(rng, d + 1);
    const Vector xt = augment(x);
    const double fp = deriv(kind, dot(w, xt));
    Matrix want(xt.size(), xt.size());
    add_scaled_outer(want, fp * fp / (kind.sigma * kind.sigma), xt);
    worst = std::max(worst, max_abs_diff(neuron_rfim(kind, w, x), want));
  }
  return {name, worst <= 1e-12, worst, 1e-12};
}

PropertyResult gaussian_monte_carlo(const char* name, const ActivationKind& kind) {
  double worst = 0.0;  // in standard-error units
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    Rng rng(Rng::mix(seed, 0x23));
    const std::size_t d = 3;
    const Vector x = random_vector(rng, d);
    const Vector w = random_vector(rng, d + 1);
    const Matrix analytic = neuron_rfim(kind, w, x);
    const McFisher mc =
        fisher_monte_carlo(OutputModel::gaussian(kind), w, x, 100000, Rng::mix(seed, 0x29));
    for (std::size_t i = 0; i < analytic.rows(); ++i) {
      for (std::size_t j = 0; j < analytic.cols(); ++j) {
        const double se = std::max(mc.standard_error(i, j), 1e-300);
        worst = std::max(worst, std::abs(analytic(i, j) - mc.mean(i, j)) / se);
      }
    }
  }
  return {name, worst <= 3.0, worst, 3.0};
}

PropertyResult layer_block_structure() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(Rng::mix(seed, 0x31));
    const std::size_t d = 3, m = 3;
    const Vector x = random_vector(rng, d);
    const Matrix w = random_matrix(rng, d + 1, m);
    const ActivationKind kind = ActivationKind::tanh_unit();
    const Matrix full = layer_fisher_enumerate(kind, w, x);
    const BlockDiagMetric metric = nonlinear_layer_rfim(kind, w, x);
    const std::size_t bd = d + 1;
    for (std::size_t bi = 0; bi < m; ++bi) {
      for (std::size_t bj = 0; bj < m; ++bj) {
        for (std::size_t r = 0; r < bd; ++r) {
          for (std::size_t c = 0; c < bd; ++c) {
            const double got = full(bi * bd + r, bj * bd + c);
            const double want = bi == bj ? metric.blocks[bi](r, c) : 0.0;
            worst = std::max(worst, std::abs(got - want));
          }
        }
      }
    }
  }
  return {"layer_block_diagonal", worst <= 1e-10, worst, 1e-10};
}

PropertyResult softmax_structure() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(Rng::mix(seed, 0x37));
    const std::size_t d = 3, m = 4;
    const Vector x = random_vector(rng, d);
    const Matrix w = random_matrix(rng, d + 1, m);
    const FullMetric metric = softmax_rfim(w, x);
    const Vector xt = augment(x);
    Vector stacked(m * xt.size());
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t r = 0; r < xt.size(); ++r) stacked[i * xt.size() + r] = xt[r];
    }
    const Vector image = matvec(metric.matrix, stacked);
    for (double v : image) worst = std::max(worst, std::abs(v));
    const EigenDecomposition eig = jacobi_eigen(metric.matrix);
    worst = std::max(worst, std::max(0.0, -eig.values.back()));
  }
  return {"softmax_null_and_psd", worst <= 1e-10, worst, 1e-10};
}

PropertyResult two_layer_enumeration() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(Rng::mix(seed, 0x41));
    const std::size_t dx = 3, dh = 2, dy = 2;
    const Vector x = random_vector(rng, dx);
    const Matrix first = random_matrix(rng, dx + 1, dh);
    const Matrix second = random_matrix(rng, dh + 1, dy);
    const ActivationKind kind = ActivationKind::tanh_unit();
    const FullMetric metric = two_layer_rfim(kind, first, second, x);
    const Matrix oracle = two_layer_fisher_enumerate(kind, first, second, x);
    worst = std::max(worst, rel_frobenius(metric.matrix, oracle));
  }
  return {"two_layer_enumeration", worst <= 1e-8, worst, 1e-8};
}

PropertyResult hessian_fd_agreement() {
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(Rng::mix(seed, 0x43));
    const std::size_t d = 3;
    const Vector x = random_vector(rng, d);
    const Vector w = random_vector(rng, d + 1, 0.5);
    const OutputModel model = OutputModel::bernoulli_tanh();
    const Matrix exact = fisher_enumerate(model, w, x);
    const Matrix fd = fisher_hessian_fd(model, w, x, 1e-4);
    worst = std::max(worst, max_abs_diff(exact, fd));
  }
  return {"hessian_fd_agreement", worst <= 1e-6, worst, 1e-6};
}

PropertyResult reparameterization_invariance() {
  double worst = 0.0;
  const double gamma = 0.5;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(Rng::mix(seed, 0x47));
    const std::size_t d1 = 5;
    const std::size_t n = 40;
    std::vector<Vector> zs;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      zs.push_back(random_vector(rng, d1));
      labels.push_back(rng.uniform() < 0.5 ? 0 : 1);
    }
    const Vector theta = random_vector(rng, d1, 0.5);

    Matrix j = Matrix::identity(d1);
    for (double& v : j.data()) v += 0.3 * rng.normal();
    const Matrix j_inv = invert(j);
    const Matrix j_inv_t = transpose(j_inv);

    // step in the original coordinates
    const Matrix g = logistic_batch_metric(theta, zs);
    const Vector grad = logistic_gradient(theta, zs, labels);
    const Vector step = regularized_solve(g, grad, 0.0);
    Vector dtheta(d1);
    for (std::size_t i = 0; i < d1; ++i) dtheta[i] = -gamma * step[i];

    // same model expressed in lambda = J theta
    std::vector<Vector> us;
    us.reserve(n);
    for (const Vector& z : zs) us.push_back(matvec(j_inv_t, z));
    const Vector lambda0 = matvec(j, theta);
    const Matrix g_l = logistic_batch_metric(lambda0, us);
    const Vector grad_l = logistic_gradient(lambda0, us, labels);
    const Vector step_l = regularized_solve(g_l, grad_l, 0.0);
    Vector dlambda(d1);
    for (std::size_t i = 0; i < d1; ++i) dlambda[i] = -gamma * step_l[i];

    const Vector mapped = matvec(j_inv, dlambda);
    worst = std::max(worst, norm(dtheta - mapped) / std::max(norm(dtheta), 1e-300));
  }
  return {"reparameterization_invariance", worst <= 1e-6, worst, 1e-6};
}

PropertyResult nu_deriv_consistency() {
  double worst = 0.0;
  Rng rng(0x53);
  const ActivationKind kinds[] = {ActivationKind::tanh_unit(), ActivationKind::sigm_unit(),
                                  ActivationKind::relu_smooth(), ActivationKind::elu_unit()};
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < 200; ++i) {
      const double s = rng.uniform(-6.0, 6.0);
      const ActivationKind& kind = kinds[k];
      double want;
      if (kind.family == Activation::Tanh || kind.family == Activation::Sigm) {
        want = deriv(kind, s);
      } else {
        const double fp = deriv(kind, s);
        want = fp * fp / (kind.sigma * kind.sigma);
      }
      worst = std::max(worst, std::abs(nu(kind, s) - want));
    }
  }
  return {"nu_deriv_consistency", worst <= 1e-12, worst, 1e-12};
}

PropertyResult relu_smoothing_bound() {
  double worst = -1.0;
  for (double omega : {1.0, 0.1, 0.01}) {
    const ActivationKind kind = ActivationKind::relu_smooth(omega);
    const double bound = omega * std::log(2.0);
    double sup = 0.0;
    for (int i = -10000; i <= 10000; ++i) {
      const double t = i * 1e-3;
      sup = std::max(sup, std::abs(eval(kind, t) - std::max(0.0, t)));
    }
    worst = std::max(worst, sup - bound);
  }
  return {"relu_smoothing_bound", worst <= 1e-12, worst, 1e-12};
}

PropertyResult rngd_identity_matches_sgd() {
  ExperimentConfig sgd;
  sgd.method = Method::SGD;
  sgd.model = "mlp";
  sgd.layer_sizes = {6, 4, 3};
  sgd.data.source = "synth";
  sgd.data.synth_n = 120;
  sgd.data.synth_separation = 2.0;
  sgd.gamma = 0.05;
  sgd.momentum = 0.0;
  sgd.epochs = 3;
  sgd.batch_size = 16;
  sgd.seed = 7;

  ExperimentConfig rngd = sgd;
  rngd.method = Method::RNGD;
  rngd.lambda = 1.0;  // metrics pinned at identity

  const RunRecord a = run(sgd);
  const RunRecord b = run(rngd);
  double worst = a.costs.size() == b.costs.size() ? 0.0 : 1.0;
  for (std::size_t i = 0; worst == 0.0 && i < a.costs.size(); ++i) {
    if (a.costs[i] != b.costs[i]) worst = std::abs(a.costs[i] - b.costs[i]);
  }
  return {"rngd_identity_matches_sgd", worst == 0.0, worst, 0.0};
}

PropertyResult batch_rank_five() {
  Rng rng(0x59);
  const std::size_t n = 5, d = 10;
  std::vector<Vector> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(random_vector(rng, d));
  const Vector w = random_vector(rng, d + 1, 0.3);
  const Matrix g = batch_neuron_rfim(ActivationKind::tanh_unit(), w, xs);
  const std::size_t rank = numeric_rank(g, 1e-9);
  const double err = std::abs(static_cast<double>(rank) - 5.0);
  return {"batch_rank_five", rank == 5, err, 0.0};
}

PropertyResult rank_upper_bound() {
  double worst = 0.0;
  const std::pair<std::size_t, std::size_t> combos[] = {{3, 6}, {8, 4}, {12, 12}};
  for (auto [n, d] : combos) {
    Rng rng(Rng::mix(n, d));
    std::vector<Vector> xs;
    for (std::size_t i = 0; i < n; ++i) xs.push_back(random_vector(rng, d));
    const Vector w = random_vector(rng, d + 1, 0.3);
    const Matrix g = batch_neuron_rfim(ActivationKind::sigm_unit(), w, xs);
    const std::size_t rank = numeric_rank(g, 1e-9);
    const std::size_t bound = std::min(n, d + 1);
    if (rank > bound) worst = std::max(worst, static_cast<double>(rank - bound));
  }
  return {"rank_upper_bound", worst == 0.0, worst, 0.0};
}

void whitening_suite(std::vector<PropertyResult>& out) {
  const Dataset ds = synth_blobs(400, 20, 3.0, 11);
  // three constant columns emulate dead border pixels
  std::vector<Vector> xs;
  xs.reserve(ds.size());
  for (const Vector& x : ds.features) {
    Vector padded = x;
    padded.push_back(0.0);
    padded.push_back(1.0);
    padded.push_back(0.25);
    xs.push_back(std::move(padded));
  }
  const Whitener w = whiten_fit(xs);
  const std::vector<Vector> white = whiten_apply_all(w, xs);

  const std::size_t r = w.retained;
  Vector mean(r, 0.0);
  for (const Vector& z : white) {
    for (std::size_t j = 0; j < r; ++j) mean[j] += z[j];
  }
  for (double& m : mean) m /= static_cast<double>(white.size());
  double worst_mean = 0.0;
  for (double m : mean) worst_mean = std::max(worst_mean, std::abs(m));
  out.push_back({"whitened_mean", worst_mean <= 1e-8, worst_mean, 1e-8});

  Matrix cov(r, r);
  Vector centered(r);
  for (const Vector& z : white) {
    for (std::size_t j = 0; j < r; ++j) centered[j] = z[j] - mean[j];
    add_scaled_outer(cov, 1.0, centered);
  }
  for (double& v : cov.data()) v /= static_cast<double>(white.size());
  double worst_cov = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      worst_cov = std::max(worst_cov, std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)));
    }
  }
  out.push_back({"whitened_covariance", worst_cov <= 1e-6, worst_cov, 1e-6});

  const double drop_err = std::abs(static_cast<double>(w.retained) - 20.0);
  out.push_back({"constant_dims_dropped", w.retained == 20, drop_err, 0.0});

  const std::vector<Vector> one_d = {{0.0}, {6.0}};
  const Whitener w1 = whiten_fit(one_d);
  const double scale_err = std::abs(std::abs(w1.transform(0, 0)) - 1.0 / 3.0);
  out.push_back({"variance_nine_scale", scale_err <= 1e-12, scale_err, 1e-12});
}

}  // namespace

std::vector<PropertyResult> verify(const std::string& suite) {
  const bool all = suite == "all";
  std::vector<PropertyResult> out;
  if (all || suite == "oracles") {
    out.push_back(neuron_enumeration("neuron_tanh_enumeration", ActivationKind::tanh_unit(),
                                     OutputModel::bernoulli_tanh()));
    out.push_back(neuron_enumeration("neuron_sigm_enumeration", ActivationKind::sigm_unit(),
                                     OutputModel::bernoulli_sigm()));
    out.push_back(gaussian_derivative_identity("relu_derivative_identity",
                                               ActivationKind::relu_smooth()));
    out.push_back(gaussian_derivative_identity("elu_derivative_identity",
                                               ActivationKind::elu_unit()));
    out.push_back(gaussian_monte_carlo("relu_monte_carlo", ActivationKind::relu_smooth()));
    out.push_back(gaussian_monte_carlo("elu_monte_carlo", ActivationKind::elu_unit()));
    out.push_back(layer_block_structure());
    out.push_back(softmax_structure());
    out.push_back(two_layer_enumeration());
    out.push_back(hessian_fd_agreement());
  }
  if (all || suite == "invariance") {
    out.push_back(reparameterization_invariance());
    out.push_back(nu_deriv_consistency());
    out.push_back(relu_smoothing_bound());
    out.push_back(rngd_identity_matches_sgd());
  }
  if (all || suite == "rank") {
    out.push_back(batch_rank_five());
    out.push_back(rank_upper_bound());
  }
  if (all || suite == "whitening") {
    whitening_suite(out);
  }
  if (out.empty()) throw std::invalid_argument("verify: unknown suite \"" + suite + "\"");
  return out;
}

}  // namespace rfim
