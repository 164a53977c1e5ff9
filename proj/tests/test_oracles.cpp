#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rfim/metrics.hpp"
#include "rfim/oracles.hpp"
#include "rfim/rng.hpp"

using namespace rfim;

namespace {

Vector rand_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  Vector v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

}  // namespace

TEST_SUITE("oracles") {

TEST_CASE("sigm neuron at zero weights enumerates to a quarter outer product") {
  Rng rng(21);
  const Vector x = rand_vec(rng, 3);
  const Matrix g = fisher_enumerate(OutputModel::bernoulli_sigm(), Vector(4, 0.0), x);
  Matrix want(4, 4);
  add_scaled_outer(want, 0.25, augment(x));
  CHECK(max_abs_diff(g, want) <= 1e-16);
}

TEST_CASE("gaussian identity Monte Carlo recovers the outer product") {
  Rng rng(22);
  const Vector x = rand_vec(rng, 3);
  const Vector w = rand_vec(rng, 4);
  const McFisher mc = fisher_monte_carlo(OutputModel::gaussian_identity(1.0), w, x, 200000, 5);
  const Matrix want = outer(augment(x));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      const double se = std::max(mc.standard_error(i, j), 1e-12);
      CHECK(std::abs(mc.mean(i, j) - want(i, j)) <= 3.0 * se);
    }
  }
}

TEST_CASE("monte carlo is deterministic per seed") {
  Rng rng(23);
  const Vector x = rand_vec(rng, 2);
  const Vector w = rand_vec(rng, 3);
  const OutputModel model = OutputModel::gaussian(ActivationKind::relu_smooth());
  const McFisher a = fisher_monte_carlo(model, w, x, 10000, 77);
  const McFisher b = fisher_monte_carlo(model, w, x, 10000, 77);
  CHECK(max_abs_diff(a.mean, b.mean) == 0.0);
}

TEST_CASE("enumeration agrees with the finite-difference Hessian") {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector x = rand_vec(rng, 3);
    const Vector w = rand_vec(rng, 4, 0.5);
    const OutputModel model = OutputModel::bernoulli_tanh();
    const Matrix exact = fisher_enumerate(model, w, x);
    const Matrix fd = fisher_hessian_fd(model, w, x, 1e-4);
    CHECK(max_abs_diff(exact, fd) <= 1e-6);
  }
}

TEST_CASE("hessian oracle also covers the Gaussian families") {
  Rng rng(25);
  const Vector x = rand_vec(rng, 3);
  const Vector w = rand_vec(rng, 4, 0.5);
  const ActivationKind elu = ActivationKind::elu_unit();
  const Matrix fd = fisher_hessian_fd(OutputModel::gaussian(elu), w, x, 1e-4);
  const Matrix analytic = neuron_rfim(elu, w, x);
  CHECK(max_abs_diff(fd, analytic) <= 1e-6);
}

TEST_CASE("observed_fisher dispatches on the method") {
  Rng rng(26);
  const Vector x = rand_vec(rng, 2);
  const Vector w = rand_vec(rng, 3, 0.5);
  const OutputModel model = OutputModel::bernoulli_sigm();
  const Matrix a = observed_fisher(model, w, x, OracleMethod::enumerate());
  const Matrix b = observed_fisher(model, w, x, OracleMethod::hessian_fd(1e-4));
  CHECK(max_abs_diff(a, b) <= 1e-6);
  const Matrix c = observed_fisher(model, w, x, OracleMethod::monte_carlo(50000, 3));
  CHECK(max_abs_diff(a, c) <= 0.05);
}

TEST_CASE("error paths") {
  Rng rng(27);
  const Vector x = rand_vec(rng, 2);
  const Vector w = rand_vec(rng, 3);
  CHECK_THROWS_AS(fisher_enumerate(OutputModel::gaussian_identity(), w, x),
                  std::invalid_argument);
  CHECK_THROWS_AS(layer_fisher_enumerate(ActivationKind::tanh_unit(), Matrix(3, 5), x),
                  std::invalid_argument);  // 2^5 outcomes exceed the budget
  CHECK_THROWS_AS(layer_fisher_enumerate(ActivationKind::relu_smooth(), Matrix(3, 2), x),
                  std::invalid_argument);  // not a Bernoulli family
  CHECK_THROWS_AS(fisher_monte_carlo(OutputModel::bernoulli_sigm(), w, x, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("layer enumeration reduces to the neuron oracle at m=1") {
  Rng rng(28);
  const Vector x = rand_vec(rng, 3);
  Matrix w(4, 1);
  Vector col = rand_vec(rng, 4);
  for (int r = 0; r < 4; ++r) w(r, 0) = col[r];
  const Matrix layer = layer_fisher_enumerate(ActivationKind::sigm_unit(), w, x);
  const Matrix neuron = fisher_enumerate(OutputModel::bernoulli_sigm(), col, x);
  CHECK(max_abs_diff(layer, neuron) <= 1e-14);
}

}  // TEST_SUITE
