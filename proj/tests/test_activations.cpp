#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rfim/activations.hpp"
#include "rfim/rng.hpp"

using namespace rfim;

TEST_SUITE("activations") {

TEST_CASE("eval basics") {
  CHECK(eval(ActivationKind::tanh_unit(), 0.0) == 0.0);
  CHECK(eval(ActivationKind::sigm_unit(), 0.0) == 0.5);

  const ActivationKind relu = ActivationKind::relu_smooth(0.01);
  CHECK(eval(relu, 3.0) == doctest::Approx(3.0).epsilon(1e-9));
  const double neg = eval(relu, -3.0);
  CHECK(neg > 0.0);
  CHECK(neg <= 0.01 * std::log(2.0));

  // overflow-safe for huge magnitudes
  CHECK(std::isfinite(eval(relu, 1e8)));
  CHECK(std::isfinite(eval(relu, -1e8)));
  CHECK(eval(relu, 1e8) == doctest::Approx(1e8));

  const ActivationKind elu = ActivationKind::elu_unit();
  CHECK(eval(elu, 2.0) == 2.0);
  CHECK(eval(elu, -1.0) == doctest::Approx(std::exp(-1.0) - 1.0));
}

TEST_CASE("smoothed relu stays within omega*ln2 of exact relu") {
  for (double omega : {1.0, 0.1, 0.01}) {
    const ActivationKind kind = ActivationKind::relu_smooth(omega);
    const double bound = omega * std::log(2.0);
    double sup = 0.0;
    for (int i = -10000; i <= 10000; ++i) {
      const double t = i * 1e-3;
      sup = std::max(sup, std::abs(eval(kind, t) - std::max(0.0, t)));
    }
    CHECK(sup <= bound + 1e-15);
    CHECK(sup > 0.0);
  }
}

TEST_CASE("nu values") {
  CHECK(nu(ActivationKind::tanh_unit(), 0.0) == 1.0);
  CHECK(nu(ActivationKind::sigm_unit(), 0.0) == 0.25);

  const ActivationKind relu = ActivationKind::relu_smooth(0.1);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const double s = rng.uniform(-4.0, 4.0);
    const double sg = sigm(s / 0.1);
    CHECK(nu(relu, s) == doctest::Approx(sg * sg).epsilon(1e-12));
  }
  // close to 1 on the active side, close to 0 otherwise
  CHECK(nu(relu, 1.0) > 0.99);
  CHECK(nu(relu, -1.0) < 1e-6);

  const ActivationKind elu = ActivationKind::elu_unit();
  CHECK(nu(elu, 0.0) == 1.0);
  CHECK(nu(elu, -1e-12) == doctest::Approx(1.0).epsilon(1e-9));  // continuous at 0 for alpha=1
  CHECK(nu(elu, -1.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("deriv matches a central finite difference") {
  const ActivationKind kinds[] = {ActivationKind::tanh_unit(), ActivationKind::sigm_unit(),
                                  ActivationKind::relu_smooth(0.5), ActivationKind::elu_unit(0.7)};
  Rng rng(5);
  const double h = 1e-6;
  for (const ActivationKind& kind : kinds) {
    for (int i = 0; i < 40; ++i) {
      double t = rng.uniform(-3.0, 3.0);
      if (kind.family == Activation::Elu && std::abs(t) < 1e-3) t += 0.01;  // away from the kink
      const double fd = (eval(kind, t + h) - eval(kind, t - h)) / (2.0 * h);
      CHECK(std::abs(deriv(kind, t) - fd) <= 1e-6);
    }
  }
  CHECK(deriv(ActivationKind::tanh_unit(), 0.0) == 1.0);
  CHECK(deriv(ActivationKind::elu_unit(), -1.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(deriv(ActivationKind::elu_unit(), 0.0) == 1.0);  // right limit at the kink
}

TEST_CASE("nu is consistent with deriv") {
  Rng rng(9);
  for (int i = 0; i < 100; ++i) {
    const double s = rng.uniform(-6.0, 6.0);
    CHECK(nu(ActivationKind::tanh_unit(), s) == deriv(ActivationKind::tanh_unit(), s));
    CHECK(nu(ActivationKind::sigm_unit(), s) == deriv(ActivationKind::sigm_unit(), s));
    for (const ActivationKind& kind :
         {ActivationKind::relu_smooth(0.2, 0.1, 1.5), ActivationKind::elu_unit(0.8, 2.0)}) {
      const double d = deriv(kind, s);
      CHECK(nu(kind, s) == doctest::Approx(d * d / (kind.sigma * kind.sigma)).epsilon(1e-12));
    }
  }
}

TEST_CASE("nu respects its per-family upper bound") {
  Rng rng(11);
  const ActivationKind relu_i = ActivationKind::relu_smooth(0.3, 0.4, 1.3);
  const ActivationKind elu_small = ActivationKind::elu_unit(0.6, 0.8);
  for (int i = 0; i < 300; ++i) {
    const double s = rng.uniform(-20.0, 20.0);
    CHECK(nu(ActivationKind::tanh_unit(), s) <= 1.0);
    CHECK(nu(ActivationKind::sigm_unit(), s) <= 0.25);
    CHECK(nu(relu_i, s) <= 1.0 / (1.3 * 1.3) + 1e-15);
    CHECK(nu(elu_small, s) <= 1.0 / (0.8 * 0.8) + 1e-15);  // alpha <= 1
    CHECK(nu(ActivationKind::tanh_unit(), s) >= 0.0);
    CHECK(nu(relu_i, s) >= 0.0);
  }
}

TEST_CASE("smoothed relu coefficient is monotone with the right limits") {
  const ActivationKind kind = ActivationKind::relu_smooth(0.1);
  double prev = -1.0;
  for (int i = -200; i <= 200; ++i) {
    const double v = nu(kind, i * 0.05);
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(nu(kind, -50 * 0.1) <= 1e-6);
  CHECK(nu(kind, 50 * 0.1) >= 1.0 - 1e-6);
}

TEST_CASE("forward pass uses the exact relu") {
  const ActivationKind kind = ActivationKind::relu_smooth(0.1, 0.25);
  CHECK(forward_eval(kind, 2.0) == 2.0);
  CHECK(forward_eval(kind, -2.0) == -0.5);
  CHECK(forward_deriv(kind, 2.0) == 1.0);
  CHECK(forward_deriv(kind, -2.0) == 0.25);
  // other families fall through to the analytic value
  CHECK(forward_eval(ActivationKind::tanh_unit(), 0.3) == eval(ActivationKind::tanh_unit(), 0.3));
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS(ActivationKind::relu_smooth(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ActivationKind::relu_smooth(0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(ActivationKind::relu_smooth(0.1, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ActivationKind::elu_unit(0.0), std::invalid_argument);
}

}  // TEST_SUITE
