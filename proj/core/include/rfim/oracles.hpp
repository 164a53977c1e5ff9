#pragma once

#include <cstdint>
#include <vector>

#include "rfim/activations.hpp"
#include "rfim/linalg.hpp"

namespace rfim {

// Conditional output model of a single neuron, the ground truth the
// brute-force Fisher estimators integrate over.
struct OutputModel {
  enum class Tag { BernoulliTanh, BernoulliSigm, GaussianMean };

  Tag tag = Tag::BernoulliSigm;
  // GaussianMean only: y ~ G(f(wᵀx̃), sigma²); f is `mean_activation`, or the
  // identity map when identity_mean is set.
  ActivationKind mean_activation{};
  bool identity_mean = false;
  double sigma = 1.0;

  static OutputModel bernoulli_tanh();
  static OutputModel bernoulli_sigm();
  static OutputModel gaussian(const ActivationKind& act);
  static OutputModel gaussian_identity(double sigma = 1.0);
};

struct McFisher {
  Matrix mean;
  Matrix standard_error;  // per-entry standard error of `mean`
  std::size_t draws = 0;
};

// Exact expectation over the finite outcome space (Bernoulli models only).
Matrix fisher_enumerate(const OutputModel& model, const Vector& w, const Vector& x);

// Sample average of score outer products.
McFisher fisher_monte_carlo(const OutputModel& model, const Vector& w, const Vector& x,
                            std::size_t draws, std::uint64_t seed);

// Negated central-difference Hessian of the expected log-likelihood
// (expectation taken at the base parameters, exactly).
Matrix fisher_hessian_fd(const OutputModel& model, const Vector& w, const Vector& x,
                         double step);

struct OracleMethod {
  enum class Kind { Enumerate, MonteCarlo, HessianFd };
  Kind kind = Kind::Enumerate;
  std::size_t draws = 1000000;
  std::uint64_t seed = 0;
  double step = 1e-4;

  static OracleMethod enumerate();
  static OracleMethod monte_carlo(std::size_t draws, std::uint64_t seed);
  static OracleMethod hessian_fd(double step);
};

Matrix observed_fisher(const OutputModel& model, const Vector& w, const Vector& x,
                       const OracleMethod& method);

// Full m(D+1)-square Fisher of a Bernoulli layer (columns of `weights` are the
// neurons), enumerated over all 2^m outcomes. Requires 2^m <= 20.
Matrix layer_fisher_enumerate(const ActivationKind& kind, const Matrix& weights,
                              const Vector& x);

// Full Fisher of the first-layer weights of the two-layer Bernoulli model
// h = f(firstᵀx̃), y_l ~ Bernoulli around f(secondᵀh̃), enumerated over all
// 2^{Dy} outcomes. Requires 2^{Dy} <= 20.
Matrix two_layer_fisher_enumerate(const ActivationKind& kind, const Matrix& first,
                                  const Matrix& second, const Vector& x);

}  // namespace rfim
