#pragma once

namespace rfim {

enum class Activation { Tanh, Sigm, ReluOmega, Elu };

// Activation family plus its hyperparameters. iota is the negative-side
// slope and omega the smoothing temperature of the softened relu; sigma is
// the Gaussian output noise of the relu/elu families; alpha is the elu knee.
struct ActivationKind {
  Activation family = Activation::Tanh;
  double iota = 0.0;
  double omega = 0.1;
  double sigma = 1.0;
  double alpha = 1.0;

  static ActivationKind tanh_unit();
  static ActivationKind sigm_unit();
  static ActivationKind relu_smooth(double omega = 0.1, double iota = 0.0, double sigma = 1.0);
  static ActivationKind elu_unit(double alpha = 1.0, double sigma = 1.0);

  void validate() const;  // throws std::invalid_argument on bad hyperparameters
};

double sigm(double t);

// Value of the family's (smoothed) activation. The softened relu uses a
// max-subtracted log-sum-exp, finite for |t| up to ~1e8.
double eval(const ActivationKind& kind, double t);

// Analytic derivative of eval. The elu derivative at t = 0 is the right
// limit, 1, mirroring the ">= 0" branch of its metric coefficient.
double deriv(const ActivationKind& kind, double t);

// Metric coefficient at pre-activation s = wᵀx̃. Always >= 0.
double nu(const ActivationKind& kind, double s);

// Activation actually applied in forward passes: exact piecewise-linear relu
// for the ReluOmega family (the smoothing only shapes the metric), eval for
// everything else.
double forward_eval(const ActivationKind& kind, double t);
double forward_deriv(const ActivationKind& kind, double t);

}  // namespace rfim
