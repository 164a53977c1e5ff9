#include "rfim/activations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rfim {

ActivationKind ActivationKind::tanh_unit() {
  ActivationKind k;
  k.family = Activation::Tanh;
  return k;
}

ActivationKind ActivationKind::sigm_unit() {
  ActivationKind k;
  k.family = Activation::Sigm;
  return k;
}

ActivationKind ActivationKind::relu_smooth(double omega, double iota, double sigma) {
  ActivationKind k;
  k.family = Activation::ReluOmega;
  k.omega = omega;
  k.iota = iota;
  k.sigma = sigma;
  k.validate();
  return k;
}

ActivationKind ActivationKind::elu_unit(double alpha, double sigma) {
  ActivationKind k;
  k.family = Activation::Elu;
  k.alpha = alpha;
  k.sigma = sigma;
  k.validate();
  return k;
}

void ActivationKind::validate() const {
  if (!(iota >= 0.0 && iota < 1.0)) throw std::invalid_argument("activation: iota must lie in [0,1)");
  if (!(omega > 0.0)) throw std::invalid_argument("activation: omega must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("activation: sigma must be positive");
  if (!(alpha > 0.0)) throw std::invalid_argument("activation: alpha must be positive");
}

double sigm(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

namespace {

double relu_omega_eval(double t, double iota, double omega) {
  const double a = iota * t / omega;
  const double b = t / omega;
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  // log1p keeps the strictly positive gap above max(iota*t, t) even when the
  // second exponential underflows
  return omega * (hi + std::log1p(std::exp(lo - hi)));
}

}  // namespace

double eval(const ActivationKind& kind, double t) {
  switch (kind.family) {
    case Activation::Tanh:
      return std::tanh(t);
    case Activation::Sigm:
      return sigm(t);
    case Activation::ReluOmega:
      return relu_omega_eval(t, kind.iota, kind.omega);
    case Activation::Elu:
      return t >= 0.0 ? t : kind.alpha * std::expm1(t);
  }
  throw std::logic_error("eval: unknown activation family");
}

double deriv(const ActivationKind& kind, double t) {
  switch (kind.family) {
    case Activation::Tanh: {
      const double th = std::tanh(t);
      return 1.0 - th * th;
    }
    case Activation::Sigm: {
      const double s = sigm(t);
      return s * (1.0 - s);
    }
    case Activation::ReluOmega:
      return kind.iota + (1.0 - kind.iota) * sigm((1.0 - kind.iota) / kind.omega * t);
    case Activation::Elu:
      return t >= 0.0 ? 1.0 : kind.alpha * std::exp(t);
  }
  throw std::logic_error("deriv: unknown activation family");
}

double nu(const ActivationKind& kind, double s) {
  switch (kind.family) {
    case Activation::Tanh: {
      const double th = std::tanh(s);
      return 1.0 - th * th;
    }
    case Activation::Sigm: {
      const double p = sigm(s);
      return p * (1.0 - p);
    }
    case Activation::ReluOmega: {
      const double slope = kind.iota + (1.0 - kind.iota) * sigm((1.0 - kind.iota) / kind.omega * s);
      return slope * slope / (kind.sigma * kind.sigma);
    }
    case Activation::Elu: {
      const double s2 = kind.sigma * kind.sigma;
      if (s >= 0.0) return 1.0 / s2;
      const double a = kind.alpha;
      return a * a / s2 * std::exp(2.0 * s);
    }
  }
  throw std::logic_error("nu: unknown activation family");
}

double forward_eval(const ActivationKind& kind, double t) {
  if (kind.family == Activation::ReluOmega) {
    return t >= 0.0 ? t : kind.iota * t;
  }
  return eval(kind, t);
}

double forward_deriv(const ActivationKind& kind, double t) {
  if (kind.family == Activation::ReluOmega) {
    return t >= 0.0 ? 1.0 : kind.iota;
  }
  return deriv(kind, t);
}

}  // namespace rfim
