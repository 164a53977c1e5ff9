#include "rfim/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "rfim/rng.hpp"

namespace rfim {

OutputModel OutputModel::bernoulli_tanh() {
  OutputModel m;
  m.tag = Tag::BernoulliTanh;
  m.mean_activation = ActivationKind::tanh_unit();
  return m;
}

OutputModel OutputModel::bernoulli_sigm() {
  OutputModel m;
  m.tag = Tag::BernoulliSigm;
  m.mean_activation = ActivationKind::sigm_unit();
  return m;
}

OutputModel OutputModel::gaussian(const ActivationKind& act) {
  OutputModel m;
  m.tag = Tag::GaussianMean;
  m.mean_activation = act;
  m.sigma = act.sigma;
  return m;
}

OutputModel OutputModel::gaussian_identity(double sigma) {
  OutputModel m;
  m.tag = Tag::GaussianMean;
  m.identity_mean = true;
  m.sigma = sigma;
  return m;
}

OracleMethod OracleMethod::enumerate() { return OracleMethod{}; }

OracleMethod OracleMethod::monte_carlo(std::size_t draws, std::uint64_t seed) {
  OracleMethod m;
  m.kind = Kind::MonteCarlo;
  m.draws = draws;
  m.seed = seed;
  return m;
}

OracleMethod OracleMethod::hessian_fd(double step) {
  if (!(step > 0.0)) throw std::invalid_argument("hessian_fd: step must be positive");
  OracleMethod m;
  m.kind = Kind::HessianFd;
  m.step = step;
  return m;
}

namespace {

double mean_of(const OutputModel& model, double s) {
  if (model.tag == OutputModel::Tag::GaussianMean && model.identity_mean) return s;
  return eval(model.mean_activation, s);
}

double mean_deriv_of(const OutputModel& model, double s) {
  if (model.tag == OutputModel::Tag::GaussianMean && model.identity_mean) return 1.0;
  return deriv(model.mean_activation, s);
}

void check_dims(const Vector& w, const Vector& x) {
  if (w.size() != x.size() + 1) {
    throw std::invalid_argument("fisher oracle: weight dim must be input dim + 1");
  }
}

}  // namespace

Matrix fisher_enumerate(const OutputModel& model, const Vector& w, const Vector& x) {
  check_dims(w, x);
  if (model.tag == OutputModel::Tag::GaussianMean) {
    throw std::invalid_argument("fisher_enumerate: continuous outcome space is not enumerable");
  }
  const Vector xt = augment(x);
  const double s = dot(w, xt);
  Matrix g(xt.size(), xt.size());
  if (model.tag == OutputModel::Tag::BernoulliTanh) {
    const double mu = std::tanh(s);
    const double pp = 0.5 * (1.0 + mu);
    const double pm = 0.5 * (1.0 - mu);
    // scores wrt w scale x̃ by (1-mu) for y=+1 and -(1+mu) for y=-1
    add_scaled_outer(g, pp * (1.0 - mu) * (1.0 - mu), xt);
    add_scaled_outer(g, pm * (1.0 + mu) * (1.0 + mu), xt);
  } else {
    const double mu = sigm(s);
    add_scaled_outer(g, mu * (1.0 - mu) * (1.0 - mu), xt);
    add_scaled_outer(g, (1.0 - mu) * mu * mu, xt);
  }
  if (!all_finite(g)) throw std::runtime_error("fisher_enumerate: non-finite likelihood");
  return g;
}

McFisher fisher_monte_carlo(const OutputModel& model, const Vector& w, const Vector& x,
                            std::size_t draws, std::uint64_t seed) {
  check_dims(w, x);
  if (draws == 0) throw std::invalid_argument("fisher_monte_carlo: draws must be positive");
  const Vector xt = augment(x);
  const double s = dot(w, xt);
  const std::size_t d1 = xt.size();

  Rng rng(seed);
  Matrix sum(d1, d1);
  Matrix sumsq(d1, d1);

  // per-draw scalar c with score = c * x̃, so only c and c² need accumulating
  auto accumulate = [&](double c) {
    const double c2 = c * c;
    for (std::size_t i = 0; i < d1; ++i) {
      double* sr = sum.row(i);
      double* qr = sumsq.row(i);
      const double xi = xt[i];
      for (std::size_t j = 0; j < d1; ++j) {
        const double e = c2 * xi * xt[j];
        sr[j] += e;
        qr[j] += e * e;
      }
    }
  };

  switch (model.tag) {
    case OutputModel::Tag::BernoulliTanh: {
      const double mu = std::tanh(s);
      const double pp = 0.5 * (1.0 + mu);
      for (std::size_t k = 0; k < draws; ++k) {
        accumulate(rng.uniform() < pp ? (1.0 - mu) : -(1.0 + mu));
      }
      break;
    }
    case OutputModel::Tag::BernoulliSigm: {
      const double mu = sigm(s);
      for (std::size_t k = 0; k < draws; ++k) {
        accumulate(rng.uniform() < mu ? (1.0 - mu) : -mu);
      }
      break;
    }
    case OutputModel::Tag::GaussianMean: {
      const double sigma2 = model.sigma * model.sigma;
      const double dmu = mean_deriv_of(model, s);
      for (std::size_t k = 0; k < draws; ++k) {
        const double noise = model.sigma * rng.normal();
        accumulate(noise / sigma2 * dmu);
      }
      break;
    }
  }

  McFisher out;
  out.draws = draws;
  out.mean = Matrix(d1, d1);
  out.standard_error = Matrix(d1, d1);
  const double n = static_cast<double>(draws);
  for (std::size_t i = 0; i < d1; ++i) {
    for (std::size_t j = 0; j < d1; ++j) {
      const double m = sum(i, j) / n;
      out.mean(i, j) = m;
      const double var = std::max(0.0, sumsq(i, j) / n - m * m);
      out.standard_error(i, j) = std::sqrt(var / n);
    }
  }
  if (!all_finite(out.mean)) throw std::runtime_error("fisher_monte_carlo: non-finite estimate");
  return out;
}

namespace {

// E_{y ~ p(.|base)} ln p(y|w), exact for all three models.
double expected_loglik(const OutputModel& model, const Vector& probe_w, const Vector& base_w,
                       const Vector& xt) {
  const double sp = dot(probe_w, xt);
  const double sb = dot(base_w, xt);
  switch (model.tag) {
    case OutputModel::Tag::BernoulliTanh: {
      const double mu_b = std::tanh(sb);
      const double mu_p = std::tanh(sp);
      const double pp_b = 0.5 * (1.0 + mu_b);
      const double pm_b = 0.5 * (1.0 - mu_b);
      return pp_b * std::log(0.5 * (1.0 + mu_p)) + pm_b * std::log(0.5 * (1.0 - mu_p));
    }
    case OutputModel::Tag::BernoulliSigm: {
      const double mu_b = sigm(sb);
      const double mu_p = sigm(sp);
      return mu_b * std::log(mu_p) + (1.0 - mu_b) * std::log(1.0 - mu_p);
    }
    case OutputModel::Tag::GaussianMean: {
      const double sigma2 = model.sigma * model.sigma;
      const double diff = mean_of(model, sb) - mean_of(model, sp);
      return -0.5 * std::log(2.0 * M_PI * sigma2) - (sigma2 + diff * diff) / (2.0 * sigma2);
    }
  }
  throw std::logic_error("expected_loglik: unknown model");
}

}  // namespace

Matrix fisher_hessian_fd(const OutputModel& model, const Vector& w, const Vector& x,
                         double step) {
  check_dims(w, x);
  if (!(step > 0.0)) throw std::invalid_argument("fisher_hessian_fd: step must be positive");
  const Vector xt = augment(x);
  const std::size_t d1 = xt.size();

  auto phi = [&](const Vector& probe) { return expected_loglik(model, probe, w, xt); };

  Matrix h(d1, d1);
  const double phi0 = phi(w);
  Vector probe = w;
  for (std::size_t i = 0; i < d1; ++i) {
    probe[i] = w[i] + step;
    const double fp = phi(probe);
    probe[i] = w[i] - step;
    const double fm = phi(probe);
    probe[i] = w[i];
    h(i, i) = -(fp - 2.0 * phi0 + fm) / (step * step);
    for (std::size_t j = i + 1; j < d1; ++j) {
      probe[i] = w[i] + step;
      probe[j] = w[j] + step;
      const double fpp = phi(probe);
      probe[j] = w[j] - step;
      const double fpm = phi(probe);
      probe[i] = w[i] - step;
      const double fmm = phi(probe);
      probe[j] = w[j] + step;
      const double fmp = phi(probe);
      probe[i] = w[i];
      probe[j] = w[j];
      const double v = -(fpp - fpm - fmp + fmm) / (4.0 * step * step);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  if (!all_finite(h)) throw std::runtime_error("fisher_hessian_fd: non-finite likelihood");
  return h;
}

Matrix observed_fisher(const OutputModel& model, const Vector& w, const Vector& x,
                       const OracleMethod& method) {
  switch (method.kind) {
    case OracleMethod::Kind::Enumerate:
      return fisher_enumerate(model, w, x);
    case OracleMethod::Kind::MonteCarlo:
      return fisher_monte_carlo(model, w, x, method.draws, method.seed).mean;
    case OracleMethod::Kind::HessianFd:
      return fisher_hessian_fd(model, w, x, method.step);
  }
  throw std::logic_error("observed_fisher: unknown method");
}

namespace {

struct BernoulliScore {
  double log_prob;
  double score_scale;  // d ln p / d(pre-activation)
};

BernoulliScore bernoulli_outcome(const ActivationKind& kind, double s, int outcome) {
  if (kind.family == Activation::Tanh) {
    const double mu = std::tanh(s);
    if (outcome == 1) return {std::log(0.5 * (1.0 + mu)), 1.0 - mu};
    return {std::log(0.5 * (1.0 - mu)), -(1.0 + mu)};
  }
  if (kind.family == Activation::Sigm) {
    const double mu = sigm(s);
    if (outcome == 1) return {std::log(mu), 1.0 - mu};
    return {std::log(1.0 - mu), -mu};
  }
  throw std::invalid_argument("enumeration oracle: Bernoulli families only");
}

void check_outcome_budget(std::size_t outputs) {
  if (outputs > 4) {
    // 2^5 = 32 > 20
    throw std::invalid_argument("enumeration oracle: outcome space too large");
  }
}

}  // namespace

Matrix layer_fisher_enumerate(const ActivationKind& kind, const Matrix& weights,
                              const Vector& x) {
  const std::size_t m = weights.cols();
  if (m == 0) throw std::invalid_argument("layer_fisher_enumerate: empty layer");
  check_outcome_budget(m);
  if (weights.rows() != x.size() + 1) {
    throw std::invalid_argument("layer_fisher_enumerate: weight rows must be input dim + 1");
  }
  const Vector xt = augment(x);
  const std::size_t d1 = xt.size();
  const Vector pre = matvec_transposed(weights, xt);

  Matrix g(m * d1, m * d1);
  Vector score(m * d1);
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    double log_p = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const int outcome = (mask >> i) & 1;
      const BernoulliScore bs = bernoulli_outcome(kind, pre[i], outcome);
      log_p += bs.log_prob;
      for (std::size_t r = 0; r < d1; ++r) score[i * d1 + r] = bs.score_scale * xt[r];
    }
    add_scaled_outer(g, std::exp(log_p), score);
  }
  if (!all_finite(g)) throw std::runtime_error("layer_fisher_enumerate: non-finite likelihood");
  return g;
}

Matrix two_layer_fisher_enumerate(const ActivationKind& kind, const Matrix& first,
                                  const Matrix& second, const Vector& x) {
  const std::size_t hidden = first.cols();
  const std::size_t outputs = second.cols();
  if (outputs == 0) throw std::invalid_argument("two_layer_fisher_enumerate: empty output layer");
  check_outcome_budget(outputs);
  if (first.rows() != x.size() + 1 || second.rows() != hidden + 1) {
    throw std::invalid_argument("two_layer_fisher_enumerate: shape mismatch");
  }

  const Vector xt = augment(x);
  const std::size_t d1 = xt.size();
  const Vector pre_first = matvec_transposed(first, xt);
  Vector h(hidden);
  Vector dh(hidden);  // dh_i / d(pre_first_i)
  for (std::size_t i = 0; i < hidden; ++i) {
    h[i] = eval(kind, pre_first[i]);
    dh[i] = deriv(kind, pre_first[i]);
  }
  const Vector ht = augment(h);
  const Vector pre_second = matvec_transposed(second, ht);

  Matrix g(hidden * d1, hidden * d1);
  Vector score(hidden * d1);
  for (std::size_t mask = 0; mask < (std::size_t{1} << outputs); ++mask) {
    double log_p = 0.0;
    Vector back(hidden, 0.0);  // d ln p / d(pre_first_i)
    for (std::size_t l = 0; l < outputs; ++l) {
      const int outcome = (mask >> l) & 1;
      const BernoulliScore bs = bernoulli_outcome(kind, pre_second[l], outcome);
      log_p += bs.log_prob;
      for (std::size_t i = 0; i < hidden; ++i) {
        back[i] += bs.score_scale * second(i, l) * dh[i];
      }
    }
    for (std::size_t i = 0; i < hidden; ++i) {
      for (std::size_t r = 0; r < d1; ++r) score[i * d1 + r] = back[i] * xt[r];
    }
    add_scaled_outer(g, std::exp(log_p), score);
  }
  if (!all_finite(g)) throw std::runtime_error("two_layer_fisher_enumerate: non-finite likelihood");
  return g;
}

}  // namespace rfim
