#include "rfim/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rfim/activations.hpp"
#include "rfim/metrics.hpp"

namespace rfim {

namespace {

void check_same_shapes(const std::vector<Matrix>& a, const std::vector<Matrix>& b,
                       const char* who) {
  if (a.size() != b.size()) throw std::invalid_argument(std::string(who) + ": layer count mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) {
      throw std::invalid_argument(std::string(who) + ": shape mismatch");
    }
  }
}

}  // namespace

MomentumState MomentumState::make(const MlpParams& params, double momentum, double gamma) {
  MomentumState s;
  s.momentum = momentum;
  s.gamma = gamma;
  s.velocity.reserve(params.weights.size());
  for (const Matrix& w : params.weights) s.velocity.emplace_back(w.rows(), w.cols());
  return s;
}

void sgd_step(MlpParams& params, const MlpParams& grads, MomentumState& state) {
  check_same_shapes(params.weights, grads.weights, "sgd_step");
  check_same_shapes(params.weights, state.velocity, "sgd_step");
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto p = params.weights[l].data();
    auto g = grads.weights[l].data();
    auto v = state.velocity[l].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = state.momentum * v[i] - state.gamma * g[i];
      p[i] += v[i];
    }
  }
}

VectorMomentumState VectorMomentumState::make(std::size_t dim, double momentum, double gamma) {
  VectorMomentumState s;
  s.velocity.assign(dim, 0.0);
  s.momentum = momentum;
  s.gamma = gamma;
  return s;
}

void sgd_step(Vector& theta, const Vector& grad, VectorMomentumState& state) {
  if (theta.size() != grad.size() || theta.size() != state.velocity.size()) {
    throw std::invalid_argument("sgd_step: shape mismatch");
  }
  for (std::size_t i = 0; i < theta.size(); ++i) {
    state.velocity[i] = state.momentum * state.velocity[i] - state.gamma * grad[i];
    theta[i] += state.velocity[i];
  }
}

AdamState AdamState::make(const MlpParams& params, double gamma) {
  AdamState s;
  s.gamma = gamma;
  s.first.reserve(params.weights.size());
  s.second.reserve(params.weights.size());
  for (const Matrix& w : params.weights) {
    s.first.emplace_back(w.rows(), w.cols());
    s.second.emplace_back(w.rows(), w.cols());
  }
  return s;
}

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state) {
  check_same_shapes(params.weights, grads.weights, "adam_step");
  check_same_shapes(params.weights, state.first, "adam_step");
  ++state.step_count;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    auto p = params.weights[l].data();
    auto g = grads.weights[l].data();
    auto m = state.first[l].data();
    auto v = state.second[l].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      p[i] -= state.gamma * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

Matrix logistic_batch_metric(const Vector& theta, const std::vector<Vector>& zs) {
  if (zs.empty()) throw std::invalid_argument("logistic_batch_metric: empty batch");
  const std::size_t d = theta.size();
  Matrix g(d, d);
  for (const Vector& z : zs) {
    if (z.size() != d) throw std::invalid_argument("logistic_batch_metric: dim mismatch");
    const double p = sigm(dot(theta, z));
    add_scaled_outer_upper(g, p * (1.0 - p), z);
  }
  const double inv_n = 1.0 / static_cast<double>(zs.size());
  for (std::size_t i = 0; i < d; ++i) {
    double* r = g.row(i);
    for (std::size_t j = i; j < d; ++j) r[j] *= inv_n;
  }
  mirror_upper_to_lower(g);
  return g;
}

Vector ngd_logistic_step(const Vector& theta, const std::vector<Vector>& zs,
                         const std::vector<int>& labels, double gamma, double eps_rel) {
  const Matrix g = logistic_batch_metric(theta, zs);
  const Vector grad = logistic_gradient(theta, zs, labels);
  const double eps = trace_scaled_epsilon(g, eps_rel);
  const Vector direction = regularized_solve(g, grad, eps);
  Vector out = theta;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= gamma * direction[i];
  return out;
}

RngdState RngdState::make(const MlpSpec& spec, double lambda, long period, double eps_rel) {
  spec.validate();
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("RngdState: lambda in [0,1]");
  if (period < 1) throw std::invalid_argument("RngdState: period must be >= 1");
  RngdState state;
  state.lambda = lambda;
  state.period = period;
  state.eps_rel = eps_rel;
  state.layers.resize(spec.layers());
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    LayerState& ls = state.layers[l];
    // input layer and head use the shared linear-layer block
    ls.shared = (l == 0) || (l + 1 == spec.layers());
    const std::size_t blocks = ls.shared ? 1 : spec.layer_sizes[l + 1];
    const std::size_t dim = spec.layer_sizes[l] + 1;
    ls.ema.assign(blocks, Matrix::identity(dim));
  }
  rngd_refresh(state);
  return state;
}

namespace {

// Fresh batch term for one metric block: mean over rows of nu_i x̃ x̃ᵀ.
// nu per sample comes from the caller; inputs are un-augmented rows.
Matrix batch_metric_block(const Matrix& inputs, const Vector& nu_per_sample) {
  const std::size_t n = inputs.rows();
  const std::size_t d1 = inputs.cols() + 1;
  Matrix b(d1, d1);
  Vector xt(d1);
  xt.back() = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = inputs.row(i);
    for (std::size_t j = 0; j + 1 < d1; ++j) xt[j] = r[j];
    add_scaled_outer_upper(b, nu_per_sample[i], xt);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < d1; ++i) {
    double* row = b.row(i);
    for (std::size_t j = i; j < d1; ++j) row[j] *= inv_n;
  }
  mirror_upper_to_lower(b);
  return b;
}

void ema_accumulate(Matrix& ema, const Matrix& fresh, double lambda, double eps_rel) {
  const double eps = trace_scaled_epsilon(fresh, eps_rel);
  auto e = ema.data();
  auto f = fresh.data();
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = lambda * e[i] + (1.0 - lambda) * f[i];
  const std::size_t d = ema.rows();
  for (std::size_t i = 0; i < d; ++i) ema(i, i) += (1.0 - lambda) * eps;
}

}  // namespace

void rngd_ema_update(RngdState& state, const MlpSpec& spec, const ForwardTrace& trace) {
  if (state.layers.size() != spec.layers()) {
    throw std::invalid_argument("rngd_ema_update: state does not match spec");
  }
  const std::size_t n = trace.batch;
  if (n == 0) throw std::invalid_argument("rngd_ema_update: empty batch");

  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    RngdState::LayerState& ls = state.layers[l];
    const Matrix& inputs = (l == 0) ? trace.inputs : trace.activations[l - 1];
    if (ls.shared) {
      Vector ones(n, 1.0);  // linear-layer coefficient at unit noise
      Matrix fresh = batch_metric_block(inputs, ones);
      ema_accumulate(ls.ema[0], fresh, state.lambda, state.eps_rel);
    } else {
      const Matrix& pre = trace.pre_activations[l];
      Vector nu_col(n);
      for (std::size_t j = 0; j < ls.ema.size(); ++j) {
        for (std::size_t i = 0; i < n; ++i) nu_col[i] = nu(spec.hidden, pre(i, j));
        Matrix fresh = batch_metric_block(inputs, nu_col);
        ema_accumulate(ls.ema[j], fresh, state.lambda, state.eps_rel);
      }
    }
  }
  ++state.iteration;
}

void rngd_refresh(RngdState& state) {
  for (RngdState::LayerState& ls : state.layers) {
    ls.cache.clear();
    ls.cache.reserve(ls.ema.size());
    for (const Matrix& g : ls.ema) ls.cache.push_back(CholeskyFactor::compute(g));
  }
}

void rngd_step(MlpParams& params, const MlpParams& grads, const RngdState& state, double gamma) {
  check_same_shapes(params.weights, grads.weights, "rngd_step");
  if (params.weights.size() != state.layers.size()) {
    throw std::invalid_argument("rngd_step: state does not match params");
  }
  Vector column;
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    Matrix& w = params.weights[l];
    const Matrix& g = grads.weights[l];
    const RngdState::LayerState& ls = state.layers[l];
    if (ls.cache.empty()) throw std::logic_error("rngd_step: no cached factorization");
    column.resize(w.rows());
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const CholeskyFactor& factor = ls.shared ? ls.cache[0] : ls.cache[j];
      if (factor.dim() != w.rows()) throw std::invalid_argument("rngd_step: block dim mismatch");
      for (std::size_t r = 0; r < w.rows(); ++r) column[r] = g(r, j);
      factor.solve_in_place(column);
      for (std::size_t r = 0; r < w.rows(); ++r) w(r, j) -= gamma * column[r];
    }
  }
}

}  // namespace rfim
