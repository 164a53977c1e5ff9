#include "rfim/network.hpp"

#include <cmath>
#include <stdexcept>

#include "rfim/metrics.hpp"
#include "rfim/rng.hpp"

namespace rfim {

namespace {
constexpr double kProbClamp = 1e-12;
}

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw std::invalid_argument("MlpSpec: at least two layer sizes");
  for (std::size_t s : layer_sizes) {
    if (s == 0) throw std::invalid_argument("MlpSpec: zero-width layer");
  }
  if (head == Head::SigmoidBernoulli && layer_sizes.back() != 1) {
    throw std::invalid_argument("MlpSpec: sigmoid head requires a single output");
  }
  hidden.validate();
}

MlpParams zero_params(const MlpSpec& spec) {
  spec.validate();
  MlpParams p;
  p.weights.reserve(spec.layers());
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    p.weights.emplace_back(spec.layer_sizes[l] + 1, spec.layer_sizes[l + 1]);
  }
  return p;
}

MlpParams init_params(const MlpSpec& spec, std::uint64_t seed) {
  MlpParams p = zero_params(spec);
  Rng rng(Rng::mix(seed, 0x5eed));
  const bool relu_like = spec.hidden.family == Activation::ReluOmega ||
                         spec.hidden.family == Activation::Elu;
  for (Matrix& w : p.weights) {
    const double fan_in = static_cast<double>(w.rows() - 1);
    const double scale = std::sqrt((relu_like ? 2.0 : 1.0) / fan_in);
    // bias row (last) stays zero
    for (std::size_t i = 0; i + 1 < w.rows(); ++i) {
      for (std::size_t j = 0; j < w.cols(); ++j) w(i, j) = scale * rng.normal();
    }
  }
  return p;
}

namespace {

// x_aug (n x (D+1), constant column last) times weights ((D+1) x m).
Matrix affine_forward(const Matrix& acts, const Matrix& weights) {
  const std::size_t n = acts.rows();
  const std::size_t d = acts.cols();
  const std::size_t m = weights.cols();
  if (weights.rows() != d + 1) throw std::invalid_argument("forward: layer shape mismatch");
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* a = acts.row(i);
    double* o = out.row(i);
    for (std::size_t k = 0; k < d; ++k) {
      const double aik = a[k];
      const double* wr = weights.row(k);
      for (std::size_t j = 0; j < m; ++j) o[j] += aik * wr[j];
    }
    const double* bias = weights.row(d);
    for (std::size_t j = 0; j < m; ++j) o[j] += bias[j];
  }
  return out;
}

}  // namespace

ForwardTrace forward(const MlpSpec& spec, const MlpParams& params,
                     const std::vector<Vector>& batch) {
  spec.validate();
  if (params.weights.size() != spec.layers()) {
    throw std::invalid_argument("forward: parameter/spec layer count mismatch");
  }
  if (batch.empty()) throw std::invalid_argument("forward: empty batch");

  ForwardTrace trace;
  trace.batch = batch.size();
  trace.inputs = Matrix(batch.size(), spec.inputs());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() != spec.inputs()) throw std::invalid_argument("forward: input dim mismatch");
    for (std::size_t j = 0; j < batch[i].size(); ++j) trace.inputs(i, j) = batch[i][j];
  }

  const Matrix* acts = &trace.inputs;
  for (std::size_t l = 0; l < spec.layers(); ++l) {
    Matrix pre = affine_forward(*acts, params.weights[l]);
    if (!all_finite(pre)) throw std::runtime_error("forward: non-finite pre-activation");
    Matrix act(pre.rows(), pre.cols());
    const bool is_head = (l + 1 == spec.layers());
    if (!is_head) {
      for (std::size_t i = 0; i < pre.rows(); ++i) {
        for (std::size_t j = 0; j < pre.cols(); ++j) {
          act(i, j) = forward_eval(spec.hidden, pre(i, j));
        }
      }
    } else if (spec.head == Head::SoftmaxCrossEntropy) {
      for (std::size_t i = 0; i < pre.rows(); ++i) {
        Vector row(pre.row(i), pre.row(i) + pre.cols());
        const Vector p = softmax(row);
        for (std::size_t j = 0; j < p.size(); ++j) act(i, j) = p[j];
      }
    } else {
      for (std::size_t i = 0; i < pre.rows(); ++i) act(i, 0) = sigm(pre(i, 0));
    }
    trace.pre_activations.push_back(std::move(pre));
    trace.activations.push_back(std::move(act));
    acts = &trace.activations.back();
  }
  return trace;
}

double loss_cross_entropy(const MlpSpec& spec, ForwardTrace& trace,
                          const std::vector<int>& labels) {
  if (labels.size() != trace.batch) throw std::invalid_argument("loss: label count mismatch");
  const Matrix& probs = trace.probabilities();
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    double p;
    if (spec.head == Head::SoftmaxCrossEntropy) {
      if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= probs.cols()) {
        throw std::invalid_argument("loss: label out of range");
      }
      p = probs(i, static_cast<std::size_t>(labels[i]));
    } else {
      if (labels[i] != 0 && labels[i] != 1) throw std::invalid_argument("loss: binary label expected");
      p = labels[i] == 1 ? probs(i, 0) : 1.0 - probs(i, 0);
    }
    if (p < kProbClamp) {
      p = kProbClamp;
      ++trace.clamp_events;
    }
    total += -std::log(p);
  }
  return total / static_cast<double>(labels.size());
}

MlpParams backward(const MlpSpec& spec, const MlpParams& params, const ForwardTrace& trace,
                   const std::vector<int>& labels) {
  if (labels.size() != trace.batch) throw std::invalid_argument("backward: label count mismatch");
  if (trace.activations.size() != spec.layers()) {
    throw std::invalid_argument("backward: trace does not match spec");
  }
  const std::size_t n = trace.batch;
  const double inv_n = 1.0 / static_cast<double>(n);

  // delta at the head pre-activation
  const Matrix& probs = trace.probabilities();
  Matrix delta(n, probs.cols());
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.head == Head::SoftmaxCrossEntropy) {
      for (std::size_t j = 0; j < probs.cols(); ++j) {
        delta(i, j) = (probs(i, j) - (static_cast<std::size_t>(labels[i]) == j ? 1.0 : 0.0)) * inv_n;
      }
    } else {
      delta(i, 0) = (probs(i, 0) - static_cast<double>(labels[i])) * inv_n;
    }
  }

  MlpParams grads = zero_params(spec);
  for (std::size_t li = spec.layers(); li-- > 0;) {
    const Matrix& layer_in = (li == 0) ? trace.inputs : trace.activations[li - 1];
    Matrix& g = grads.weights[li];
    // g = [layer_in; 1]ᵀ delta
    for (std::size_t i = 0; i < n; ++i) {
      const double* a = layer_in.row(i);
      const double* d = delta.row(i);
      for (std::size_t r = 0; r + 1 < g.rows(); ++r) {
        const double ar = a[r];
        double* gr = g.row(r);
        for (std::size_t c = 0; c < g.cols(); ++c) gr[c] += ar * d[c];
      }
      double* bias = g.row(g.rows() - 1);
      for (std::size_t c = 0; c < g.cols(); ++c) bias[c] += d[c];
    }
    if (li == 0) break;
    // delta_{l-1} = (delta_l Wᵀ without bias row) ⊙ f'(pre_{l-1})
    const Matrix& w = params.weights[li];
    const Matrix& pre = trace.pre_activations[li - 1];
    Matrix next(n, w.rows() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double* d = delta.row(i);
      double* o = next.row(i);
      for (std::size_t r = 0; r + 1 < w.rows(); ++r) {
        const double* wr = w.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < w.cols(); ++c) s += wr[c] * d[c];
        o[r] = s * forward_deriv(spec.hidden, pre(i, r));
      }
    }
    delta = std::move(next);
  }
  return grads;
}

double classification_error(const MlpSpec& spec, const MlpParams& params,
                            const std::vector<Vector>& xs, const std::vector<int>& labels) {
  if (xs.size() != labels.size()) throw std::invalid_argument("classification_error: size mismatch");
  ForwardTrace trace = forward(spec, params, xs);
  const Matrix& probs = trace.probabilities();
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    int pred;
    if (spec.head == Head::SoftmaxCrossEntropy) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < probs.cols(); ++j) {
        if (probs(i, j) > probs(i, best)) best = j;
      }
      pred = static_cast<int>(best);
    } else {
      pred = probs(i, 0) >= 0.5 ? 1 : 0;
    }
    if (pred != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(xs.size());
}

double logistic_loss(const Vector& theta, const std::vector<Vector>& zs,
                     const std::vector<int>& labels) {
  if (zs.size() != labels.size() || zs.empty()) {
    throw std::invalid_argument("logistic_loss: bad batch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double p = sigm(dot(theta, zs[i]));
    double q = labels[i] == 1 ? p : 1.0 - p;
    if (q < kProbClamp) q = kProbClamp;
    total += -std::log(q);
  }
  return total / static_cast<double>(zs.size());
}

Vector logistic_gradient(const Vector& theta, const std::vector<Vector>& zs,
                         const std::vector<int>& labels) {
  if (zs.size() != labels.size() || zs.empty()) {
    throw std::invalid_argument("logistic_gradient: bad batch");
  }
  Vector g(theta.size(), 0.0);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double err = sigm(dot(theta, zs[i])) - static_cast<double>(labels[i]);
    axpy(err, zs[i], g);
  }
  const double inv_n = 1.0 / static_cast<double>(zs.size());
  for (double& v : g) v *= inv_n;
  return g;
}

double logistic_error(const Vector& theta, const std::vector<Vector>& zs,
                      const std::vector<int>& labels) {
  if (zs.size() != labels.size() || zs.empty()) {
    throw std::invalid_argument("logistic_error: bad batch");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const int pred = sigm(dot(theta, zs[i])) >= 0.5 ? 1 : 0;
    if (pred != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(zs.size());
}

}  // namespace rfim
