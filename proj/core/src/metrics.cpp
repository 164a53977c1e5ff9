#include "rfim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace rfim {

Matrix FullMetric::block(std::size_t i, std::size_t j) const {
  if (i >= num_blocks || j >= num_blocks) throw std::invalid_argument("FullMetric::block: out of range");
  Matrix b(block_dim, block_dim);
  for (std::size_t r = 0; r < block_dim; ++r) {
    for (std::size_t c = 0; c < block_dim; ++c) {
      b(r, c) = matrix(i * block_dim + r, j * block_dim + c);
    }
  }
  return b;
}

Matrix neuron_rfim(const ActivationKind& kind, const Vector& w, const Vector& x) {
  if (w.size() != x.size() + 1) {
    throw std::invalid_argument("neuron_rfim: weight dim must be input dim + 1");
  }
  const Vector xt = augment(x);
  const double coeff = nu(kind, dot(w, xt));
  Matrix g(xt.size(), xt.size());
  add_scaled_outer(g, coeff, xt);
  return g;
}

Matrix batch_neuron_rfim(const ActivationKind& kind, const Vector& w,
                         const std::vector<Vector>& xs) {
  if (xs.empty()) throw std::invalid_argument("batch_neuron_rfim: empty batch");
  const std::size_t d1 = w.size();
  Matrix g(d1, d1);
  for (const Vector& x : xs) {
    if (x.size() + 1 != d1) throw std::invalid_argument("batch_neuron_rfim: dim mismatch");
    const Vector xt = augment(x);
    add_scaled_outer_upper(g, nu(kind, dot(w, xt)), xt);
  }
  const double inv_n = 1.0 / static_cast<double>(xs.size());
  for (std::size_t i = 0; i < d1; ++i) {
    double* r = g.row(i);
    for (std::size_t j = i; j < d1; ++j) r[j] *= inv_n;
  }
  mirror_upper_to_lower(g);
  return g;
}

BlockDiagMetric linear_layer_rfim(double sigma, const Vector& x, std::size_t outputs) {
  if (!(sigma > 0.0)) throw std::invalid_argument("linear_layer_rfim: sigma must be positive");
  const Vector xt = augment(x);
  Matrix block(xt.size(), xt.size());
  add_scaled_outer(block, 1.0 / (sigma * sigma), xt);
  BlockDiagMetric metric;
  metric.input_dim = x.size();
  metric.blocks.assign(outputs, block);
  return metric;
}

BlockDiagMetric nonlinear_layer_rfim(const ActivationKind& kind, const Matrix& weights,
                                     const Vector& x) {
  if (weights.rows() != x.size() + 1) {
    throw std::invalid_argument("nonlinear_layer_rfim: weight rows must be input dim + 1");
  }
  const Vector xt = augment(x);
  BlockDiagMetric metric;
  metric.input_dim = x.size();
  metric.blocks.reserve(weights.cols());
  for (std::size_t i = 0; i < weights.cols(); ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < weights.rows(); ++r) s += weights(r, i) * xt[r];
    Matrix block(xt.size(), xt.size());
    add_scaled_outer(block, nu(kind, s), xt);
    metric.blocks.push_back(std::move(block));
  }
  return metric;
}

Vector softmax(const Vector& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  Vector p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

FullMetric softmax_rfim(const Matrix& weights, const Vector& x) {
  const std::size_t m = weights.cols();
  if (m < 2) throw std::invalid_argument("softmax_rfim: at least two outputs required");
  if (weights.rows() != x.size() + 1) {
    throw std::invalid_argument("softmax_rfim: weight rows must be input dim + 1");
  }
  const Vector xt = augment(x);
  const Vector eta = softmax(matvec_transposed(weights, xt));
  const std::size_t d1 = xt.size();

  FullMetric metric;
  metric.block_dim = d1;
  metric.num_blocks = m;
  metric.matrix = Matrix(m * d1, m * d1);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double coeff = (i == j ? eta[i] : 0.0) - eta[i] * eta[j];
      for (std::size_t r = 0; r < d1; ++r) {
        const double cr = coeff * xt[r];
        double* row = metric.matrix.row(i * d1 + r) + j * d1;
        for (std::size_t c = 0; c < d1; ++c) row[c] = cr * xt[c];
      }
    }
  }
  return metric;
}

FullMetric two_layer_rfim(const ActivationKind& kind, const Matrix& first,
                          const Matrix& second, const Vector& x, TwoLayerForm form) {
  const std::size_t hidden = first.cols();
  const std::size_t outputs = second.cols();
  if (first.rows() != x.size() + 1) {
    throw std::invalid_argument("two_layer_rfim: first-layer rows must be input dim + 1");
  }
  if (second.rows() != hidden + 1) {
    throw std::invalid_argument("two_layer_rfim: second-layer rows must be hidden dim + 1");
  }

  const Vector xt = augment(x);
  Vector h(hidden);
  Vector pre_first = matvec_transposed(first, xt);
  for (std::size_t i = 0; i < hidden; ++i) h[i] = eval(kind, pre_first[i]);
  const Vector ht = augment(h);
  const Vector pre_second = matvec_transposed(second, ht);

  Vector nu_first(hidden), nu_second(outputs);
  for (std::size_t i = 0; i < hidden; ++i) {
    nu_first[i] = form == TwoLayerForm::NuProduct ? nu(kind, pre_first[i])
                                                  : deriv(kind, pre_first[i]);
  }
  for (std::size_t l = 0; l < outputs; ++l) nu_second[l] = nu(kind, pre_second[l]);

  const std::size_t d1 = xt.size();
  FullMetric metric;
  metric.block_dim = d1;
  metric.num_blocks = hidden;
  metric.matrix = Matrix(hidden * d1, hidden * d1);
  for (std::size_t i = 0; i < hidden; ++i) {
    for (std::size_t j = 0; j < hidden; ++j) {
      double coeff = 0.0;
      for (std::size_t l = 0; l < outputs; ++l) {
        coeff += second(i, l) * second(j, l) * nu_second[l];
      }
      coeff *= nu_first[i] * nu_first[j];
      for (std::size_t r = 0; r < d1; ++r) {
        const double cr = coeff * xt[r];
        double* row = metric.matrix.row(i * d1 + r) + j * d1;
        for (std::size_t c = 0; c < d1; ++c) row[c] = cr * xt[c];
      }
    }
  }
  return metric;
}

}  // namespace rfim
