#pragma once

#include <cstddef>
#include <vector>

#include "rfim/activations.hpp"
#include "rfim/linalg.hpp"

namespace rfim {

// Layer metric with one (D+1)x(D+1) block per output neuron. The full
// m(D+1)-square matrix is never materialized; outputs are conditionally
// independent so the off-diagonal blocks are zero by construction.
struct BlockDiagMetric {
  std::vector<Matrix> blocks;
  std::size_t input_dim = 0;  // D; blocks are (D+1)x(D+1)

  std::size_t outputs() const { return blocks.size(); }
  std::size_t block_dim() const { return input_dim + 1; }
};

// Dense m(D+1) x m(D+1) metric laid out as an m x m grid of (D+1)-square
// blocks. Used by the softmax and two-layer metrics, which do correlate
// output coordinates.
struct FullMetric {
  Matrix matrix;
  std::size_t block_dim = 0;  // D+1
  std::size_t num_blocks = 0;

  Matrix block(std::size_t i, std::size_t j) const;
};

// nu(kind, wᵀx̃) x̃x̃ᵀ. w carries the bias entry (dim D+1), x does not (dim D).
Matrix neuron_rfim(const ActivationKind& kind, const Vector& w, const Vector& x);

// Mean of neuron_rfim over the batch; rank at most min(batch, D+1).
Matrix batch_neuron_rfim(const ActivationKind& kind, const Vector& w,
                         const std::vector<Vector>& xs);

// m identical blocks (1/sigma²) x̃x̃ᵀ.
BlockDiagMetric linear_layer_rfim(double sigma, const Vector& x, std::size_t outputs);

// Block i is nu(kind, w_iᵀx̃) x̃x̃ᵀ, with w_i = column i of weights ((D+1) x m).
BlockDiagMetric nonlinear_layer_rfim(const ActivationKind& kind, const Matrix& weights,
                                     const Vector& x);

// Block (i,j) is (δ_ij η_i − η_i η_j) x̃x̃ᵀ with η = softmax(weightsᵀ x̃).
FullMetric softmax_rfim(const Matrix& weights, const Vector& x);

// First-layer factors of the two-layer metric:
//   NuProduct       – nu(s_i) nu(s_j), the coefficients as printed; exact for
//                     the Bernoulli families, where nu equals f'.
//   DerivativeBased – f'(s_i) f'(s_j), the chain-rule Fisher, exact for the
//                     Gaussian families as well. The second-layer factor is
//                     nu(u_l) either way.
enum class TwoLayerForm { NuProduct, DerivativeBased };

// Metric of the first-layer weights of h = f(firstᵀ x̃), y ~ around f(secondᵀ h̃),
// with inter-layer correlations ignored; h is augmented before the second layer.
FullMetric two_layer_rfim(const ActivationKind& kind, const Matrix& first,
                          const Matrix& second, const Vector& x,
                          TwoLayerForm form = TwoLayerForm::NuProduct);

// Max-subtracted softmax.
Vector softmax(const Vector& logits);

}  // namespace rfim
