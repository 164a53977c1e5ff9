#pragma once

#include <cstdint>
#include <vector>

#include "rfim/activations.hpp"
#include "rfim/linalg.hpp"

namespace rfim {

enum class Head { SoftmaxCrossEntropy, SigmoidBernoulli };

struct MlpSpec {
  std::vector<std::size_t> layer_sizes;  // e.g. {784, 32, 32, 10}
  ActivationKind hidden = ActivationKind::relu_smooth();
  Head head = Head::SoftmaxCrossEntropy;

  std::size_t layers() const { return layer_sizes.size() - 1; }
  std::size_t inputs() const { return layer_sizes.front(); }
  std::size_t outputs() const { return layer_sizes.back(); }
  void validate() const;
};

// One weight matrix per layer, (D_{l-1}+1) x D_l with the bias as the last row.
struct MlpParams {
  std::vector<Matrix> weights;
};

MlpParams zero_params(const MlpSpec& spec);
MlpParams init_params(const MlpSpec& spec, std::uint64_t seed);

struct ForwardTrace {
  Matrix inputs;                        // batch, one sample per row
  std::vector<Matrix> pre_activations;  // per layer: n x D_l
  std::vector<Matrix> activations;      // per layer: n x D_l (head layer: probabilities)
  std::size_t batch = 0;
  std::size_t clamp_events = 0;  // incremented by the loss when a log is clamped

  const Matrix& probabilities() const { return activations.back(); }
};

ForwardTrace forward(const MlpSpec& spec, const MlpParams& params,
                     const std::vector<Vector>& batch);

// Mean over the batch of -ln p(label). Probabilities below 1e-12 are clamped
// and the event is counted on the trace.
double loss_cross_entropy(const MlpSpec& spec, ForwardTrace& trace,
                          const std::vector<int>& labels);

// Exact gradient of loss_cross_entropy wrt every weight matrix.
MlpParams backward(const MlpSpec& spec, const MlpParams& params, const ForwardTrace& trace,
                   const std::vector<int>& labels);

double classification_error(const MlpSpec& spec, const MlpParams& params,
                            const std::vector<Vector>& xs, const std::vector<int>& labels);

// ---- single sigm neuron on ready-made feature vectors ----------------------
// zs already carry their constant coordinate (whitening appends it).

double logistic_loss(const Vector& theta, const std::vector<Vector>& zs,
                     const std::vector<int>& labels);
Vector logistic_gradient(const Vector& theta, const std::vector<Vector>& zs,
                         const std::vector<int>& labels);
double logistic_error(const Vector& theta, const std::vector<Vector>& zs,
                      const std::vector<int>& labels);

}  // namespace rfim
