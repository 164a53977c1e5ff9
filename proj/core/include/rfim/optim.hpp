#pragma once

#include <cstdint>
#include <vector>

#include "rfim/linalg.hpp"
#include "rfim/network.hpp"

namespace rfim {

// ---- momentum SGD (heavy-ball: v <- m v - γ g; θ <- θ + v) ------------------

struct MomentumState {
  std::vector<Matrix> velocity;
  double momentum = 0.0;
  double gamma = 0.1;

  static MomentumState make(const MlpParams& params, double momentum, double gamma);
};

void sgd_step(MlpParams& params, const MlpParams& grads, MomentumState& state);

struct VectorMomentumState {
  Vector velocity;
  double momentum = 0.0;
  double gamma = 0.1;

  static VectorMomentumState make(std::size_t dim, double momentum, double gamma);
};

void sgd_step(Vector& theta, const Vector& grad, VectorMomentumState& state);

// ---- Adam -------------------------------------------------------------------

struct AdamState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double gamma = 1e-3;

  static AdamState make(const MlpParams& params, double gamma);
};

void adam_step(MlpParams& params, const MlpParams& grads, AdamState& state);

// ---- exact natural gradient for the single sigm neuron ----------------------

// θ' = θ − γ (G + εI)⁻¹ ∇L with G the batch metric mean[nu_sigm(θᵀz) z zᵀ]
// and ε from the relative trace rule.
Vector ngd_logistic_step(const Vector& theta, const std::vector<Vector>& zs,
                         const std::vector<int>& labels, double gamma, double eps_rel);

// Batch metric of the logistic model, exposed for the invariance checks.
Matrix logistic_batch_metric(const Vector& theta, const std::vector<Vector>& zs);

// ---- RNGD with EMA per-neuron metrics ---------------------------------------

// Per-layer metric bookkeeping. Hidden layers track one (D+1)-square EMA block
// per output neuron; the input layer and the softmax head share a single
// linear-layer block (unit noise) across their neurons.
struct RngdState {
  struct LayerState {
    bool shared = false;
    std::vector<Matrix> ema;             // size 1 when shared, else one per neuron
    std::vector<CholeskyFactor> cache;   // snapshot factorizations, same layout
  };

  std::vector<LayerState> layers;
  double lambda = 0.995;
  long period = 100;
  double eps_rel = 1e-2;
  long iteration = 0;  // completed EMA updates

  static RngdState make(const MlpSpec& spec, double lambda, long period, double eps_rel);
};

// G_l <- λ G_l + (1-λ)(B_l + ε I), B_l the fresh batch term and ε the relative
// rule applied to B_l. Uses the batch inputs and pre-activations cached on the
// trace; bumps the iteration counter.
void rngd_ema_update(RngdState& state, const MlpSpec& spec, const ForwardTrace& trace);

// Refactorizes every tracked metric; between refreshes the stale snapshot is
// used unchanged. Call when state.iteration ≡ 0 (mod period).
void rngd_refresh(RngdState& state);

// Per neuron: w <- w − γ solve(cached G, grad column).
void rngd_step(MlpParams& params, const MlpParams& grads, const RngdState& state, double gamma);

}  // namespace rfim
