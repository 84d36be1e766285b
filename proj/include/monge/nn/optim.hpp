#pragma once

#include "monge/error.hpp"
#include "monge/nn/network.hpp"

#include <cmath>
#include <cstdint>

namespace monge::nn {

struct AdamState {
  std::int64_t step = 0;
  Vector first_moment;
  Vector second_moment;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;

  static AdamState for_params(const ParamVector& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
                              double eps = 1e-8, double weight_decay = 0.0) {
    AdamState s;
    s.first_moment = Vector::Zero(params.size());
    s.second_moment = Vector::Zero(params.size());
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.weight_decay = weight_decay;
    return s;
  }
};

/// Bias-corrected Adam with decoupled weight decay (applied to the parameters).
inline void adam_step(ParamVector& params, const ParamVector& grads, AdamState& state) {
  require(grads.size() == params.size() && state.first_moment.size() == params.size() &&
              state.second_moment.size() == params.size(),
          ErrorCode::kDimensionMismatch, "adam: parameter, gradient and moment lengths differ");
  require(grads.allFinite(), ErrorCode::kNonFinite, "adam: non-finite gradient entry");
  ++state.step;
  const double t = static_cast<double>(state.step);
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  if (state.weight_decay != 0.0) params *= (1.0 - state.lr * state.weight_decay);
  params.array() -=
      state.lr * (state.first_moment.array() / c1) / ((state.second_moment.array() / c2).sqrt() + state.eps);
}

struct EmaState {
  Vector shadow;
  double decay = 0.999;
};

inline void ema_update(EmaState& state, const ParamVector& params) {
  require(state.shadow.size() == params.size(), ErrorCode::kDimensionMismatch, "ema: shadow length mismatch");
  state.shadow = state.decay * state.shadow + (1.0 - state.decay) * params;
}

}  // namespace monge::nn
