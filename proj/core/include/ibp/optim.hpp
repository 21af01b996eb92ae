#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ibp/tensor.hpp"

namespace ibp {

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Per-parameter first/second moment estimates plus the shared step counter.
/// Moment tensors mirror the parameter shapes; the counter advances by one
/// per update.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t step = 0;

    static AdamState for_params(std::span<const Tensor* const> params);
    static AdamState for_params(std::span<const Tensor> params);
};

/// Scales all gradients by max_norm / ||g||_2 when the global L2 norm over
/// the whole list exceeds max_norm. Zero-norm lists pass through untouched.
double clip_global_norm(std::span<Tensor> grads, double max_norm);

double global_norm(std::span<const Tensor> grads);

/// Standard Adam update with bias correction, in place.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace ibp
