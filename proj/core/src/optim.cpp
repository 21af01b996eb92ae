#include "ibp/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace ibp {

AdamState AdamState::for_params(std::span<const Tensor* const> params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor* p : params) {
        s.m.push_back(Tensor::zeros(p->shape()));
        s.v.push_back(Tensor::zeros(p->shape()));
    }
    return s;
}

AdamState AdamState::for_params(std::span<const Tensor> params) {
    AdamState s;
    s.m.reserve(params.size());
    s.v.reserve(params.size());
    for (const Tensor& p : params) {
        s.m.push_back(Tensor::zeros(p.shape()));
        s.v.push_back(Tensor::zeros(p.shape()));
    }
    return s;
}

double global_norm(std::span<const Tensor> grads) {
    double sq = 0.0;
    for (const Tensor& g : grads)
        for (std::size_t i = 0; i < g.numel(); ++i) sq += g[i] * g[i];
    return std::sqrt(sq);
}

double clip_global_norm(std::span<Tensor> grads, double max_norm) {
    if (max_norm <= 0.0) throw std::invalid_argument("clip_global_norm: max_norm must be positive");
    double norm = global_norm(grads);
    if (norm <= max_norm || norm == 0.0) return norm;
    double scale = max_norm / norm;
    for (Tensor& g : grads)
        for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= scale;
    return norm;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw std::invalid_argument("adam_step: parameter/gradient/state counts differ");
    for (std::size_t i = 0; i < params.size(); ++i)
        if (!params[i]->same_shape(grads[i]) || !params[i]->same_shape(state.m[i]))
            throw std::invalid_argument("adam_step: shape mismatch at parameter " +
                                        std::to_string(i) + ": param " + params[i]->shape_string() +
                                        ", grad " + grads[i].shape_string());

    state.step += 1;
    double b1t = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    double b2t = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = grads[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t j = 0; j < p.numel(); ++j) {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            double mhat = m[j] / b1t;
            double vhat = v[j] / b2t;
            p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
        }
    }
}

}  // namespace ibp
