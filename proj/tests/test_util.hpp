#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ibp/rng.hpp"
#include "ibp/tape.hpp"
#include "ibp/tensor.hpp"

namespace ibp::test {

// Central-difference oracle: independent of the tape's backward pass.
// Perturbs one leaf element at a time and rebuilds the graph through `f`.
struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst;
};

// f: given leaf Vars already on the tape (one per input tensor, in order),
// build a graph and return the scalar loss Var.
inline GradCheckResult grad_check(
    const std::function<Var(Tape&, const std::vector<Var>&)>& f, std::vector<Tensor> leaves,
    double step = 1e-5) {
    auto run = [&](const std::vector<Tensor>& ls) {
        Tape tape;
        std::vector<Var> vars;
        vars.reserve(ls.size());
        for (const Tensor& t : ls) vars.push_back(make_leaf(tape, t));
        return f(tape, vars).item();
    };

    std::vector<NodeId> leaf_ids;
    Tape tape;
    Var loss{};
    {
        std::vector<Var> vars;
        for (const Tensor& t : leaves) vars.push_back(make_leaf(tape, t));
        for (const Var& v : vars) leaf_ids.push_back(v.id);
        loss = f(tape, vars);
    }
    Gradients grads = tape.backward(loss.id);

    GradCheckResult res;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        for (std::size_t j = 0; j < leaves[li].numel(); ++j) {
            double orig = leaves[li][j];
            leaves[li][j] = orig + step;
            double up = run(leaves);
            leaves[li][j] = orig - step;
            double down = run(leaves);
            leaves[li][j] = orig;

            double fd = (up - down) / (2.0 * step);
            double an = grads.at(leaf_ids[li])[j];
            double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            double rel = std::abs(fd - an) / denom;
            if (rel > res.max_rel_error) {
                res.max_rel_error = rel;
                res.worst = "leaf " + std::to_string(li) + "[" + std::to_string(j) +
                            "]: fd=" + std::to_string(fd) + " an=" + std::to_string(an);
            }
        }
    }
    return res;
}

inline Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                            double hi = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// Random values bounded away from zero, for kinked or singular ops.
inline Tensor random_tensor_away_from(std::vector<std::size_t> shape, Rng& rng, double margin) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.numel(); ++i) {
        double v = rng.uniform(margin, 1.0);
        t[i] = rng.uniform() < 0.5 ? v : -v;
    }
    return t;
}

}  // namespace ibp::test
