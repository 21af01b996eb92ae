#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ibp/rng.hpp"
#include "ibp/tape.hpp"
#include "ibp/tensor.hpp"

namespace ibp {

enum class Activation : std::uint8_t { Tanh, Relu, Sigmoid };

/// Name/tensor pair used by optimizers and checkpoints. The pointer refers
/// into the owning parameter struct, which must outlive the view.
struct NamedParam {
    std::string name;
    Tensor* tensor;
};

// ---------------------------------------------------------------------------
// Multi-layer perceptron: hidden layers with a fixed nonlinearity, linear
// output layer.

struct MlpParams {
    struct Layer {
        Tensor weight;  // [out, in]
        Tensor bias;    // [out]
    };
    std::vector<Layer> layers;
    Activation hidden = Activation::Tanh;

    static MlpParams create(const std::vector<std::size_t>& widths, Rng& rng,
                            Activation hidden = Activation::Tanh);
    std::size_t input_width() const { return layers.front().weight.cols(); }
    std::size_t output_width() const { return layers.back().weight.rows(); }
    std::vector<NamedParam> named_params(const std::string& prefix);
};

struct BoundMlp {
    const MlpParams* params = nullptr;
    std::vector<Var> weights;
    std::vector<Var> biases;
};

BoundMlp bind(Tape& tape, const MlpParams& p);
Var mlp_forward(const BoundMlp& net, Var input);

/// Convenience for code that does not reuse the parameters on the tape.
Var mlp_forward(Tape& tape, const MlpParams& p, Var input);

// ---------------------------------------------------------------------------
// LSTM cell. Four gates with separate input/recurrent weights; forget-gate
// bias starts at 1.0.

struct RecurrentCellParams {
    // Gate order: input, forget, output, candidate.
    Tensor w[4];  // [hidden, in]
    Tensor u[4];  // [hidden, hidden]
    Tensor b[4];  // [hidden]
    std::size_t hidden = 0;
    std::size_t input = 0;

    static RecurrentCellParams create(std::size_t input, std::size_t hidden, Rng& rng);
    std::vector<NamedParam> named_params(const std::string& prefix);
};

struct BoundRecurrentCell {
    const RecurrentCellParams* params = nullptr;
    Var w[4], u[4], b[4];
};

struct RecurrentState {
    Var h;
    Var c;
};

BoundRecurrentCell bind(Tape& tape, const RecurrentCellParams& p);
RecurrentState recurrent_zero_state(Tape& tape, std::size_t hidden);

/// One gated update; the cell's output is the new hidden vector.
RecurrentState recurrent_step(const BoundRecurrentCell& cell, Var input, RecurrentState state);

// ---------------------------------------------------------------------------
// Relational dynamics model over a fully connected scene graph. Effects from
// every sender body are summed at the receiver, which forces the output to be
// invariant under any permutation of interchangeable senders. Only the ship
// is dynamic here, so the forward pass evaluates relations into the ship and
// predicts its state delta plus a scalar reward.

struct RelationalModelParams {
    MlpParams relation;  // [sender features + receiver features] -> effect
    MlpParams object;    // [receiver features + summed effects + action] -> state delta
    MlpParams reward;    // [state delta + action] -> scalar
    std::size_t body_features = 0;
    std::size_t action_features = 0;

    static RelationalModelParams create(std::size_t body_features, std::size_t action_features,
                                        std::size_t effect_width, std::size_t hidden,
                                        std::size_t delta_width, Rng& rng);
    std::vector<NamedParam> named_params(const std::string& prefix);
};

struct BoundRelationalModel {
    const RelationalModelParams* params = nullptr;
    BoundMlp relation;
    BoundMlp object;
    BoundMlp reward;
};

BoundRelationalModel bind(Tape& tape, const RelationalModelParams& p);

struct RelationalPrediction {
    Var delta;   // receiver state delta
    Var reward;  // scalar
};

/// `receiver` is the dynamic body's feature vector; `senders` the static
/// bodies'. Throws if any body width disagrees with the parameters.
RelationalPrediction relational_forward(const BoundRelationalModel& net, Var receiver,
                                        std::span<const Var> senders, Var action);

// ---------------------------------------------------------------------------
// Stochastic categorical head over logits.

struct CategoricalSample {
    Var probs;
    Var log_probs;
    std::size_t index = 0;
    Var log_prob;  // of the sampled index, differentiable w.r.t. logits
    Var entropy;   // differentiable w.r.t. logits
};

CategoricalSample categorical_head(Var logits, Rng& rng);

/// Same distribution quantities with the choice pinned from outside (used
/// when replaying recorded decisions).
CategoricalSample categorical_scored(Var logits, std::size_t index);

// ---------------------------------------------------------------------------

/// Uniform init in +-1/sqrt(fan_in).
Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng);

}  // namespace ibp
