#include "ibp/nets.hpp"
#include <algorithm>

#include <cmath>
#include <stdexcept>

namespace ibp {

Tensor uniform_init(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-bound, bound);
    return t;
}

// --------------------------------------------------------------------------- MLP

MlpParams MlpParams::create(const std::vector<std::size_t>& widths, Rng& rng, Activation hidden) {
    if (widths.size() < 2) throw std::invalid_argument("MlpParams: need at least input and output widths");
    MlpParams p;
    p.hidden = hidden;
    for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
        Layer l;
        l.weight = uniform_init({widths[i + 1], widths[i]}, widths[i], rng);
        l.bias = Tensor::zeros({widths[i + 1]});
        p.layers.push_back(std::move(l));
    }
    return p;
}

std::vector<NamedParam> MlpParams::named_params(const std::string& prefix) {
    std::vector<NamedParam> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        out.push_back({prefix + "/w" + std::to_string(i), &layers[i].weight});
        out.push_back({prefix + "/b" + std::to_string(i), &layers[i].bias});
    }
    return out;
}

BoundMlp bind(Tape& tape, const MlpParams& p) {
    BoundMlp net;
    net.params = &p;
    for (const auto& l : p.layers) {
        net.weights.push_back(make_leaf(tape, l.weight));
        net.biases.push_back(make_leaf(tape, l.bias));
    }
    return net;
}

namespace {
Var activate(Var x, Activation a) {
    switch (a) {
        case Activation::Tanh: return tanh(x);
        case Activation::Relu: return relu(x);
        case Activation::Sigmoid: return sigmoid(x);
    }
    throw std::logic_error("unknown activation");
}
}  // namespace

Var mlp_forward(const BoundMlp& net, Var input) {
    const MlpParams& p = *net.params;
    if (input.value().rank() != 1 || input.value().numel() != p.input_width())
        throw std::invalid_argument("mlp_forward: input width " +
                                    std::to_string(input.value().numel()) + " != expected " +
                                    std::to_string(p.input_width()));
    Var h = input;
    for (std::size_t i = 0; i < net.weights.size(); ++i) {
        h = matmul(net.weights[i], h) + net.biases[i];
        if (i + 1 < net.weights.size()) h = activate(h, p.hidden);
    }
    return h;
}

Var mlp_forward(Tape& tape, const MlpParams& p, Var input) {
    return mlp_forward(bind(tape, p), input);
}

// --------------------------------------------------------------------------- LSTM

RecurrentCellParams RecurrentCellParams::create(std::size_t input, std::size_t hidden, Rng& rng) {
    RecurrentCellParams p;
    p.input = input;
    p.hidden = hidden;
    for (int g = 0; g < 4; ++g) {
        p.w[g] = uniform_init({hidden, input}, input, rng);
        p.u[g] = uniform_init({hidden, hidden}, hidden, rng);
        p.b[g] = g == 1 ? Tensor::full({hidden}, 1.0) : Tensor::zeros({hidden});
    }
    return p;
}

std::vector<NamedParam> RecurrentCellParams::named_params(const std::string& prefix) {
    static const char* gate[4] = {"i", "f", "o", "g"};
    std::vector<NamedParam> out;
    for (int g = 0; g < 4; ++g) {
        out.push_back({prefix + "/w_" + gate[g], &w[g]});
        out.push_back({prefix + "/u_" + gate[g], &u[g]});
        out.push_back({prefix + "/b_" + gate[g], &b[g]});
    }
    return out;
}

BoundRecurrentCell bind(Tape& tape, const RecurrentCellParams& p) {
    BoundRecurrentCell cell;
    cell.params = &p;
    for (int g = 0; g < 4; ++g) {
        cell.w[g] = make_leaf(tape, p.w[g]);
        cell.u[g] = make_leaf(tape, p.u[g]);
        cell.b[g] = make_leaf(tape, p.b[g]);
    }
    return cell;
}

RecurrentState recurrent_zero_state(Tape& tape, std::size_t hidden) {
    return {make_leaf(tape, Tensor::zeros({hidden})), make_leaf(tape, Tensor::zeros({hidden}))};
}

RecurrentState recurrent_step(const BoundRecurrentCell& cell, Var input, RecurrentState state) {
    const RecurrentCellParams& p = *cell.params;
    if (input.value().numel() != p.input)
        throw std::invalid_argument("recurrent_step: input width " +
                                    std::to_string(input.value().numel()) + " != expected " +
                                    std::to_string(p.input));
    if (state.h.value().numel() != p.hidden || state.c.value().numel() != p.hidden)
        throw std::invalid_argument("recurrent_step: state width mismatch");

    auto gate = [&](int g) { return matmul(cell.w[g], input) + matmul(cell.u[g], state.h) + cell.b[g]; };
    Var i = sigmoid(gate(0));
    Var f = sigmoid(gate(1));
    Var o = sigmoid(gate(2));
    Var g = tanh(gate(3));
    Var c_next = f * state.c + i * g;
    Var h_next = o * tanh(c_next);
    return {h_next, c_next};
}

// --------------------------------------------------------------------------- relational model

RelationalModelParams RelationalModelParams::create(std::size_t body_features,
                                                    std::size_t action_features,
                                                    std::size_t effect_width, std::size_t hidden,
                                                    std::size_t delta_width, Rng& rng) {
    RelationalModelParams p;
    p.body_features = body_features;
    p.action_features = action_features;
    p.relation = MlpParams::create({2 * body_features, hidden, hidden, effect_width}, rng);
    p.object = MlpParams::create({body_features + effect_width + action_features, hidden, hidden,
                                  delta_width},
                                 rng);
    p.reward = MlpParams::create({delta_width + action_features, hidden / 2, 1}, rng);
    return p;
}

std::vector<NamedParam> RelationalModelParams::named_params(const std::string& prefix) {
    std::vector<NamedParam> out = relation.named_params(prefix + "/relation");
    auto obj = object.named_params(prefix + "/object");
    auto rew = reward.named_params(prefix + "/reward");
    out.insert(out.end(), obj.begin(), obj.end());
    out.insert(out.end(), rew.begin(), rew.end());
    return out;
}

BoundRelationalModel bind(Tape& tape, const RelationalModelParams& p) {
    BoundRelationalModel net;
    net.params = &p;
    net.relation = bind(tape, p.relation);
    net.object = bind(tape, p.object);
    net.reward = bind(tape, p.reward);
    return net;
}

RelationalPrediction relational_forward(const BoundRelationalModel& net, Var receiver,
                                        std::span<const Var> senders, Var action) {
    const RelationalModelParams& p = *net.params;
    if (receiver.value().numel() != p.body_features)
        throw std::invalid_argument("relational_forward: receiver width " +
                                    std::to_string(receiver.value().numel()) + " != expected " +
                                    std::to_string(p.body_features));
    for (const Var& s : senders)
        if (s.value().numel() != p.body_features)
            throw std::invalid_argument("relational_forward: sender width mismatch");
    if (action.value().numel() != p.action_features)
        throw std::invalid_argument("relational_forward: action width mismatch");
    if (senders.empty()) throw std::invalid_argument("relational_forward: no sender bodies");

    // Sum-aggregation over sender effects makes the output order-invariant.
    // Summing in a canonical order (senders sorted by feature values) makes
    // the invariance exact rather than up to float reassociation.
    std::vector<std::size_t> order(senders.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& va = senders[a].value().values();
        const auto& vb = senders[b].value().values();
        return std::lexicographical_compare(va.begin(), va.end(), vb.begin(), vb.end());
    });
    Var agg{};
    bool first = true;
    for (std::size_t i : order) {
        Var effect = mlp_forward(net.relation, concat({senders[i], receiver}));
        agg = first ? effect : agg + effect;
        first = false;
    }
    Var delta = mlp_forward(net.object, concat({receiver, agg, action}));
    Var reward = mlp_forward(net.reward, concat({delta, action}));
    return {delta, sum(reward)};
}

// --------------------------------------------------------------------------- categorical head

namespace {
CategoricalSample finish_categorical(Var logits, std::size_t index) {
    CategoricalSample s;
    s.log_probs = log_softmax(logits);
    s.probs = exp(s.log_probs);
    s.index = index;
    s.log_prob = sum(slice(s.log_probs, index, 1));
    // H = -sum p log p, with p taken from the stable log-softmax so saturated
    // logits contribute exactly 0 * finite.
    Var neg = make_scalar(*logits.tape, -1.0);
    s.entropy = sum(s.probs * s.log_probs) * neg;
    return s;
}
}  // namespace

CategoricalSample categorical_head(Var logits, Rng& rng) {
    const Tensor& l = logits.value();
    for (std::size_t i = 0; i < l.numel(); ++i)
        if (!std::isfinite(l[i]))
            throw std::invalid_argument("categorical_head: non-finite logit");
    Tape& tape = *logits.tape;
    Var lp = log_softmax(logits);
    std::vector<double> probs(l.numel());
    for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::exp(tape.value(lp.id)[i]);
    std::size_t index = rng.categorical(probs);
    return finish_categorical(logits, index);
}

CategoricalSample categorical_scored(Var logits, std::size_t index) {
    if (index >= logits.value().numel())
        throw std::invalid_argument("categorical_scored: index out of range");
    return finish_categorical(logits, index);
}

}  // namespace ibp
