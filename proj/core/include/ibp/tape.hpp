#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ibp/tensor.hpp"

namespace ibp {

using NodeId = std::uint32_t;

enum class Op : std::uint8_t {
    Leaf,
    Add,
    Sub,
    Mul,        // elementwise; either side may be scalar-shaped
    Matmul,
    Concat,     // 1-d operands
    Slice,      // 1-d, attr {i0=start, i1=len}
    Tanh,
    Sigmoid,
    Relu,
    Exp,
    Log,
    Sqrt,
    Sum,        // -> scalar
    Mean,       // -> scalar
    Square,
    Softmax,    // 1-d
    LogSoftmax, // 1-d
    GatherRow,  // 2-d, attr {i0=row} -> 1-d
    Conv2d,     // attr {i0=H, i1=W, i2=in_ch, i3=out_ch, i4=ksize}; same padding, stride 1
};

const char* op_name(Op op);

/// Integer attributes for ops that need them (slice bounds, gather row,
/// conv geometry). Unused fields stay zero.
struct OpAttr {
    std::int64_t i0 = 0;
    std::int64_t i1 = 0;
    std::int64_t i2 = 0;
    std::int64_t i3 = 0;
    std::int64_t i4 = 0;
};

/// Gradients of one scalar loss with respect to every node on a tape.
/// Nodes unreached by the loss hold zero tensors of the node's shape.
class Gradients {
public:
    explicit Gradients(std::size_t n) : grads_(n), present_(n, false) {}

    const Tensor& at(NodeId id) const { return grads_[id]; }
    Tensor& slot(NodeId id) { return grads_[id]; }
    bool present(NodeId id) const { return present_[id]; }
    void mark(NodeId id) { present_[id] = true; }
    std::size_t size() const { return grads_.size(); }

private:
    std::vector<Tensor> grads_;
    std::vector<bool> present_;
};

/// Define-by-run reverse-mode tape. Every forward op records its inputs and
/// output value; the graph is rebuilt per rollout because route choices make
/// it dynamic. Node inputs always reference earlier nodes, so the node order
/// is a topological order by construction.
class Tape {
public:
    struct Node {
        Op op = Op::Leaf;
        OpAttr attr;
        std::vector<NodeId> inputs;
        Tensor value;
    };

    NodeId leaf(Tensor value);
    NodeId apply(Op op, std::span<const NodeId> inputs, OpAttr attr = {});
    NodeId apply(Op op, std::initializer_list<NodeId> inputs, OpAttr attr = {}) {
        return apply(op, std::span<const NodeId>(inputs.begin(), inputs.size()), attr);
    }

    const Tensor& value(NodeId id) const { return nodes_[id].value; }
    const Node& node(NodeId id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }

    /// Reverse-mode sweep from a scalar-shaped loss node. Accumulation is
    /// ordered and sequential so equal seeds give bit-equal gradients.
    Gradients backward(NodeId loss) const;

    /// Recomputes every non-leaf node from the recorded leaves and checks the
    /// results against the recorded values bit-for-bit.
    bool replay_matches() const;

    void reserve(std::size_t n) { nodes_.reserve(n); }

private:
    static Tensor eval(Op op, const OpAttr& attr, std::span<const Tensor* const> inputs);
    std::vector<Node> nodes_;
};

/// Handle pairing a tape with one of its nodes; the unit the network code
/// composes with. Copy is cheap, value lives on the tape.
struct Var {
    Tape* tape = nullptr;
    NodeId id = 0;

    const Tensor& value() const { return tape->value(id); }
    double item() const { return value().item(); }
};

Var make_leaf(Tape& tape, Tensor value);
Var make_scalar(Tape& tape, double v);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);
Var operator*(Var a, Var b);
Var matmul(Var a, Var b);
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var slice(Var x, std::size_t start, std::size_t len);
Var tanh(Var x);
Var sigmoid(Var x);
Var relu(Var x);
Var exp(Var x);
Var log(Var x);
Var sqrt(Var x);
Var sum(Var x);
Var mean(Var x);
Var square(Var x);
Var softmax(Var x);
Var log_softmax(Var x);
Var gather_row(Var m, std::size_t row);
Var conv2d(Var x, Var w, Var b, std::size_t h, std::size_t wd, std::size_t in_ch,
           std::size_t out_ch, std::size_t ksize);

}  // namespace ibp
