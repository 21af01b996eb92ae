#include "ibp/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ibp {

namespace {

[[noreturn]] void shape_error(Op op, const std::string& detail) {
    throw std::invalid_argument(std::string(op_name(op)) + ": " + detail);
}

void require(bool cond, Op op, const std::string& detail) {
    if (!cond) shape_error(op, detail);
}

bool scalar_like(const Tensor& t) { return t.numel() == 1; }

double stable_max(const Tensor& t) {
    double m = t[0];
    for (std::size_t i = 1; i < t.numel(); ++i) m = std::max(m, t[i]);
    return m;
}

}  // namespace

const char* op_name(Op op) {
    switch (op) {
        case Op::Leaf: return "leaf";
        case Op::Add: return "add";
        case Op::Sub: return "subtract";
        case Op::Mul: return "multiply";
        case Op::Matmul: return "matmul";
        case Op::Concat: return "concat";
        case Op::Slice: return "slice";
        case Op::Tanh: return "tanh";
        case Op::Sigmoid: return "sigmoid";
        case Op::Relu: return "relu";
        case Op::Exp: return "exp";
        case Op::Log: return "log";
        case Op::Sqrt: return "sqrt";
        case Op::Sum: return "sum";
        case Op::Mean: return "mean";
        case Op::Square: return "square";
        case Op::Softmax: return "softmax";
        case Op::LogSoftmax: return "log_softmax";
        case Op::GatherRow: return "gather_row";
        case Op::Conv2d: return "conv2d";
    }
    return "?";
}

NodeId Tape::leaf(Tensor value) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::apply(Op op, std::span<const NodeId> inputs, OpAttr attr) {
    if (op == Op::Leaf) throw std::invalid_argument("Tape::apply: use leaf() for leaf nodes");
    std::vector<const Tensor*> vals;
    vals.reserve(inputs.size());
    for (NodeId id : inputs) {
        if (id >= nodes_.size())
            throw std::invalid_argument("Tape::apply: input node id out of range");
        vals.push_back(&nodes_[id].value);
    }
    Node n;
    n.op = op;
    n.attr = attr;
    n.inputs.assign(inputs.begin(), inputs.end());
    n.value = eval(op, attr, vals);
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor Tape::eval(Op op, const OpAttr& attr, std::span<const Tensor* const> in) {
    auto unary = [&](auto f) {
        const Tensor& x = *in[0];
        Tensor out = x;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] = f(out[i]);
        return out;
    };

    switch (op) {
        case Op::Leaf:
            break;

        case Op::Add:
        case Op::Sub:
        case Op::Mul: {
            require(in.size() == 2, op, "expects 2 inputs");
            const Tensor& a = *in[0];
            const Tensor& b = *in[1];
            auto combine = [&](double x, double y) {
                switch (op) {
                    case Op::Add: return x + y;
                    case Op::Sub: return x - y;
                    default: return x * y;
                }
            };
            if (a.same_shape(b)) {
                Tensor out = a;
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] = combine(a[i], b[i]);
                return out;
            }
            if (scalar_like(b)) {
                Tensor out = a;
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] = combine(a[i], b[0]);
                return out;
            }
            if (scalar_like(a)) {
                Tensor out = b;
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] = combine(a[0], b[i]);
                return out;
            }
            shape_error(op, "shape mismatch " + a.shape_string() + " vs " + b.shape_string());
        }

        case Op::Matmul: {
            require(in.size() == 2, op, "expects 2 inputs");
            const Tensor& a = *in[0];
            const Tensor& b = *in[1];
            if (a.rank() == 2 && b.rank() == 2) {
                require(a.cols() == b.rows(), op,
                        "inner dimensions differ: " + a.shape_string() + " vs " + b.shape_string());
                Tensor out = Tensor::zeros({a.rows(), b.cols()});
                for (std::size_t i = 0; i < a.rows(); ++i)
                    for (std::size_t k = 0; k < a.cols(); ++k) {
                        double aik = a.at(i, k);
                        for (std::size_t j = 0; j < b.cols(); ++j) out.at(i, j) += aik * b.at(k, j);
                    }
                return out;
            }
            if (a.rank() == 2 && b.rank() == 1) {
                require(a.cols() == b.numel(), op,
                        "matrix-vector mismatch: " + a.shape_string() + " vs " + b.shape_string());
                Tensor out = Tensor::zeros({a.rows()});
                for (std::size_t i = 0; i < a.rows(); ++i) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < a.cols(); ++k) acc += a.at(i, k) * b[k];
                    out[i] = acc;
                }
                return out;
            }
            if (a.rank() == 1 && b.rank() == 2) {
                require(a.numel() == b.rows(), op,
                        "vector-matrix mismatch: " + a.shape_string() + " vs " + b.shape_string());
                Tensor out = Tensor::zeros({b.cols()});
                for (std::size_t k = 0; k < b.rows(); ++k) {
                    double ak = a[k];
                    for (std::size_t j = 0; j < b.cols(); ++j) out[j] += ak * b.at(k, j);
                }
                return out;
            }
            shape_error(op, "unsupported ranks " + a.shape_string() + " x " + b.shape_string());
        }

        case Op::Concat: {
            require(!in.empty(), op, "expects at least 1 input");
            std::size_t total = 0;
            for (const Tensor* t : in) {
                require(t->rank() == 1, op, "operands must be 1-d, got " + t->shape_string());
                total += t->numel();
            }
            Tensor out = Tensor::zeros({total});
            std::size_t at = 0;
            for (const Tensor* t : in)
                for (std::size_t i = 0; i < t->numel(); ++i) out[at++] = (*t)[i];
            return out;
        }

        case Op::Slice: {
            require(in.size() == 1, op, "expects 1 input");
            const Tensor& x = *in[0];
            require(x.rank() == 1, op, "operand must be 1-d, got " + x.shape_string());
            auto start = static_cast<std::size_t>(attr.i0);
            auto len = static_cast<std::size_t>(attr.i1);
            require(start + len <= x.numel(), op,
                    "range [" + std::to_string(start) + "," + std::to_string(start + len) +
                        ") out of bounds for " + x.shape_string());
            Tensor out = Tensor::zeros({len});
            for (std::size_t i = 0; i < len; ++i) out[i] = x[start + i];
            return out;
        }

        case Op::Tanh: return unary([](double v) { return std::tanh(v); });
        case Op::Sigmoid: return unary([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        case Op::Relu: return unary([](double v) { return v > 0.0 ? v : 0.0; });
        case Op::Exp: return unary([](double v) { return std::exp(v); });
        case Op::Log: return unary([](double v) { return std::log(v); });
        case Op::Sqrt: return unary([](double v) { return std::sqrt(v); });
        case Op::Square: return unary([](double v) { return v * v; });

        case Op::Sum:
        case Op::Mean: {
            require(in.size() == 1, op, "expects 1 input");
            const Tensor& x = *in[0];
            double acc = 0.0;
            for (std::size_t i = 0; i < x.numel(); ++i) acc += x[i];
            if (op == Op::Mean) acc /= static_cast<double>(x.numel());
            return Tensor::scalar(acc);
        }

        case Op::Softmax:
        case Op::LogSoftmax: {
            require(in.size() == 1, op, "expects 1 input");
            const Tensor& x = *in[0];
            require(x.rank() == 1 && x.numel() > 0, op, "operand must be non-empty 1-d");
            double m = stable_max(x);
            double z = 0.0;
            for (std::size_t i = 0; i < x.numel(); ++i) z += std::exp(x[i] - m);
            Tensor out = x;
            if (op == Op::Softmax) {
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] = std::exp(x[i] - m) / z;
            } else {
                double lz = std::log(z);
                for (std::size_t i = 0; i < out.numel(); ++i) out[i] = x[i] - m - lz;
            }
            return out;
        }

        case Op::GatherRow: {
            require(in.size() == 1, op, "expects 1 input");
            const Tensor& x = *in[0];
            require(x.rank() == 2, op, "operand must be 2-d, got " + x.shape_string());
            auto row = static_cast<std::size_t>(attr.i0);
            require(row < x.rows(), op, "row " + std::to_string(row) + " out of bounds for " + x.shape_string());
            Tensor out = Tensor::zeros({x.cols()});
            for (std::size_t j = 0; j < x.cols(); ++j) out[j] = x.at(row, j);
            return out;
        }

        case Op::Conv2d: {
            require(in.size() == 3, op, "expects input, weight, bias");
            const Tensor& x = *in[0];
            const Tensor& w = *in[1];
            const Tensor& b = *in[2];
            auto h = static_cast<std::size_t>(attr.i0);
            auto wd = static_cast<std::size_t>(attr.i1);
            auto ic = static_cast<std::size_t>(attr.i2);
            auto oc = static_cast<std::size_t>(attr.i3);
            auto k = static_cast<std::size_t>(attr.i4);
            require(k % 2 == 1, op, "kernel size must be odd");
            require(x.numel() == ic * h * wd, op, "input numel " + std::to_string(x.numel()) +
                                                      " != in_ch*H*W");
            require(w.rank() == 2 && w.rows() == oc && w.cols() == ic * k * k, op,
                    "weight must be [out_ch, in_ch*k*k], got " + w.shape_string());
            require(b.numel() == oc, op, "bias must have out_ch elements");
            std::size_t pad = k / 2;
            Tensor out = Tensor::zeros({oc * h * wd});
            for (std::size_t o = 0; o < oc; ++o)
                for (std::size_t y = 0; y < h; ++y)
                    for (std::size_t xx = 0; xx < wd; ++xx) {
                        double acc = b[o];
                        for (std::size_t c = 0; c < ic; ++c)
                            for (std::size_t ky = 0; ky < k; ++ky)
                                for (std::size_t kx = 0; kx < k; ++kx) {
                                    std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) -
                                                        static_cast<std::ptrdiff_t>(pad);
                                    std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xx + kx) -
                                                        static_cast<std::ptrdiff_t>(pad);
                                    if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(h) ||
                                        sx >= static_cast<std::ptrdiff_t>(wd))
                                        continue;
                                    acc += x[(c * h + static_cast<std::size_t>(sy)) * wd +
                                             static_cast<std::size_t>(sx)] *
                                           w.at(o, (c * k + ky) * k + kx);
                                }
                        out[(o * h + y) * wd + xx] = acc;
                    }
            return out;
        }
    }
    throw std::logic_error("Tape::eval: unhandled op");
}

Gradients Tape::backward(NodeId loss) const {
    if (loss >= nodes_.size()) throw std::invalid_argument("backward: loss node id out of range");
    if (!nodes_[loss].value.is_scalar())
        throw std::invalid_argument("backward: loss must be scalar-shaped, got " +
                                    nodes_[loss].value.shape_string());

    Gradients grads(nodes_.size());
    auto slot = [&](NodeId id) -> Tensor& {
        if (!grads.present(id)) {
            grads.slot(id) = Tensor::zeros(nodes_[id].value.shape());
            grads.mark(id);
        }
        return grads.slot(id);
    };

    slot(loss)[0] = 1.0;

    for (NodeId id = loss + 1; id-- > 0;) {
        const Node& n = nodes_[id];
        if (n.op == Op::Leaf || !grads.present(id)) continue;
        const Tensor& g = grads.at(id);
        const Tensor& out = n.value;

        auto in_val = [&](std::size_t i) -> const Tensor& { return nodes_[n.inputs[i]].value; };
        auto in_grad = [&](std::size_t i) -> Tensor& { return slot(n.inputs[i]); };

        // Reduces elementwise gradient `ge` onto input i, summing when that
        // input was broadcast from a scalar.
        auto accumulate_bcast = [&](std::size_t i, auto ge) {
            Tensor& dst = in_grad(i);
            if (dst.numel() == g.numel()) {
                for (std::size_t j = 0; j < dst.numel(); ++j) dst[j] += ge(j);
            } else {
                double acc = 0.0;
                for (std::size_t j = 0; j < g.numel(); ++j) acc += ge(j);
                dst[0] += acc;
            }
        };

        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::Add:
                accumulate_bcast(0, [&](std::size_t j) { return g[j]; });
                accumulate_bcast(1, [&](std::size_t j) { return g[j]; });
                break;
            case Op::Sub:
                accumulate_bcast(0, [&](std::size_t j) { return g[j]; });
                accumulate_bcast(1, [&](std::size_t j) { return -g[j]; });
                break;
            case Op::Mul: {
                const Tensor& a = in_val(0);
                const Tensor& b = in_val(1);
                auto pick = [](const Tensor& t, std::size_t j) { return t.numel() == 1 ? t[0] : t[j]; };
                accumulate_bcast(0, [&](std::size_t j) { return g[j] * pick(b, j); });
                accumulate_bcast(1, [&](std::size_t j) { return g[j] * pick(a, j); });
                break;
            }
            case Op::Matmul: {
                const Tensor& a = in_val(0);
                const Tensor& b = in_val(1);
                Tensor& da = in_grad(0);
                Tensor& db = in_grad(1);
                if (a.rank() == 2 && b.rank() == 2) {
                    for (std::size_t i = 0; i < a.rows(); ++i)
                        for (std::size_t k = 0; k < a.cols(); ++k) {
                            double acc = 0.0;
                            for (std::size_t j = 0; j < b.cols(); ++j) acc += g.at(i, j) * b.at(k, j);
                            da.at(i, k) += acc;
                        }
                    for (std::size_t k = 0; k < b.rows(); ++k)
                        for (std::size_t j = 0; j < b.cols(); ++j) {
                            double acc = 0.0;
                            for (std::size_t i = 0; i < a.rows(); ++i) acc += a.at(i, k) * g.at(i, j);
                            db.at(k, j) += acc;
                        }
                } else if (a.rank() == 2 && b.rank() == 1) {
                    for (std::size_t i = 0; i < a.rows(); ++i)
                        for (std::size_t k = 0; k < a.cols(); ++k) da.at(i, k) += g[i] * b[k];
                    for (std::size_t k = 0; k < a.cols(); ++k) {
                        double acc = 0.0;
                        for (std::size_t i = 0; i < a.rows(); ++i) acc += a.at(i, k) * g[i];
                        db[k] += acc;
                    }
                } else {  // 1-d x 2-d
                    for (std::size_t k = 0; k < b.rows(); ++k) {
                        double acc = 0.0;
                        for (std::size_t j = 0; j < b.cols(); ++j) acc += b.at(k, j) * g[j];
                        da[k] += acc;
                    }
                    for (std::size_t k = 0; k < b.rows(); ++k)
                        for (std::size_t j = 0; j < b.cols(); ++j) db.at(k, j) += a[k] * g[j];
                }
                break;
            }
            case Op::Concat: {
                std::size_t at = 0;
                for (std::size_t i = 0; i < n.inputs.size(); ++i) {
                    Tensor& d = in_grad(i);
                    for (std::size_t j = 0; j < d.numel(); ++j) d[j] += g[at++];
                }
                break;
            }
            case Op::Slice: {
                Tensor& d = in_grad(0);
                auto start = static_cast<std::size_t>(n.attr.i0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[start + j] += g[j];
                break;
            }
            case Op::Tanh: {
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] * (1.0 - out[j] * out[j]);
                break;
            }
            case Op::Sigmoid: {
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] * out[j] * (1.0 - out[j]);
                break;
            }
            case Op::Relu: {
                const Tensor& x = in_val(0);
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += x[j] > 0.0 ? g[j] : 0.0;
                break;
            }
            case Op::Exp: {
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] * out[j];
                break;
            }
            case Op::Log: {
                const Tensor& x = in_val(0);
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] / x[j];
                break;
            }
            case Op::Sqrt: {
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] * 0.5 / out[j];
                break;
            }
            case Op::Sum: {
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < d.numel(); ++j) d[j] += g[0];
                break;
            }
            case Op::Mean: {
                Tensor& d = in_grad(0);
                double s = g[0] / static_cast<double>(d.numel());
                for (std::size_t j = 0; j < d.numel(); ++j) d[j] += s;
                break;
            }
            case Op::Square: {
                const Tensor& x = in_val(0);
                Tensor& d = in_grad(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] * 2.0 * x[j];
                break;
            }
            case Op::Softmax: {
                Tensor& d = in_grad(0);
                double dot = 0.0;
                for (std::size_t j = 0; j < g.numel(); ++j) dot += g[j] * out[j];
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += out[j] * (g[j] - dot);
                break;
            }
            case Op::LogSoftmax: {
                Tensor& d = in_grad(0);
                double gsum = 0.0;
                for (std::size_t j = 0; j < g.numel(); ++j) gsum += g[j];
                for (std::size_t j = 0; j < g.numel(); ++j) d[j] += g[j] - std::exp(out[j]) * gsum;
                break;
            }
            case Op::GatherRow: {
                Tensor& d = in_grad(0);
                auto row = static_cast<std::size_t>(n.attr.i0);
                const Tensor& x = in_val(0);
                for (std::size_t j = 0; j < g.numel(); ++j) d[row * x.cols() + j] += g[j];
                break;
            }
            case Op::Conv2d: {
                const Tensor& x = in_val(0);
                const Tensor& w = in_val(1);
                Tensor& dx = in_grad(0);
                Tensor& dw = in_grad(1);
                Tensor& db = in_grad(2);
                auto h = static_cast<std::size_t>(n.attr.i0);
                auto wd = static_cast<std::size_t>(n.attr.i1);
                auto ic = static_cast<std::size_t>(n.attr.i2);
                auto oc = static_cast<std::size_t>(n.attr.i3);
                auto k = static_cast<std::size_t>(n.attr.i4);
                std::size_t pad = k / 2;
                for (std::size_t o = 0; o < oc; ++o)
                    for (std::size_t y = 0; y < h; ++y)
                        for (std::size_t xx = 0; xx < wd; ++xx) {
                            double go = g[(o * h + y) * wd + xx];
                            if (go == 0.0) continue;
                            db[o] += go;
                            for (std::size_t c = 0; c < ic; ++c)
                                for (std::size_t ky = 0; ky < k; ++ky)
                                    for (std::size_t kx = 0; kx < k; ++kx) {
                                        std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) -
                                                            static_cast<std::ptrdiff_t>(pad);
                                        std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(xx + kx) -
                                                            static_cast<std::ptrdiff_t>(pad);
                                        if (sy < 0 || sx < 0 ||
                                            sy >= static_cast<std::ptrdiff_t>(h) ||
                                            sx >= static_cast<std::ptrdiff_t>(wd))
                                            continue;
                                        std::size_t xi = (c * h + static_cast<std::size_t>(sy)) * wd +
                                                         static_cast<std::size_t>(sx);
                                        std::size_t wi = (c * k + ky) * k + kx;
                                        dx[xi] += go * w.at(o, wi);
                                        dw.at(o, wi) += go * x[xi];
                                    }
                        }
                break;
            }
        }
    }

    // Materialize zero gradients for nodes the loss never reached.
    for (NodeId id = 0; id < nodes_.size(); ++id)
        if (!grads.present(id)) {
            grads.slot(id) = Tensor::zeros(nodes_[id].value.shape());
            grads.mark(id);
        }
    return grads;
}

bool Tape::replay_matches() const {
    for (const Node& n : nodes_) {
        if (n.op == Op::Leaf) continue;
        std::vector<const Tensor*> vals;
        vals.reserve(n.inputs.size());
        for (NodeId id : n.inputs) vals.push_back(&nodes_[id].value);
        Tensor redo = eval(n.op, n.attr, vals);
        if (!(redo == n.value)) return false;
    }
    return true;
}

Var make_leaf(Tape& tape, Tensor value) { return {&tape, tape.leaf(std::move(value))}; }
Var make_scalar(Tape& tape, double v) { return {&tape, tape.leaf(Tensor::scalar(v))}; }

namespace {
Var apply1(Op op, Var x, OpAttr attr = {}) { return {x.tape, x.tape->apply(op, {x.id}, attr)}; }
Var apply2(Op op, Var a, Var b) { return {a.tape, a.tape->apply(op, {a.id, b.id})}; }
}  // namespace

Var operator+(Var a, Var b) { return apply2(Op::Add, a, b); }
Var operator-(Var a, Var b) { return apply2(Op::Sub, a, b); }
Var operator*(Var a, Var b) { return apply2(Op::Mul, a, b); }
Var matmul(Var a, Var b) { return apply2(Op::Matmul, a, b); }

Var concat(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat: no operands");
    std::vector<NodeId> ids;
    ids.reserve(parts.size());
    for (const Var& v : parts) ids.push_back(v.id);
    Tape* t = parts[0].tape;
    return {t, t->apply(Op::Concat, std::span<const NodeId>(ids))};
}

Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice(Var x, std::size_t start, std::size_t len) {
    return apply1(Op::Slice, x, {static_cast<std::int64_t>(start), static_cast<std::int64_t>(len)});
}

Var tanh(Var x) { return apply1(Op::Tanh, x); }
Var sigmoid(Var x) { return apply1(Op::Sigmoid, x); }
Var relu(Var x) { return apply1(Op::Relu, x); }
Var exp(Var x) { return apply1(Op::Exp, x); }
Var log(Var x) { return apply1(Op::Log, x); }
Var sqrt(Var x) { return apply1(Op::Sqrt, x); }
Var sum(Var x) { return apply1(Op::Sum, x); }
Var mean(Var x) { return apply1(Op::Mean, x); }
Var square(Var x) { return apply1(Op::Square, x); }
Var softmax(Var x) { return apply1(Op::Softmax, x); }
Var log_softmax(Var x) { return apply1(Op::LogSoftmax, x); }
Var gather_row(Var m, std::size_t row) {
    return apply1(Op::GatherRow, m, {static_cast<std::int64_t>(row)});
}

Var conv2d(Var x, Var w, Var b, std::size_t h, std::size_t wd, std::size_t in_ch,
           std::size_t out_ch, std::size_t ksize) {
    OpAttr attr{static_cast<std::int64_t>(h), static_cast<std::int64_t>(wd),
                static_cast<std::int64_t>(in_ch), static_cast<std::int64_t>(out_ch),
                static_cast<std::int64_t>(ksize)};
    return {x.tape, x.tape->apply(Op::Conv2d, {x.id, w.id, b.id}, attr)};
}

}  // namespace ibp
