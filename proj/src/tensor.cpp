#include "ppibench/tensor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace ppibench::tensor {

namespace {

std::atomic<int64_t> g_next_id{1};

NodePtr make_node(int rows, int cols) {
    auto n = std::make_shared<Node>();
    n->rows = rows;
    n->cols = cols;
    n->value.assign(static_cast<size_t>(rows) * cols, 0.0);
    n->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
    return n;
}

NodePtr make_op(int rows, int cols, std::vector<NodePtr> parents) {
    auto n = make_node(rows, cols);
    bool needs = false;
    for (const auto& p : parents) needs = needs || p->requires_grad;
    n->requires_grad = needs;
    n->parents = std::move(parents);
    return n;
}

[[noreturn]] void shape_error(const std::string& op, const Tensor& a, const Tensor& b) {
    throw std::runtime_error(op + ": shape mismatch [" + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + "] vs [" + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + "]");
}

void check_same_shape(const std::string& op, const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error(op, a, b);
}

}  // namespace

Node::~Node() {
    // graphs can be thousands of nodes deep; unwind iteratively
    std::vector<NodePtr> stack(std::move(parents));
    parents.clear();
    while (!stack.empty()) {
        NodePtr p = std::move(stack.back());
        stack.pop_back();
        if (p && p.use_count() == 1) {
            for (auto& gp : p->parents) {
                if (gp) stack.push_back(std::move(gp));
            }
            p->parents.clear();
        }
    }
}

Tensor Tensor::zeros(int rows, int cols) { return Tensor(make_node(rows, cols)); }

Tensor Tensor::full(int rows, int cols, double v) {
    auto n = make_node(rows, cols);
    std::fill(n->value.begin(), n->value.end(), v);
    return Tensor(n);
}

Tensor Tensor::from_rows(int rows, int cols, std::vector<double> data) {
    if (data.size() != static_cast<size_t>(rows) * cols) {
        throw std::runtime_error("from_rows: data length " + std::to_string(data.size()) +
                                 " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    auto n = make_node(rows, cols);
    n->value = std::move(data);
    return Tensor(n);
}

Tensor Tensor::param(int rows, int cols, std::vector<double> data, std::string name) {
    Tensor t = from_rows(rows, cols, std::move(data));
    t.node()->requires_grad = true;
    t.node()->name = std::move(name);
    return t;
}

Tensor Tensor::uniform_param(int rows, int cols, int fan_in, Rng& rng, std::string name) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(1, fan_in)));
    std::vector<double> data(static_cast<size_t>(rows) * cols);
    for (auto& v : data) v = rng.uniform(-bound, bound);
    return param(rows, cols, std::move(data), std::move(name));
}

const std::vector<double>& Tensor::grad() const {
    node_->ensure_grad();
    return node_->grad;
}

double Tensor::item() const {
    if (rows() != 1 || cols() != 1) {
        throw std::runtime_error("item: tensor is [" + std::to_string(rows()) + "x" +
                                 std::to_string(cols()) + "], not scalar");
    }
    return node_->value[0];
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    auto n = make_op(a.rows(), a.cols(), {a.node(), b.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.value()[i] + b.value()[i];
    n->backprop = [pa = a.node().get(), pb = b.node().get()](Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i];
        }
    };
    return Tensor(n);
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    auto n = make_op(a.rows(), a.cols(), {a.node(), b.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.value()[i] - b.value()[i];
    n->backprop = [pa = a.node().get(), pb = b.node().get()](Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] -= self.grad[i];
        }
    };
    return Tensor(n);
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape("mul", a, b);
    auto n = make_op(a.rows(), a.cols(), {a.node(), b.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.value()[i] * b.value()[i];
    n->backprop = [pa = a.node().get(), pb = b.node().get()](Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * pb->value[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pb->grad[i] += self.grad[i] * pa->value[i];
        }
    };
    return Tensor(n);
}

Tensor scale(const Tensor& a, double s) {
    auto n = make_op(a.rows(), a.cols(), {a.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.value()[i] * s;
    n->backprop = [pa = a.node().get(), s](Node& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * s;
    };
    return Tensor(n);
}

Tensor scale_by(const Tensor& a, const Tensor& s) {
    if (s.rows() != 1 || s.cols() != 1) throw std::runtime_error("scale_by: scale must be [1x1]");
    auto n = make_op(a.rows(), a.cols(), {a.node(), s.node()});
    const double sv = s.value()[0];
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.value()[i] * sv;
    n->backprop = [pa = a.node().get(), ps = s.node().get()](Node& self) {
        const double sv = ps->value[0];
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i] * sv;
        }
        if (ps->requires_grad) {
            ps->ensure_grad();
            double acc = 0;
            for (size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * pa->value[i];
            ps->grad[0] += acc;
        }
    };
    return Tensor(n);
}

Tensor add_rowvec(const Tensor& a, const Tensor& bias) {
    if (bias.rows() != 1 || bias.cols() != a.cols()) shape_error("add_rowvec", a, bias);
    auto n = make_op(a.rows(), a.cols(), {a.node(), bias.node()});
    const int cols = a.cols();
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < cols; ++c) {
            n->value[static_cast<size_t>(r) * cols + c] =
                a.value()[static_cast<size_t>(r) * cols + c] + bias.value()[c];
        }
    }
    n->backprop = [pa = a.node().get(), pb = bias.node().get(), cols](Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) pa->grad[i] += self.grad[i];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            const int rows = self.rows;
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) pb->grad[c] += self.grad[static_cast<size_t>(r) * cols + c];
            }
        }
    };
    return Tensor(n);
}

Tensor relu(const Tensor& a) {
    auto n = make_op(a.rows(), a.cols(), {a.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = a.value()[i] > 0 ? a.value()[i] : 0.0;
    n->backprop = [pa = a.node().get()](Node& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            if (pa->value[i] > 0) pa->grad[i] += self.grad[i];
        }
    };
    return Tensor(n);
}

Tensor sigmoid(const Tensor& a) {
    auto n = make_op(a.rows(), a.cols(), {a.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = 1.0 / (1.0 + std::exp(-a.value()[i]));
    n->backprop = [pa = a.node().get()](Node& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            const double y = self.value[i];
            pa->grad[i] += self.grad[i] * y * (1.0 - y);
        }
    };
    return Tensor(n);
}

Tensor tanh_t(const Tensor& a) {
    auto n = make_op(a.rows(), a.cols(), {a.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = std::tanh(a.value()[i]);
    n->backprop = [pa = a.node().get()](Node& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            const double y = self.value[i];
            pa->grad[i] += self.grad[i] * (1.0 - y * y);
        }
    };
    return Tensor(n);
}

Tensor clamp(const Tensor& a, double lo, double hi) {
    if (!(lo < hi)) throw std::runtime_error("clamp: lo must be < hi");
    auto n = make_op(a.rows(), a.cols(), {a.node()});
    for (size_t i = 0; i < n->value.size(); ++i) n->value[i] = std::min(hi, std::max(lo, a.value()[i]));
    n->backprop = [pa = a.node().get(), lo, hi](Node& self) {
        if (!pa->requires_grad) return;
        pa->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            const double v = pa->value[i];
            if (v > lo && v < hi) pa->grad[i] += self.grad[i];
        }
    };
    return Tensor(n);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) shape_error("matmul", a, b);
    const int m = a.rows(), k = a.cols(), p = b.cols();
    auto n = make_op(m, p, {a.node(), b.node()});
    const auto& av = a.value();
    const auto& bv = b.value();
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < p; ++j) {
            double acc = 0;
            for (int t = 0; t < k; ++t) acc += av[static_cast<size_t>(i) * k + t] * bv[static_cast<size_t>(t) * p + j];
            n->value[static_cast<size_t>(i) * p + j] = acc;
        }
    }
    n->backprop = [pa = a.node().get(), pb = b.node().get(), m, k, p](Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (int i = 0; i < m; ++i) {
                for (int t = 0; t < k; ++t) {
                    double acc = 0;
                    for (int j = 0; j < p; ++j)
                        acc += self.grad[static_cast<size_t>(i) * p + j] * pb->value[static_cast<size_t>(t) * p + j];
                    pa->grad[static_cast<size_t>(i) * k + t] += acc;
                }
            }
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (int t = 0; t < k; ++t) {
                for (int j = 0; j < p; ++j) {
                    double acc = 0;
                    for (int i = 0; i < m; ++i)
                        acc += pa->value[static_cast<size_t>(i) * k + t] * self.grad[static_cast<size_t>(i) * p + j];
                    pb->grad[static_cast<size_t>(t) * p + j] += acc;
                }
            }
        }
    };
    return Tensor(n);
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_rowvec(matmul(x, w), b);
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
    if (a.rows() != b.rows()) shape_error("concat_cols", a, b);
    const int rows = a.rows(), ca = a.cols(), cb = b.cols();
    auto n = make_op(rows, ca + cb, {a.node(), b.node()});
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < ca; ++c)
            n->value[static_cast<size_t>(r) * (ca + cb) + c] = a.value()[static_cast<size_t>(r) * ca + c];
        for (int c = 0; c < cb; ++c)
            n->value[static_cast<size_t>(r) * (ca + cb) + ca + c] = b.value()[static_cast<size_t>(r) * cb + c];
    }
    n->backprop = [pa = a.node().get(), pb = b.node().get(), rows, ca, cb](Node& self) {
        if (pa->requires_grad) {
            pa->ensure_grad();
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < ca; ++c)
                    pa->grad[static_cast<size_t>(r) * ca + c] += self.grad[static_cast<size_t>(r) * (ca + cb) + c];
        }
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cb; ++c)
                    pb->grad[static_cast<size_t>(r) * cb + c] +=
                        self.grad[static_cast<size_t>(r) * (ca + cb) + ca + c];
        }
    };
    return Tensor(n);
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::runtime_error("concat_rows: no parts");
    const int cols = parts[0].cols();
    int rows = 0;
    std::vector<NodePtr> parents;
    parents.reserve(parts.size());
    for (const auto& p : parts) {
        if (p.cols() != cols) shape_error("concat_rows", parts[0], p);
        rows += p.rows();
        parents.push_back(p.node());
    }
    auto n = make_op(rows, cols, std::move(parents));
    size_t offset = 0;
    for (const auto& p : parts) {
        std::copy(p.value().begin(), p.value().end(), n->value.begin() + offset);
        offset += p.value().size();
    }
    n->backprop = [](Node& self) {
        size_t offset = 0;
        for (auto& parent : self.parents) {
            const size_t len = parent->value.size();
            if (parent->requires_grad) {
                parent->ensure_grad();
                for (size_t i = 0; i < len; ++i) parent->grad[i] += self.grad[offset + i];
            }
            offset += len;
        }
    };
    return Tensor(n);
}

Tensor gather_rows(const Tensor& x, std::vector<int> idx) {
    const int cols = x.cols();
    for (int i : idx) {
        if (i < 0 || i >= x.rows()) {
            throw std::runtime_error("gather_rows: index " + std::to_string(i) + " out of range (rows=" +
                                     std::to_string(x.rows()) + ")");
        }
    }
    auto n = make_op(static_cast<int>(idx.size()), cols, {x.node()});
    for (size_t r = 0; r < idx.size(); ++r) {
        std::copy(x.value().begin() + static_cast<size_t>(idx[r]) * cols,
                  x.value().begin() + static_cast<size_t>(idx[r] + 1) * cols, n->value.begin() + r * cols);
    }
    n->backprop = [px = x.node().get(), idx = std::move(idx), cols](Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (size_t r = 0; r < idx.size(); ++r) {
            for (int c = 0; c < cols; ++c)
                px->grad[static_cast<size_t>(idx[r]) * cols + c] += self.grad[r * cols + c];
        }
    };
    return Tensor(n);
}

Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b) {
    const int t_in = x.rows(), c_in = x.cols();
    const int c_out = w.rows();
    if (c_in == 0 || w.cols() % c_in != 0) {
        throw std::runtime_error("conv1d: weight width " + std::to_string(w.cols()) +
                                 " is not a multiple of input channels " + std::to_string(c_in));
    }
    const int k = w.cols() / c_in;
    if (t_in < k) {
        throw std::runtime_error("conv1d: input length " + std::to_string(t_in) + " shorter than kernel " +
                                 std::to_string(k));
    }
    if (b.rows() != 1 || b.cols() != c_out) shape_error("conv1d bias", w, b);
    const int t_out = t_in - k + 1;
    auto n = make_op(t_out, c_out, {x.node(), w.node(), b.node()});
    // weight layout: w[f, c*k + tap]; convolution orientation flips the tap
    for (int t = 0; t < t_out; ++t) {
        for (int f = 0; f < c_out; ++f) {
            double acc = b.value()[f];
            for (int c = 0; c < c_in; ++c) {
                for (int tap = 0; tap < k; ++tap) {
                    acc += x.value()[static_cast<size_t>(t + tap) * c_in + c] *
                           w.value()[static_cast<size_t>(f) * (c_in * k) + c * k + (k - 1 - tap)];
                }
            }
            n->value[static_cast<size_t>(t) * c_out + f] = acc;
        }
    }
    n->backprop = [px = x.node().get(), pw = w.node().get(), pb = b.node().get(), t_out, c_out, c_in,
                   k](Node& self) {
        if (pb->requires_grad) {
            pb->ensure_grad();
            for (int t = 0; t < t_out; ++t)
                for (int f = 0; f < c_out; ++f) pb->grad[f] += self.grad[static_cast<size_t>(t) * c_out + f];
        }
        if (pw->requires_grad) {
            pw->ensure_grad();
            for (int t = 0; t < t_out; ++t) {
                for (int f = 0; f < c_out; ++f) {
                    const double g = self.grad[static_cast<size_t>(t) * c_out + f];
                    for (int c = 0; c < c_in; ++c) {
                        for (int tap = 0; tap < k; ++tap) {
                            pw->grad[static_cast<size_t>(f) * (c_in * k) + c * k + (k - 1 - tap)] +=
                                g * px->value[static_cast<size_t>(t + tap) * c_in + c];
                        }
                    }
                }
            }
        }
        if (px->requires_grad) {
            px->ensure_grad();
            for (int t = 0; t < t_out; ++t) {
                for (int f = 0; f < c_out; ++f) {
                    const double g = self.grad[static_cast<size_t>(t) * c_out + f];
                    for (int c = 0; c < c_in; ++c) {
                        for (int tap = 0; tap < k; ++tap) {
                            px->grad[static_cast<size_t>(t + tap) * c_in + c] +=
                                g * pw->value[static_cast<size_t>(f) * (c_in * k) + c * k + (k - 1 - tap)];
                        }
                    }
                }
            }
        }
    };
    return Tensor(n);
}

Tensor maxpool1d(const Tensor& x, int width) {
    if (width < 1) throw std::runtime_error("maxpool1d: width must be >= 1");
    const int t_out = x.rows() / width;
    if (t_out < 1) {
        throw std::runtime_error("maxpool1d: input length " + std::to_string(x.rows()) +
                                 " shorter than pool width " + std::to_string(width));
    }
    const int cols = x.cols();
    auto n = make_op(t_out, cols, {x.node()});
    auto argmax = std::make_shared<std::vector<int>>(static_cast<size_t>(t_out) * cols);
    for (int t = 0; t < t_out; ++t) {
        for (int c = 0; c < cols; ++c) {
            int best = t * width;
            double best_v = x.value()[static_cast<size_t>(best) * cols + c];
            for (int o = 1; o < width; ++o) {
                const int r = t * width + o;
                const double v = x.value()[static_cast<size_t>(r) * cols + c];
                if (v > best_v) { best_v = v; best = r; }
            }
            n->value[static_cast<size_t>(t) * cols + c] = best_v;
            (*argmax)[static_cast<size_t>(t) * cols + c] = best;
        }
    }
    n->backprop = [px = x.node().get(), argmax, cols](Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i) {
            const int c = static_cast<int>(i % cols);
            px->grad[static_cast<size_t>((*argmax)[i]) * cols + c] += self.grad[i];
        }
    };
    return Tensor(n);
}

Tensor mean_rows(const Tensor& x) {
    const int rows = x.rows(), cols = x.cols();
    auto n = make_op(1, cols, {x.node()});
    for (int c = 0; c < cols; ++c) {
        double acc = 0;
        for (int r = 0; r < rows; ++r) acc += x.value()[static_cast<size_t>(r) * cols + c];
        n->value[c] = acc / rows;
    }
    n->backprop = [px = x.node().get(), rows, cols](Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) px->grad[static_cast<size_t>(r) * cols + c] += self.grad[c] / rows;
    };
    return Tensor(n);
}

Tensor sum_all(const Tensor& x) {
    auto n = make_op(1, 1, {x.node()});
    double acc = 0;
    for (double v : x.value()) acc += v;
    n->value[0] = acc;
    n->backprop = [px = x.node().get()](Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (auto& g : px->grad) g += self.grad[0];
    };
    return Tensor(n);
}

Tensor sum_cols(const Tensor& x) {
    const int rows = x.rows(), cols = x.cols();
    auto n = make_op(rows, 1, {x.node()});
    for (int r = 0; r < rows; ++r) {
        double acc = 0;
        for (int c = 0; c < cols; ++c) acc += x.value()[static_cast<size_t>(r) * cols + c];
        n->value[r] = acc;
    }
    n->backprop = [px = x.node().get(), rows, cols](Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) px->grad[static_cast<size_t>(r) * cols + c] += self.grad[r];
    };
    return Tensor(n);
}

Tensor neighbor_sum(const Tensor& x, const std::vector<std::vector<int>>& adj) {
    const int rows = x.rows(), cols = x.cols();
    if (static_cast<int>(adj.size()) != rows) {
        throw std::runtime_error("neighbor_sum: adjacency size " + std::to_string(adj.size()) +
                                 " does not match feature rows " + std::to_string(rows));
    }
    auto adj_copy = std::make_shared<std::vector<std::vector<int>>>(adj);
    auto n = make_op(rows, cols, {x.node()});
    for (int r = 0; r < rows; ++r) {
        for (int v : (*adj_copy)[r]) {
            if (v < 0 || v >= rows) throw std::runtime_error("neighbor_sum: neighbor index out of range");
            for (int c = 0; c < cols; ++c)
                n->value[static_cast<size_t>(r) * cols + c] += x.value()[static_cast<size_t>(v) * cols + c];
        }
    }
    n->backprop = [px = x.node().get(), adj_copy, cols](Node& self) {
        if (!px->requires_grad) return;
        px->ensure_grad();
        for (size_t r = 0; r < adj_copy->size(); ++r) {
            for (int v : (*adj_copy)[r]) {
                for (int c = 0; c < cols; ++c)
                    px->grad[static_cast<size_t>(v) * cols + c] += self.grad[r * cols + c];
            }
        }
    };
    return Tensor(n);
}

Tensor bce(const Tensor& probs, const Tensor& targets) {
    check_same_shape("bce", probs, targets);
    auto n = make_op(1, 1, {probs.node(), targets.node()});
    double acc = 0;
    for (size_t i = 0; i < probs.value().size(); ++i) {
        const double p = probs.value()[i];
        if (!(p > 0.0 && p < 1.0)) {
            throw std::runtime_error("bce: probability outside (0,1); clamp predictions first");
        }
        const double y = targets.value()[i];
        acc += -y * std::log(p) - (1.0 - y) * std::log(1.0 - p);
    }
    n->value[0] = acc;
    n->backprop = [pp = probs.node().get(), pt = targets.node().get()](Node& self) {
        if (!pp->requires_grad) return;
        pp->ensure_grad();
        const double g = self.grad[0];
        for (size_t i = 0; i < pp->value.size(); ++i) {
            const double p = pp->value[i];
            const double y = pt->value[i];
            pp->grad[i] += g * (-y / p + (1.0 - y) / (1.0 - p));
        }
    };
    return Tensor(n);
}

void backward(const Tensor& loss) {
    if (!loss.valid()) throw std::runtime_error("backward: empty tensor");
    if (loss.rows() != 1 || loss.cols() != 1) {
        throw std::runtime_error("backward: loss must be scalar, got [" + std::to_string(loss.rows()) + "x" +
                                 std::to_string(loss.cols()) + "]");
    }

    // collect the reachable subgraph, then replay in reverse creation order
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<Node*> stack{loss.node().get()};
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        Node* n = stack.back();
        stack.pop_back();
        order.push_back(n);
        for (const auto& p : n->parents) {
            if (p && seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) { return a->id > b->id; });

    // intermediates get fresh buffers each pass; leaf (parameter/input)
    // gradients accumulate across passes
    for (Node* n : order) {
        if (n->backprop) n->grad.assign(n->value.size(), 0.0);
    }
    loss.node()->ensure_grad();
    loss.node()->grad[0] += 1.0;
    for (Node* n : order) {
        if (n->backprop && n->requires_grad) {
            n->ensure_grad();
            n->backprop(*n);
        }
    }
}

}  // namespace ppibench::tensor
