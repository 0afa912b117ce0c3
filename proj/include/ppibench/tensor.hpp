#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ppibench/rng.hpp"

namespace ppibench::tensor {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One entry on the reverse-mode tape. Values and gradients are stored in
/// double; reductions therefore accumulate at full precision, which the
/// finite-difference gradient checks rely on.
struct Node {
    int rows = 0, cols = 0;
    std::vector<double> value;
    std::vector<double> grad;  // sized on first use
    bool requires_grad = false;
    std::string name;
    int64_t id = 0;  // creation order, used for topological replay
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backprop;

    ~Node();
    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
};

/// Value handle over a tape node. Copying shares the node.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodePtr node) : node_(std::move(node)) {}

    static Tensor zeros(int rows, int cols);
    static Tensor full(int rows, int cols, double v);
    static Tensor from_rows(int rows, int cols, std::vector<double> data);
    static Tensor scalar(double v) { return full(1, 1, v); }
    static Tensor param(int rows, int cols, std::vector<double> data, std::string name);
    /// uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in))
    static Tensor uniform_param(int rows, int cols, int fan_in, Rng& rng, std::string name);

    bool valid() const { return node_ != nullptr; }
    int rows() const { return node_->rows; }
    int cols() const { return node_->cols; }
    int64_t size() const { return static_cast<int64_t>(node_->value.size()); }
    const std::vector<double>& value() const { return node_->value; }
    std::vector<double>& value() { return node_->value; }
    const std::vector<double>& grad() const;
    bool requires_grad() const { return node_->requires_grad; }
    const std::string& name() const { return node_->name; }
    double item() const;
    double at(int r, int c) const { return node_->value[static_cast<size_t>(r) * node_->cols + c]; }
    void zero_grad();

    NodePtr node() const { return node_; }

private:
    NodePtr node_;
};

// elementwise
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor scale_by(const Tensor& a, const Tensor& s);      // s is [1,1]
Tensor add_rowvec(const Tensor& a, const Tensor& bias); // bias is [1, cols]
Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh_t(const Tensor& a);
Tensor clamp(const Tensor& a, double lo, double hi);

// linear algebra / shape
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);  // x*w + b
Tensor concat_cols(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor gather_rows(const Tensor& x, std::vector<int> idx);

// sequence / graph layers
/// 1-D convolution over rows (valid mode, convolution orientation: the
/// kernel is applied flipped). x: [T, Cin], w: [Cout, Cin*K], b: [1, Cout].
Tensor conv1d(const Tensor& x, const Tensor& w, const Tensor& b);
/// non-overlapping max pooling over rows; the trailing partial window is
/// dropped. x: [T, C] -> [T/width, C]
Tensor maxpool1d(const Tensor& x, int width);
Tensor mean_rows(const Tensor& x);  // [T, C] -> [1, C]
Tensor sum_all(const Tensor& x);    // -> [1, 1]
Tensor sum_cols(const Tensor& x);   // [n, c] -> [n, 1]
/// out[i] = sum of x rows over adj[i]
Tensor neighbor_sum(const Tensor& x, const std::vector<std::vector<int>>& adj);

/// Summed binary cross-entropy over all cells. `probs` must lie strictly
/// inside (0,1); clamp first. `targets` is treated as constant.
Tensor bce(const Tensor& probs, const Tensor& targets);

/// Reverse pass from a scalar loss. Gradients accumulate; clear them
/// between steps (running twice doubles them).
void backward(const Tensor& loss);

}  // namespace ppibench::tensor
