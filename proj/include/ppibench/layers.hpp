#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "ppibench/tensor.hpp"

namespace ppibench::tensor {

/// Standard 3-gate recurrent cell (reset / update / candidate).
struct GruParams {
    Tensor wxr, whr, br;
    Tensor wxz, whz, bz;
    Tensor wxn, whn, bn;

    static GruParams init(int in_dim, int hidden, Rng& rng, const std::string& prefix);
    void collect(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix) const;
    int hidden() const { return whr.cols(); }
};

/// r = sig(x Wxr + h Whr + br); z = sig(x Wxz + h Whz + bz)
/// n = tanh(x Wxn + r*(h Whn) + bn); h' = (1-z)*n + z*h
Tensor gru_cell(const Tensor& x, const Tensor& h, const GruParams& p);

/// Runs the cell over the rows of xs (reversed when `reverse`); the output
/// row t is the hidden state produced at input position t either way.
Tensor gru_sequence(const Tensor& xs, const GruParams& p, bool reverse);

/// forward and reversed passes concatenated per position: [T, 2*hidden]
Tensor bigru(const Tensor& xs, const GruParams& fwd, const GruParams& bwd);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 5e-4;
    bool decoupled = false;  // classic loss-coupled L2 by default
};

class Adam {
public:
    Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig config);

    void zero_grad();
    void step();  // throws on non-finite gradients, naming the parameter

    double lr() const { return config_.lr; }
    void set_lr(double lr) { config_.lr = lr; }
    int64_t step_count() const { return step_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<std::pair<std::string, Tensor>>& params() const { return params_; }

    // moment access for checkpoint / resume
    const std::vector<std::vector<double>>& moment1() const { return m_; }
    const std::vector<std::vector<double>>& moment2() const { return v_; }
    void restore(int64_t step, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v);

private:
    AdamConfig config_;
    std::vector<std::pair<std::string, Tensor>> params_;
    std::vector<std::vector<double>> m_, v_;
    int64_t step_ = 0;
};

/// Halves (rate) the learning rate after `patience` consecutive epochs
/// without loss improvement; update() returns true on the epoch the
/// reduction should be applied.
class PlateauSchedule {
public:
    explicit PlateauSchedule(double rate = 0.5, int patience = 20);
    bool update(double loss);
    double rate() const { return rate_; }
    int patience() const { return patience_; }
    int bad_epochs() const { return bad_; }
    double best() const { return best_; }
    void restore(double best, int bad) { best_ = best; bad_ = bad; }

private:
    double rate_;
    int patience_;
    double best_;
    int bad_ = 0;
};

/// Central finite differences against the analytic gradients of `wrt`.
/// Returns max over elements of |analytic - numeric| / max(|analytic|,
/// |numeric|, 1e-8). `forward` must rebuild the graph on every call.
double grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& wrt, double eps = 1e-4);

}  // namespace ppibench::tensor
