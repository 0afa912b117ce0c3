#include "ppibench/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ppibench::tensor {

GruParams GruParams::init(int in_dim, int hidden, Rng& rng, const std::string& prefix) {
    GruParams p;
    p.wxr = Tensor::uniform_param(in_dim, hidden, in_dim, rng, prefix + ".wxr");
    p.whr = Tensor::uniform_param(hidden, hidden, hidden, rng, prefix + ".whr");
    p.br = Tensor::param(1, hidden, std::vector<double>(hidden, 0.0), prefix + ".br");
    p.wxz = Tensor::uniform_param(in_dim, hidden, in_dim, rng, prefix + ".wxz");
    p.whz = Tensor::uniform_param(hidden, hidden, hidden, rng, prefix + ".whz");
    p.bz = Tensor::param(1, hidden, std::vector<double>(hidden, 0.0), prefix + ".bz");
    p.wxn = Tensor::uniform_param(in_dim, hidden, in_dim, rng, prefix + ".wxn");
    p.whn = Tensor::uniform_param(hidden, hidden, hidden, rng, prefix + ".whn");
    p.bn = Tensor::param(1, hidden, std::vector<double>(hidden, 0.0), prefix + ".bn");
    return p;
}

void GruParams::collect(std::vector<std::pair<std::string, Tensor>>& out, const std::string& prefix) const {
    out.emplace_back(prefix + ".wxr", wxr);
    out.emplace_back(prefix + ".whr", whr);
    out.emplace_back(prefix + ".br", br);
    out.emplace_back(prefix + ".wxz", wxz);
    out.emplace_back(prefix + ".whz", whz);
    out.emplace_back(prefix + ".bz", bz);
    out.emplace_back(prefix + ".wxn", wxn);
    out.emplace_back(prefix + ".whn", whn);
    out.emplace_back(prefix + ".bn", bn);
}

Tensor gru_cell(const Tensor& x, const Tensor& h, const GruParams& p) {
    Tensor r = sigmoid(add(linear(x, p.wxr, p.br), matmul(h, p.whr)));
    Tensor z = sigmoid(add(linear(x, p.wxz, p.bz), matmul(h, p.whz)));
    Tensor n = tanh_t(add(linear(x, p.wxn, p.bn), mul(r, matmul(h, p.whn))));
    Tensor ones = Tensor::full(1, z.cols(), 1.0);
    return add(mul(sub(ones, z), n), mul(z, h));
}

Tensor gru_sequence(const Tensor& xs, const GruParams& p, bool reverse) {
    const int steps = xs.rows();
    if (steps < 1) throw std::runtime_error("gru_sequence: empty input");
    Tensor h = Tensor::zeros(1, p.hidden());
    std::vector<Tensor> states(steps);
    for (int i = 0; i < steps; ++i) {
        const int t = reverse ? steps - 1 - i : i;
        h = gru_cell(gather_rows(xs, {t}), h, p);
        states[t] = h;
    }
    return concat_rows(states);
}

Tensor bigru(const Tensor& xs, const GruParams& fwd, const GruParams& bwd) {
    return concat_cols(gru_sequence(xs, fwd, false), gru_sequence(xs, bwd, true));
}

Adam::Adam(std::vector<std::pair<std::string, Tensor>> params, AdamConfig config)
    : config_(config), params_(std::move(params)) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
        m_[i].assign(params_[i].second.size(), 0.0);
        v_[i].assign(params_[i].second.size(), 0.0);
    }
}

void Adam::zero_grad() {
    for (auto& [name, p] : params_) p.zero_grad();
}

void Adam::step() {
    ++step_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
    for (size_t i = 0; i < params_.size(); ++i) {
        auto& [name, p] = params_[i];
        auto& value = p.value();
        const auto& grad = p.grad();
        for (size_t j = 0; j < value.size(); ++j) {
            double g = grad[j];
            if (!std::isfinite(g)) {
                throw std::runtime_error("non-finite gradient in parameter '" + name + "' at element " +
                                         std::to_string(j));
            }
            if (!config_.decoupled) g += config_.weight_decay * value[j];
            m_[i][j] = config_.beta1 * m_[i][j] + (1.0 - config_.beta1) * g;
            v_[i][j] = config_.beta2 * v_[i][j] + (1.0 - config_.beta2) * g * g;
            const double mhat = m_[i][j] / bc1;
            const double vhat = v_[i][j] / bc2;
            value[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
            if (config_.decoupled) value[j] -= config_.lr * config_.weight_decay * value[j];
        }
    }
}

void Adam::restore(int64_t step, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v) {
    if (m.size() != params_.size() || v.size() != params_.size()) {
        throw std::runtime_error("Adam::restore: moment count does not match parameters");
    }
    for (size_t i = 0; i < params_.size(); ++i) {
        const size_t want = params_[i].second.value().size();
        if (m[i].size() != want || v[i].size() != want) {
            throw std::runtime_error("Adam::restore: moment shape mismatch for '" + params_[i].first + "'");
        }
    }
    step_ = step;
    m_ = std::move(m);
    v_ = std::move(v);
}

PlateauSchedule::PlateauSchedule(double rate, int patience)
    : rate_(rate), patience_(patience), best_(std::numeric_limits<double>::infinity()) {
    if (!(rate > 0.0 && rate < 1.0)) throw std::runtime_error("lr reduce rate must be in (0,1)");
    if (patience < 1) throw std::runtime_error("lr reduce patience must be >= 1");
}

bool PlateauSchedule::update(double loss) {
    if (loss < best_) {
        best_ = loss;
        bad_ = 0;
        return false;
    }
    ++bad_;
    if (bad_ > patience_) {
        bad_ = 0;
        return true;
    }
    return false;
}

double grad_check(const std::function<Tensor()>& forward, const std::vector<Tensor>& wrt, double eps) {
    for (const auto& t : wrt) const_cast<Tensor&>(t).zero_grad();
    Tensor loss = forward();
    backward(loss);

    std::vector<std::vector<double>> analytic;
    analytic.reserve(wrt.size());
    for (const auto& t : wrt) analytic.push_back(t.grad());

    double worst = 0.0;
    for (size_t k = 0; k < wrt.size(); ++k) {
        auto& value = const_cast<Tensor&>(wrt[k]).value();
        for (size_t j = 0; j < value.size(); ++j) {
            const double saved = value[j];
            value[j] = saved + eps;
            const double f_plus = forward().item();
            value[j] = saved - eps;
            const double f_minus = forward().item();
            value[j] = saved;
            const double numeric = (f_plus - f_minus) / (2.0 * eps);
            const double a = analytic[k][j];
            const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace ppibench::tensor
