#include "smokegram/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "smokegram/errors.hpp"
#include "smokegram/kernels.hpp"
#include "smokegram/rng.hpp"

namespace smokegram {

const char* to_string(Activation a) {
    return a == Activation::relu ? "relu" : "sigmoid";
}

const char* to_string(LossKind k) {
    return k == LossKind::bce ? "bce" : "mse";
}

LossKind loss_from_string(const std::string& s) {
    if (s == "bce") {
        return LossKind::bce;
    }
    if (s == "mse") {
        return LossKind::mse;
    }
    throw DataError("unknown loss kind '" + s + "'");
}

Matrix activate(Activation kind, const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    if (kind == Activation::relu) {
        kernels::active().relu(x.data(), y.data(), x.size());
        return y;
    }
    // sigmoid stays scalar in every backend: exp() has no bit-stable vector
    // form, and these loops are not the hot path.
    const double* in = x.data();
    double* out = y.data();
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = 1.0 / (1.0 + std::exp(-in[i]));
    }
    return y;
}

Matrix relu_grad_from_input(const Matrix& x, const Matrix& upstream) {
    require_same_shape(x, upstream, "relu_grad");
    Matrix dz(x.rows(), x.cols());
    kernels::active().relu_backward(x.data(), upstream.data(), dz.data(), x.size());
    return dz;
}

Matrix sigmoid_grad_from_output(const Matrix& y) {
    Matrix g(y.rows(), y.cols());
    const double* in = y.data();
    double* out = g.data();
    for (std::size_t i = 0; i < y.size(); ++i) {
        out[i] = in[i] * (1.0 - in[i]);
    }
    return g;
}

double loss(LossKind kind, const Matrix& predicted, const Matrix& target) {
    require_same_shape(predicted, target, "loss");
    const std::size_t n = predicted.size();
    if (n == 0) {
        throw DimensionError("loss: empty matrices");
    }
    const double* p = predicted.data();
    const double* t = target.data();
    double sum = 0.0;
    if (kind == LossKind::mse) {
        for (std::size_t i = 0; i < n; ++i) {
            const double d = p[i] - t[i];
            sum += d * d;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
            sum += -(t[i] * std::log(pc) + (1.0 - t[i]) * std::log(1.0 - pc));
        }
    }
    return sum / static_cast<double>(n);
}

Matrix loss_grad(LossKind kind, const Matrix& predicted, const Matrix& target) {
    require_same_shape(predicted, target, "loss_grad");
    const std::size_t n = predicted.size();
    Matrix g(predicted.rows(), predicted.cols());
    const double* p = predicted.data();
    const double* t = target.data();
    double* out = g.data();
    const double inv_n = 1.0 / static_cast<double>(n);
    if (kind == LossKind::mse) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = 2.0 * (p[i] - t[i]) * inv_n;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double pc = std::clamp(p[i], kBceClamp, 1.0 - kBceClamp);
            out[i] = (-t[i] / pc + (1.0 - t[i]) / (1.0 - pc)) * inv_n;
        }
    }
    return g;
}

void AdamState::step(std::vector<ParamGrad>& blocks) {
    if (m_.empty()) {
        for (const auto& b : blocks) {
            m_.emplace_back(b.value->rows(), b.value->cols());
            v_.emplace_back(b.value->rows(), b.value->cols());
        }
    }
    if (m_.size() != blocks.size()) {
        throw DimensionError("adam: block count changed between steps");
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (!blocks[i].grad->same_shape(*blocks[i].value)) {
            throw DimensionError("adam: gradient shape mismatch for block '" +
                                 blocks[i].name + "'");
        }
        if (!blocks[i].grad->all_finite()) {
            throw NumericError("adam: non-finite gradient in block '" + blocks[i].name + "'");
        }
    }
    ++t_;
    const double b1t = std::pow(config_.beta1, static_cast<double>(t_));
    const double b2t = std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        kernels::active().adam_update(blocks[i].value->data(), blocks[i].grad->data(),
                                      m_[i].data(), v_[i].data(), blocks[i].value->size(),
                                      config_.lr, config_.beta1, config_.beta2,
                                      config_.epsilon, b1t, b2t);
    }
}

Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                      std::size_t rows, std::size_t cols, std::uint64_t seed) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Rng rng(seed);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.uniform(-limit, limit);
    }
    return m;
}

} // namespace smokegram
