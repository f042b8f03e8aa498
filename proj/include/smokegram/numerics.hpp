#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smokegram/matrix.hpp"

namespace smokegram {

enum class Activation { relu, sigmoid };
enum class LossKind { bce, mse };

const char* to_string(Activation a);
const char* to_string(LossKind k);
LossKind loss_from_string(const std::string& s);

// Elementwise activation. Total functions; sigmoid output lies in (0,1).
Matrix activate(Activation kind, const Matrix& x);

// Derivative expressed in whatever form backprop wants it:
//   relu:    d/dx from the pre-activation x
//   sigmoid: d/dx from the *output* y, i.e. y*(1-y)
Matrix relu_grad_from_input(const Matrix& x, const Matrix& upstream);
Matrix sigmoid_grad_from_output(const Matrix& y);

// Mean over all elements. bce clamps predictions to [1e-12, 1-1e-12] before
// the logs; targets must be 0/1 for bce.
double loss(LossKind kind, const Matrix& predicted, const Matrix& target);

// dLoss/dPredicted with the same mean reduction.
Matrix loss_grad(LossKind kind, const Matrix& predicted, const Matrix& target);

inline constexpr double kBceClamp = 1e-12;

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// A named parameter matrix plus its gradient, as one optimizer step sees it.
struct ParamGrad {
    std::string name;
    Matrix* value = nullptr;
    const Matrix* grad = nullptr;
};

// First/second moment estimates per parameter block plus the shared step
// count. Shapes are fixed on the first step.
class AdamState {
public:
    explicit AdamState(AdamConfig config = {}) : config_(config) {}

    // t <- t+1, then the standard bias-corrected update on every block.
    // Throws NumericError naming the block if a gradient is non-finite.
    void step(std::vector<ParamGrad>& blocks);

    long long step_count() const { return t_; }
    const AdamConfig& config() const { return config_; }
    const std::vector<Matrix>& first_moments() const { return m_; }
    const std::vector<Matrix>& second_moments() const { return v_; }

private:
    AdamConfig config_;
    long long t_ = 0;
    std::vector<Matrix> m_;
    std::vector<Matrix> v_;
};

// Uniform init in [-limit, limit], limit = sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out,
                      std::size_t rows, std::size_t cols, std::uint64_t seed);

} // namespace smokegram
