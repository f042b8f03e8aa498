#include <string>

#include "smokegram/errors.hpp"
#include "smokegram/models.hpp"
#include "smokegram/rng.hpp"
#include "smokegram/version.hpp"

namespace smokegram {
namespace {

void check_batch_width(const Matrix& batch, std::size_t want) {
    if (batch.cols() != want) {
        throw DimensionError("mlp: batch width " + std::to_string(batch.cols()) +
                             ", model expects " + std::to_string(want));
    }
}

} // namespace

std::vector<std::size_t> default_hidden_widths(std::size_t hidden_layers) {
    switch (hidden_layers) {
    case 1:
        return {12};
    case 2:
        return {12, 8};
    case 3:
        return {12, 10, 8};
    case 4:
        return {12, 10, 8, 6};
    default:
        throw DataError("no default width schedule for " +
                        std::to_string(hidden_layers) + " hidden layers");
    }
}

std::size_t MlpModel::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        n += weights[i].size() + biases[i].size();
    }
    return n;
}

MlpModel make_mlp(const std::vector<std::size_t>& hidden_widths, std::uint64_t init_seed,
                  LossKind loss) {
    MlpModel m;
    m.loss = loss;
    m.seed = init_seed;
    m.meta.feature_order = kFeatureOrder;
    m.layer_sizes.push_back(kInputWidth);
    for (std::size_t w : hidden_widths) {
        if (w == 0) {
            throw DataError("mlp: hidden width must be positive");
        }
        m.layer_sizes.push_back(w);
    }
    m.layer_sizes.push_back(kOutputWidth);

    for (std::size_t i = 0; i + 1 < m.layer_sizes.size(); ++i) {
        const std::size_t in = m.layer_sizes[i];
        const std::size_t out = m.layer_sizes[i + 1];
        const bool hidden = i + 2 < m.layer_sizes.size();
        const auto layer_seed =
            sub_seed(init_seed, "mlp.layer" + std::to_string(i) + ".weight");
        m.weights.push_back(glorot_uniform(in, out, in, out, layer_seed));
        // Small positive bias keeps relu units off the exact kink at init.
        m.biases.emplace_back(1, out, hidden ? 0.01 : 0.0);
    }
    return m;
}

Matrix mlp_forward(const MlpModel& model, const Matrix& batch) {
    check_batch_width(batch, model.layer_sizes.front());
    Matrix a = batch;
    const std::size_t layers = model.weights.size();
    for (std::size_t i = 0; i < layers; ++i) {
        Matrix z = matmul(a, model.weights[i]);
        add_row_vector(z, model.biases[i]);
        a = activate(i + 1 == layers ? Activation::sigmoid : Activation::relu, z);
    }
    return a;
}

MlpBackward mlp_backward(const MlpModel& model, const Matrix& batch,
                         const Matrix& targets) {
    check_batch_width(batch, model.layer_sizes.front());
    if (targets.rows() != batch.rows() || targets.cols() != kOutputWidth) {
        throw DimensionError("mlp_backward: bad target shape");
    }

    const std::size_t layers = model.weights.size();

    // Forward, keeping pre-activations and activations.
    std::vector<Matrix> zs(layers);
    std::vector<Matrix> as(layers + 1);
    as[0] = batch;
    for (std::size_t i = 0; i < layers; ++i) {
        zs[i] = matmul(as[i], model.weights[i]);
        add_row_vector(zs[i], model.biases[i]);
        as[i + 1] = activate(i + 1 == layers ? Activation::sigmoid : Activation::relu,
                             zs[i]);
    }

    MlpBackward result;
    result.predictions = as[layers];
    result.grads.weights.resize(layers);
    result.grads.biases.resize(layers);

    // dL/dz at the sigmoid output: loss_grad composed with sigmoid'.
    Matrix d_act = loss_grad(model.loss, result.predictions, targets);
    Matrix dz = hadamard(d_act, sigmoid_grad_from_output(result.predictions));

    for (std::size_t i = layers; i-- > 0;) {
        result.grads.weights[i] = matmul(transpose(as[i]), dz);
        result.grads.biases[i] = column_sums(dz);
        if (i > 0) {
            Matrix da = matmul(dz, transpose(model.weights[i]));
            dz = relu_grad_from_input(zs[i - 1], da);
        }
    }
    return result;
}

} // namespace smokegram
