#include <cmath>
#include <string>
#include <vector>

#include "smokegram/errors.hpp"
#include "smokegram/models.hpp"
#include "smokegram/rng.hpp"

namespace smokegram {
namespace {

struct PartitionData {
    Matrix features;
    Matrix targets;
};

PartitionData gather(const Dataset& data, Partition p) {
    std::vector<Window> rows;
    for (std::size_t i = 0; i < data.windows.size(); ++i) {
        if (data.tags[i] == p) {
            rows.push_back(data.windows[i]);
        }
    }
    PartitionData out;
    out.features = window_features(rows);
    out.targets = encode_targets(rows);
    return out;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& order,
                 std::size_t begin, std::size_t end) {
    Matrix out(end - begin, m.cols());
    for (std::size_t r = begin; r < end; ++r) {
        const double* src = m.row_ptr(order[r]);
        double* dst = out.row_ptr(r - begin);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            dst[c] = src[c];
        }
    }
    return out;
}

// Shared mini-batch loop; ModelOps adapts the two families.
template <typename ModelOps>
TrainTrace run_training(ModelOps& ops, const Dataset& data, const TrainConfig& config) {
    if (config.epochs < 1) {
        throw DataError("train: epochs must be >= 1");
    }
    if (config.batch < 1) {
        throw DataError("train: batch must be >= 1");
    }
    const PartitionData train_part = gather(data, Partition::train);
    const PartitionData val_part = gather(data, Partition::val);
    if (train_part.features.rows() == 0 || val_part.features.rows() == 0) {
        throw DataError("train: empty train or val partition");
    }

    const std::size_t n = train_part.features.rows();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    Rng shuffle_rng(config.shuffle_seed);

    AdamState adam(config.adam);
    TrainTrace trace;
    trace.epochs.reserve(config.epochs);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle_each_epoch) {
            shuffle_rng.shuffle(order);
        }
        for (std::size_t begin = 0, batch_index = 0; begin < n;
             begin += config.batch, ++batch_index) {
            const std::size_t end = std::min(begin + config.batch, n);
            const Matrix xb = take_rows(train_part.features, order, begin, end);
            const Matrix tb = take_rows(train_part.targets, order, begin, end);
            const double batch_loss = ops.step(adam, xb, tb);
            if (!std::isfinite(batch_loss)) {
                throw NumericError("train: non-finite loss at epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batch_index + 1));
            }
        }

        EpochStats stats;
        const Matrix train_pred = ops.forward(train_part.features);
        const Matrix val_pred = ops.forward(val_part.features);
        stats.train_loss = loss(ops.loss_kind(), train_pred, train_part.targets);
        stats.val_loss = loss(ops.loss_kind(), val_pred, val_part.targets);
        stats.train_acc = accuracy(train_pred, train_part.targets, AccuracyMode::argmax);
        stats.val_acc = accuracy(val_pred, val_part.targets, AccuracyMode::argmax);
        trace.epochs.push_back(stats);
    }
    return trace;
}

struct MlpOps {
    MlpModel& model;

    Matrix forward(const Matrix& x) const { return mlp_forward(model, x); }
    LossKind loss_kind() const { return model.loss; }

    double step(AdamState& adam, const Matrix& xb, const Matrix& tb) {
        MlpBackward back = mlp_backward(model, xb, tb);
        std::vector<ParamGrad> blocks;
        for (std::size_t i = 0; i < model.weights.size(); ++i) {
            const std::string base = "layer" + std::to_string(i);
            blocks.push_back({base + ".weight", &model.weights[i],
                              &back.grads.weights[i]});
            blocks.push_back({base + ".bias", &model.biases[i], &back.grads.biases[i]});
        }
        adam.step(blocks);
        return loss(model.loss, back.predictions, tb);
    }
};

struct LstmOps {
    LstmModel& model;

    Matrix forward(const Matrix& x) const { return lstm_forward(model, x); }
    LossKind loss_kind() const { return model.loss; }

    double step(AdamState& adam, const Matrix& xb, const Matrix& tb) {
        LstmBackward back = lstm_backward(model, xb, tb);
        std::vector<ParamGrad> blocks;
        static const char* gate_names[4] = {"i", "f", "g", "o"};
        for (std::size_t c = 0; c < model.cells.size(); ++c) {
            for (std::size_t g = 0; g < 4; ++g) {
                const std::string base =
                    "cell" + std::to_string(c) + "." + gate_names[g];
                blocks.push_back({base + ".wx", &model.cells[c].wx[g],
                                  &back.grads.cells[c].wx[g]});
                blocks.push_back({base + ".wh", &model.cells[c].wh[g],
                                  &back.grads.cells[c].wh[g]});
                blocks.push_back({base + ".b", &model.cells[c].b[g],
                                  &back.grads.cells[c].b[g]});
            }
        }
        if (model.mode == LstmMode::wide) {
            blocks.push_back({"readout.w", &model.readout_w, &back.grads.readout_w});
            blocks.push_back({"readout.b", &model.readout_b, &back.grads.readout_b});
        }
        adam.step(blocks);
        return loss(model.loss, back.predictions, tb);
    }
};

} // namespace

TrainTrace train(MlpModel& model, const Dataset& data, const TrainConfig& config) {
    MlpOps ops{model};
    return run_training(ops, data, config);
}

TrainTrace train(LstmModel& model, const Dataset& data, const TrainConfig& config) {
    LstmOps ops{model};
    return run_training(ops, data, config);
}

std::size_t argmax_row(const Matrix& m, std::size_t row) {
    std::size_t best = 0;
    double best_val = m(row, 0);
    for (std::size_t c = 1; c < m.cols(); ++c) {
        if (m(row, c) > best_val) {
            best_val = m(row, c);
            best = c;
        }
    }
    return best;
}

double accuracy(const Matrix& predictions, const Matrix& targets, AccuracyMode mode) {
    require_same_shape(predictions, targets, "accuracy");
    if (predictions.rows() == 0) {
        return 0.0;
    }
    if (mode == AccuracyMode::argmax) {
        std::size_t hits = 0;
        for (std::size_t r = 0; r < predictions.rows(); ++r) {
            if (argmax_row(predictions, r) == argmax_row(targets, r)) {
                ++hits;
            }
        }
        return static_cast<double>(hits) / static_cast<double>(predictions.rows());
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const bool p = predictions.data()[i] >= 0.5;
        const bool t = targets.data()[i] >= 0.5;
        if (p == t) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

std::vector<int> predicted_classes(const Matrix& predictions) {
    std::vector<int> out(predictions.rows());
    for (std::size_t r = 0; r < predictions.rows(); ++r) {
        out[r] = static_cast<int>(argmax_row(predictions, r)) + 1;
    }
    return out;
}

} // namespace smokegram
