#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "smokegram/dataset.hpp"
#include "smokegram/matrix.hpp"
#include "smokegram/numerics.hpp"

namespace smokegram {

inline constexpr std::size_t kInputWidth = 60;
inline constexpr std::size_t kOutputWidth = 4;

// Pipeline settings a model was trained with. Stored in the model file so
// evaluation and detection rebuild the exact same windows and split.
struct PipelineMeta {
    std::string feature_order;
    double sample_rate_hz = kDefaultSampleRateHz;
    std::size_t window = 20;
    std::size_t stride = 1;
    bool normalize = false;
    LeakMode leak_mode = LeakMode::paper;
    std::size_t balance_factor = 30;
    std::array<double, 3> ratios = {0.70, 0.15, 0.15};
    std::uint64_t split_seed = 0;
};

// ---------------------------------------------------------------------------
// MLP: 60 inputs, relu hidden layers, 4 sigmoid outputs.

struct MlpModel {
    std::vector<std::size_t> layer_sizes; // {60, hidden..., 4}
    std::vector<Matrix> weights;          // per layer, (in x out)
    std::vector<Matrix> biases;           // per layer, (1 x out)
    LossKind loss = LossKind::bce;
    std::uint64_t seed = 0;
    PipelineMeta meta;

    std::size_t parameter_count() const;
};

// Default hidden-width schedule by hidden-layer count:
// 1->[12], 2->[12,8], 3->[12,10,8], 4->[12,10,8,6].
std::vector<std::size_t> default_hidden_widths(std::size_t hidden_layers);

MlpModel make_mlp(const std::vector<std::size_t>& hidden_widths, std::uint64_t init_seed,
                  LossKind loss = LossKind::bce);

Matrix mlp_forward(const MlpModel& model, const Matrix& batch);

struct MlpGradients {
    std::vector<Matrix> weights;
    std::vector<Matrix> biases;
};

struct MlpBackward {
    Matrix predictions;
    MlpGradients grads;
};

// Analytic gradient of the model's configured loss w.r.t. every parameter.
MlpBackward mlp_backward(const MlpModel& model, const Matrix& batch,
                         const Matrix& targets);

// ---------------------------------------------------------------------------
// LSTM: one 60-feature timestep through stacked cells, zero initial state.
//
// stacked mode (default): `units` cells, each hidden width 4; output is
// sigmoid(h) of the last cell. wide mode: one cell of hidden width `units`
// with a dense sigmoid readout down to 4.

enum class LstmMode { stacked, wide };
const char* to_string(LstmMode m);
LstmMode lstm_mode_from_string(const std::string& s);

// Gate order everywhere: input, forget, candidate, output.
enum GateIndex : std::size_t { kGateI = 0, kGateF = 1, kGateG = 2, kGateO = 3 };

struct LstmCellParams {
    std::array<Matrix, 4> wx; // (in x hidden)
    std::array<Matrix, 4> wh; // (hidden x hidden); unused signal at one step but part of the cell
    std::array<Matrix, 4> b;  // (1 x hidden)
};

struct LstmModel {
    LstmMode mode = LstmMode::stacked;
    std::size_t units = 2;
    std::vector<LstmCellParams> cells;
    Matrix readout_w; // wide mode only, (units x 4)
    Matrix readout_b; // wide mode only, (1 x 4)
    LossKind loss = LossKind::mse;
    std::uint64_t seed = 0;
    PipelineMeta meta;

    std::size_t parameter_count() const;
};

LstmModel make_lstm(std::size_t units, std::uint64_t init_seed,
                    LstmMode mode = LstmMode::stacked, LossKind loss = LossKind::mse);

Matrix lstm_forward(const LstmModel& model, const Matrix& batch);

struct LstmGradients {
    std::vector<LstmCellParams> cells; // same shapes as the model's cells
    Matrix readout_w;
    Matrix readout_b;
};

struct LstmBackward {
    Matrix predictions;
    LstmGradients grads;
};

LstmBackward lstm_backward(const LstmModel& model, const Matrix& batch,
                           const Matrix& targets);

// ---------------------------------------------------------------------------
// Training.

struct TrainConfig {
    std::size_t epochs = 100;
    std::size_t batch = 100;
    AdamConfig adam;
    bool shuffle_each_epoch = true;
    std::uint64_t shuffle_seed = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainTrace {
    std::vector<EpochStats> epochs;
};

// Mini-batch Adam over the train partition; the short final batch is
// included. End of every epoch records full-partition loss and argmax
// accuracy. Deterministic for a fixed (model seed, data, config).
TrainTrace train(MlpModel& model, const Dataset& data, const TrainConfig& config);
TrainTrace train(LstmModel& model, const Dataset& data, const TrainConfig& config);

// ---------------------------------------------------------------------------

enum class AccuracyMode { argmax, elementwise };

// argmax: fraction of rows whose argmax (ties -> lowest index) hits the
// target's hot index. elementwise: fraction of all entries whose >= 0.5
// threshold matches the target bit.
double accuracy(const Matrix& predictions, const Matrix& targets, AccuracyMode mode);

std::size_t argmax_row(const Matrix& m, std::size_t row);

// Predicted class ids (1..4) per row.
std::vector<int> predicted_classes(const Matrix& predictions);

// ---------------------------------------------------------------------------
// Serialization: versioned, checksummed text container with exact decimal
// floats; load(save(m)) is bit-identical.

using Model = std::variant<MlpModel, LstmModel>;

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);
MlpModel load_mlp(const std::string& path);   // ModelFamilyError if not an MLP
LstmModel load_lstm(const std::string& path); // ModelFamilyError if not an LSTM

Matrix model_forward(const Model& model, const Matrix& batch);
const PipelineMeta& model_meta(const Model& model);
std::string model_family(const Model& model);

} // namespace smokegram
