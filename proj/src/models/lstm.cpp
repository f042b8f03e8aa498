#include <cmath>
#include <string>

#include "smokegram/errors.hpp"
#include "smokegram/models.hpp"
#include "smokegram/rng.hpp"
#include "smokegram/version.hpp"

namespace smokegram {
namespace {

Matrix tanh_elem(const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) {
        y.data()[i] = std::tanh(x.data()[i]);
    }
    return y;
}

// d tanh expressed from the output: 1 - y^2.
Matrix tanh_grad_from_output(const Matrix& y) {
    Matrix g(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double v = y.data()[i];
        g.data()[i] = 1.0 - v * v;
    }
    return g;
}

const char* gate_name(std::size_t g) {
    static const char* names[4] = {"i", "f", "g", "o"};
    return names[g];
}

struct CellForward {
    Matrix gates[4]; // activated i, f, g, o
    Matrix c;
    Matrix tanh_c;
    Matrix h;
};

// One timestep with zero initial h and c: the recurrent terms h0*wh drop out
// and c = i .* g.
CellForward cell_forward(const LstmCellParams& p, const Matrix& x) {
    CellForward f;
    for (std::size_t g = 0; g < 4; ++g) {
        Matrix z = matmul(x, p.wx[g]);
        add_row_vector(z, p.b[g]);
        f.gates[g] = g == kGateG ? tanh_elem(z) : activate(Activation::sigmoid, z);
    }
    f.c = hadamard(f.gates[kGateI], f.gates[kGateG]);
    f.tanh_c = tanh_elem(f.c);
    f.h = hadamard(f.gates[kGateO], f.tanh_c);
    return f;
}

void check_batch_width(const Matrix& batch) {
    if (batch.cols() != kInputWidth) {
        throw DimensionError("lstm: batch width " + std::to_string(batch.cols()) +
                             ", model expects " + std::to_string(kInputWidth));
    }
}

LstmCellParams make_cell(std::size_t in, std::size_t hidden, std::uint64_t seed,
                         std::size_t cell_index) {
    LstmCellParams p;
    for (std::size_t g = 0; g < 4; ++g) {
        const std::string base =
            "lstm.cell" + std::to_string(cell_index) + "." + gate_name(g);
        p.wx[g] = glorot_uniform(in, hidden, in, hidden, sub_seed(seed, base + ".wx"));
        p.wh[g] =
            glorot_uniform(hidden, hidden, hidden, hidden, sub_seed(seed, base + ".wh"));
        p.b[g] = Matrix(1, hidden);
    }
    return p;
}

} // namespace

const char* to_string(LstmMode m) {
    return m == LstmMode::stacked ? "stacked" : "wide";
}

LstmMode lstm_mode_from_string(const std::string& s) {
    if (s == "stacked") {
        return LstmMode::stacked;
    }
    if (s == "wide") {
        return LstmMode::wide;
    }
    throw DataError("unknown lstm mode '" + s + "'");
}

std::size_t LstmModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& cell : cells) {
        for (std::size_t g = 0; g < 4; ++g) {
            n += cell.wx[g].size() + cell.wh[g].size() + cell.b[g].size();
        }
    }
    n += readout_w.size() + readout_b.size();
    return n;
}

LstmModel make_lstm(std::size_t units, std::uint64_t init_seed, LstmMode mode,
                    LossKind loss) {
    if (units == 0) {
        throw DataError("lstm: units must be >= 1");
    }
    LstmModel m;
    m.mode = mode;
    m.units = units;
    m.loss = loss;
    m.seed = init_seed;
    m.meta.feature_order = kFeatureOrder;

    if (mode == LstmMode::stacked) {
        for (std::size_t c = 0; c < units; ++c) {
            const std::size_t in = c == 0 ? kInputWidth : kOutputWidth;
            m.cells.push_back(make_cell(in, kOutputWidth, init_seed, c));
        }
    } else {
        m.cells.push_back(make_cell(kInputWidth, units, init_seed, 0));
        m.readout_w = glorot_uniform(units, kOutputWidth, units, kOutputWidth,
                                     sub_seed(init_seed, "lstm.readout.w"));
        m.readout_b = Matrix(1, kOutputWidth);
    }
    return m;
}

Matrix lstm_forward(const LstmModel& model, const Matrix& batch) {
    check_batch_width(batch);
    Matrix x = batch;
    CellForward last;
    for (const auto& cell : model.cells) {
        last = cell_forward(cell, x);
        x = last.h;
    }
    if (model.mode == LstmMode::wide) {
        Matrix z = matmul(x, model.readout_w);
        add_row_vector(z, model.readout_b);
        return activate(Activation::sigmoid, z);
    }
    return activate(Activation::sigmoid, x);
}

LstmBackward lstm_backward(const LstmModel& model, const Matrix& batch,
                           const Matrix& targets) {
    check_batch_width(batch);
    if (targets.rows() != batch.rows() || targets.cols() != kOutputWidth) {
        throw DimensionError("lstm_backward: bad target shape");
    }

    const std::size_t n_cells = model.cells.size();
    std::vector<Matrix> inputs(n_cells); // x into each cell
    std::vector<CellForward> fwd(n_cells);
    Matrix x = batch;
    for (std::size_t c = 0; c < n_cells; ++c) {
        inputs[c] = x;
        fwd[c] = cell_forward(model.cells[c], x);
        x = fwd[c].h;
    }

    LstmBackward result;
    result.grads.cells.resize(n_cells);

    Matrix dh; // dL/dh flowing into the top of the stack
    if (model.mode == LstmMode::wide) {
        Matrix z = matmul(x, model.readout_w);
        add_row_vector(z, model.readout_b);
        result.predictions = activate(Activation::sigmoid, z);
        Matrix d_out = loss_grad(model.loss, result.predictions, targets);
        Matrix dz = hadamard(d_out, sigmoid_grad_from_output(result.predictions));
        result.grads.readout_w = matmul(transpose(x), dz);
        result.grads.readout_b = column_sums(dz);
        dh = matmul(dz, transpose(model.readout_w));
    } else {
        result.predictions = activate(Activation::sigmoid, x);
        Matrix d_out = loss_grad(model.loss, result.predictions, targets);
        dh = hadamard(d_out, sigmoid_grad_from_output(result.predictions));
    }

    for (std::size_t c = n_cells; c-- > 0;) {
        const CellForward& f = fwd[c];
        const LstmCellParams& p = model.cells[c];
        LstmCellParams& g = result.grads.cells[c];

        // h = o .* tanh(c); c = i .* g (zero initial state).
        Matrix d_o = hadamard(dh, f.tanh_c);
        Matrix dc = hadamard(hadamard(dh, f.gates[kGateO]), tanh_grad_from_output(f.tanh_c));
        Matrix d_i = hadamard(dc, f.gates[kGateG]);
        Matrix d_g = hadamard(dc, f.gates[kGateI]);

        Matrix dz[4];
        dz[kGateI] = hadamard(d_i, sigmoid_grad_from_output(f.gates[kGateI]));
        // Forget gate multiplies the zero initial cell state, so nothing
        // reaches it; its gradient is exactly zero.
        dz[kGateF] = Matrix(dh.rows(), f.gates[kGateF].cols());
        dz[kGateG] = hadamard(d_g, tanh_grad_from_output(f.gates[kGateG]));
        dz[kGateO] = hadamard(d_o, sigmoid_grad_from_output(f.gates[kGateO]));

        Matrix dx(inputs[c].rows(), inputs[c].cols());
        const Matrix x_t = transpose(inputs[c]);
        for (std::size_t gi = 0; gi < 4; ++gi) {
            g.wx[gi] = matmul(x_t, dz[gi]);
            g.wh[gi] = Matrix(p.wh[gi].rows(), p.wh[gi].cols()); // h0 = 0
            g.b[gi] = column_sums(dz[gi]);
            if (gi != kGateF) {
                Matrix part = matmul(dz[gi], transpose(p.wx[gi]));
                for (std::size_t k = 0; k < dx.size(); ++k) {
                    dx.data()[k] += part.data()[k];
                }
            }
        }
        dh = std::move(dx);
    }
    return result;
}

} // namespace smokegram
