#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "smokegram/errors.hpp"
#include "smokegram/models.hpp"
#include "smokegram/rng.hpp"

using namespace smokegram;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1.0,
                     double hi = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) {
        m.data()[i] = rng.uniform(lo, hi);
    }
    return m;
}

Matrix random_targets(Rng& rng, std::size_t rows) {
    Matrix t(rows, 4);
    for (std::size_t r = 0; r < rows; ++r) {
        t(r, rng.next_below(4)) = 1.0;
    }
    return t;
}

std::vector<Matrix*> collect_params(MlpModel& m) {
    std::vector<Matrix*> out;
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        out.push_back(&m.weights[i]);
        out.push_back(&m.biases[i]);
    }
    return out;
}

std::vector<const Matrix*> collect_grads(const MlpGradients& g) {
    std::vector<const Matrix*> out;
    for (std::size_t i = 0; i < g.weights.size(); ++i) {
        out.push_back(&g.weights[i]);
        out.push_back(&g.biases[i]);
    }
    return out;
}

std::vector<Matrix*> collect_params(LstmModel& m) {
    std::vector<Matrix*> out;
    for (auto& cell : m.cells) {
        for (std::size_t g = 0; g < 4; ++g) {
            out.push_back(&cell.wx[g]);
            out.push_back(&cell.wh[g]);
            out.push_back(&cell.b[g]);
        }
    }
    if (m.mode == LstmMode::wide) {
        out.push_back(&m.readout_w);
        out.push_back(&m.readout_b);
    }
    return out;
}

std::vector<const Matrix*> collect_grads(const LstmGradients& g, LstmMode mode) {
    std::vector<const Matrix*> out;
    for (const auto& cell : g.cells) {
        for (std::size_t gi = 0; gi < 4; ++gi) {
            out.push_back(&cell.wx[gi]);
            out.push_back(&cell.wh[gi]);
            out.push_back(&cell.b[gi]);
        }
    }
    if (mode == LstmMode::wide) {
        out.push_back(&g.readout_w);
        out.push_back(&g.readout_b);
    }
    return out;
}

// Central finite differences over every parameter, compared at relative
// error 1e-4 (absolute 1e-8 when both sides vanish, e.g. forget gates).
template <typename ModelT, typename ForwardFn, typename BackwardFn>
void check_gradients(ModelT& model, ForwardFn forward, BackwardFn backward,
                     const Matrix& x, const Matrix& t) {
    const auto back = backward(model, x, t);
    auto params = collect_params(model);
    std::vector<const Matrix*> grads;
    if constexpr (std::is_same_v<ModelT, MlpModel>) {
        grads = collect_grads(back.grads);
    } else {
        grads = collect_grads(back.grads, model.mode);
    }
    REQUIRE(params.size() == grads.size());

    const double h = 1e-5;
    for (std::size_t b = 0; b < params.size(); ++b) {
        Matrix& p = *params[b];
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double orig = p.data()[i];
            p.data()[i] = orig + h;
            const double up = loss(model.loss, forward(model, x), t);
            p.data()[i] = orig - h;
            const double down = loss(model.loss, forward(model, x), t);
            p.data()[i] = orig;
            const double fd = (up - down) / (2.0 * h);
            const double an = grads[b]->data()[i];
            if (std::max(std::abs(fd), std::abs(an)) < 1e-6) {
                CHECK(std::abs(fd - an) < 1e-8);
            } else {
                CHECK(std::abs(fd - an) / std::max(std::abs(fd), std::abs(an)) < 1e-4);
            }
        }
    }
}

Dataset toy_dataset(Rng& rng, std::size_t n) {
    // Two well-separated blobs, classes 1 and 2.
    std::vector<Window> windows(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool second = i % 2 == 1;
        windows[i].label = second ? 2 : 1;
        windows[i].features.resize(60);
        for (auto& f : windows[i].features) {
            f = (second ? 1.5 : -1.5) + rng.gaussian(0.0, 0.3);
        }
    }
    SplitSpec spec;
    spec.seed = 4;
    spec.balance_factor = 1;
    return split_dataset(windows, spec);
}

} // namespace

TEST_CASE("mlp shapes follow the width schedule") {
    MlpModel m = make_mlp({12, 8}, 1);
    REQUIRE(m.layer_sizes == std::vector<std::size_t>{60, 12, 8, 4});
    CHECK(m.weights[0].rows() == 60);
    CHECK(m.weights[0].cols() == 12);
    CHECK(m.weights[1].rows() == 12);
    CHECK(m.weights[1].cols() == 8);
    CHECK(m.weights[2].rows() == 8);
    CHECK(m.weights[2].cols() == 4);
    CHECK(default_hidden_widths(2) == std::vector<std::size_t>{12, 8});
    CHECK(default_hidden_widths(3) == std::vector<std::size_t>{12, 10, 8});
    CHECK(default_hidden_widths(4) == std::vector<std::size_t>{12, 10, 8, 6});
}

TEST_CASE("mlp with zero parameters outputs 0.5 everywhere") {
    MlpModel m = make_mlp({5}, 1);
    for (auto& w : m.weights) {
        w = Matrix(w.rows(), w.cols(), 0.0);
    }
    for (auto& b : m.biases) {
        b = Matrix(b.rows(), b.cols(), 0.0);
    }
    Rng rng(2);
    const Matrix x = random_matrix(rng, 3, 60);
    const Matrix y = mlp_forward(m, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y.data()[i] == 0.5);
    }
}

TEST_CASE("mlp batch rows are independent") {
    MlpModel m = make_mlp({12, 8}, 3);
    Rng rng(4);
    const Matrix batch = random_matrix(rng, 6, 60);
    const Matrix all = mlp_forward(m, batch);
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        const Matrix one = mlp_forward(m, row_of(batch, r));
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(one(0, c) == all(r, c));
        }
    }
}

TEST_CASE("mlp forward matches a hand-unrolled oracle on a tiny net") {
    MlpModel m = make_mlp({3}, 5);
    Rng rng(6);
    const Matrix x = random_matrix(rng, 1, 60);

    // Plain loops, no shared code with the library path.
    std::vector<double> hidden(3, 0.0);
    for (std::size_t j = 0; j < 3; ++j) {
        double z = m.biases[0](0, j);
        for (std::size_t k = 0; k < 60; ++k) {
            z += x(0, k) * m.weights[0](k, j);
        }
        hidden[j] = z > 0 ? z : 0;
    }
    std::vector<double> out(4, 0.0);
    for (std::size_t j = 0; j < 4; ++j) {
        double z = m.biases[1](0, j);
        for (std::size_t k = 0; k < 3; ++k) {
            z += hidden[k] * m.weights[1](k, j);
        }
        out[j] = 1.0 / (1.0 + std::exp(-z));
    }

    const Matrix y = mlp_forward(m, x);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(y(0, j) == doctest::Approx(out[j]).epsilon(1e-12));
    }
}

TEST_CASE("models reject wrong batch width") {
    MlpModel m = make_mlp({5}, 1);
    CHECK_THROWS_AS(mlp_forward(m, Matrix(2, 59)), DimensionError);
    LstmModel l = make_lstm(2, 1);
    CHECK_THROWS_AS(lstm_forward(l, Matrix(2, 59)), DimensionError);
}

TEST_CASE("mlp gradients match finite differences across seeds and batch sizes") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        for (std::size_t batch : {1u, 8u}) {
            for (LossKind kind : {LossKind::bce, LossKind::mse}) {
                MlpModel m = make_mlp({6, 5}, seed * 31 + 7, kind);
                Rng rng(seed * 11 + 1);
                const Matrix x = random_matrix(rng, batch, 60);
                const Matrix t = random_targets(rng, batch);
                check_gradients(
                    m, [](const MlpModel& mm, const Matrix& xx) { return mlp_forward(mm, xx); },
                    [](const MlpModel& mm, const Matrix& xx, const Matrix& tt) {
                        return mlp_backward(mm, xx, tt);
                    },
                    x, t);
            }
        }
    }
}

TEST_CASE("zero mse loss gives zero gradients") {
    MlpModel m = make_mlp({5}, 9, LossKind::mse);
    Rng rng(10);
    const Matrix x = random_matrix(rng, 3, 60);
    const Matrix t = mlp_forward(m, x); // targets equal predictions
    const auto back = mlp_backward(m, x, t);
    for (const auto* g : collect_grads(back.grads)) {
        for (std::size_t i = 0; i < g->size(); ++i) {
            CHECK(g->data()[i] == 0.0);
        }
    }
}

TEST_CASE("duplicating every batch row leaves mean-reduced gradients unchanged") {
    MlpModel m = make_mlp({6}, 12);
    Rng rng(13);
    const Matrix x = random_matrix(rng, 4, 60);
    const Matrix t = random_targets(rng, 4);

    Matrix x2(8, 60);
    Matrix t2(8, 4);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 60; ++c) {
            x2(r, c) = x2(r + 4, c) = x(r, c);
        }
        for (std::size_t c = 0; c < 4; ++c) {
            t2(r, c) = t2(r + 4, c) = t(r, c);
        }
    }
    const auto g1 = mlp_backward(m, x, t);
    const auto g2 = mlp_backward(m, x2, t2);
    const auto list1 = collect_grads(g1.grads);
    const auto list2 = collect_grads(g2.grads);
    for (std::size_t b = 0; b < list1.size(); ++b) {
        for (std::size_t i = 0; i < list1[b]->size(); ++i) {
            CHECK(list1[b]->data()[i] ==
                  doctest::Approx(list2[b]->data()[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("lstm with zero parameters outputs 0.5") {
    LstmModel m = make_lstm(2, 1);
    for (auto& cell : m.cells) {
        for (std::size_t g = 0; g < 4; ++g) {
            cell.wx[g] = Matrix(cell.wx[g].rows(), cell.wx[g].cols(), 0.0);
            cell.wh[g] = Matrix(cell.wh[g].rows(), cell.wh[g].cols(), 0.0);
        }
    }
    Rng rng(14);
    const Matrix x = random_matrix(rng, 2, 60);
    const Matrix y = lstm_forward(m, x);
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(y.data()[i] == 0.5);
    }
}

TEST_CASE("saturated forget gate still leaves the cell state at zero") {
    LstmModel m = make_lstm(1, 1);
    for (auto& cell : m.cells) {
        for (std::size_t g = 0; g < 4; ++g) {
            cell.wx[g] = Matrix(cell.wx[g].rows(), cell.wx[g].cols(), 0.0);
            cell.wh[g] = Matrix(cell.wh[g].rows(), cell.wh[g].cols(), 0.0);
        }
        cell.b[kGateF] = Matrix(1, cell.b[kGateF].cols(), 20.0);
    }
    Rng rng(15);
    const Matrix x = random_matrix(rng, 3, 60, -5.0, 5.0);
    const Matrix y = lstm_forward(m, x);
    // c = i*g with g = tanh(0) = 0, so h = 0 and the output sits at 0.5.
    for (std::size_t i = 0; i < y.size(); ++i) {
        CHECK(std::abs(y.data()[i] - 0.5) < 1e-6);
    }
}

TEST_CASE("1-cell lstm matches a hand-computed oracle") {
    LstmModel m = make_lstm(1, 21);
    Rng rng(22);
    const Matrix x = random_matrix(rng, 1, 60);

    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    double out[4];
    for (std::size_t j = 0; j < 4; ++j) {
        double zi = m.cells[0].b[kGateI](0, j);
        double zg = m.cells[0].b[kGateG](0, j);
        double zo = m.cells[0].b[kGateO](0, j);
        for (std::size_t k = 0; k < 60; ++k) {
            zi += x(0, k) * m.cells[0].wx[kGateI](k, j);
            zg += x(0, k) * m.cells[0].wx[kGateG](k, j);
            zo += x(0, k) * m.cells[0].wx[kGateO](k, j);
        }
        const double c = sig(zi) * std::tanh(zg);
        const double h = sig(zo) * std::tanh(c);
        out[j] = sig(h);
    }

    const Matrix y = lstm_forward(m, x);
    for (std::size_t j = 0; j < 4; ++j) {
        CHECK(y(0, j) == doctest::Approx(out[j]).epsilon(1e-12));
    }
}

TEST_CASE("lstm gradients match finite differences for both modes") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        for (std::size_t batch : {1u, 8u}) {
            LstmModel stacked = make_lstm(2, seed * 17 + 3, LstmMode::stacked);
            Rng rng(seed * 5 + 2);
            const Matrix x = random_matrix(rng, batch, 60);
            const Matrix t = random_targets(rng, batch);
            check_gradients(
                stacked,
                [](const LstmModel& mm, const Matrix& xx) { return lstm_forward(mm, xx); },
                [](const LstmModel& mm, const Matrix& xx, const Matrix& tt) {
                    return lstm_backward(mm, xx, tt);
                },
                x, t);

            LstmModel wide = make_lstm(6, seed * 17 + 5, LstmMode::wide, LossKind::bce);
            check_gradients(
                wide,
                [](const LstmModel& mm, const Matrix& xx) { return lstm_forward(mm, xx); },
                [](const LstmModel& mm, const Matrix& xx, const Matrix& tt) {
                    return lstm_backward(mm, xx, tt);
                },
                x, t);
        }
    }
}

TEST_CASE("accuracy modes") {
    Matrix t(4, 4);
    t(0, 0) = t(1, 1) = t(2, 2) = t(3, 3) = 1.0;
    Matrix p = t;
    CHECK(accuracy(p, t, AccuracyMode::argmax) == 1.0);
    CHECK(accuracy(p, t, AccuracyMode::elementwise) == 1.0);

    // one wrong row of four: argmax 0.75, elementwise 14/16
    p(3, 3) = 0.0;
    p(3, 0) = 1.0;
    CHECK(accuracy(p, t, AccuracyMode::argmax) == 0.75);
    CHECK(accuracy(p, t, AccuracyMode::elementwise) == 0.875);

    // uniform rows tie to index 0
    Matrix u(2, 4, 0.25);
    Matrix tt(2, 4);
    tt(0, 0) = 1.0;
    tt(1, 2) = 1.0;
    CHECK(accuracy(u, tt, AccuracyMode::argmax) == 0.5);
}

TEST_CASE("train requires sane config and partitions") {
    Rng rng(30);
    Dataset data = toy_dataset(rng, 60);
    MlpModel m = make_mlp({5}, 1);
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train(m, data, cfg), DataError);
    cfg.epochs = 1;
    cfg.batch = 0;
    CHECK_THROWS_AS(train(m, data, cfg), DataError);
}

TEST_CASE("one epoch with batch >= N performs exactly one update") {
    Rng rng(33);
    Dataset data = toy_dataset(rng, 40);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 1000;
    cfg.shuffle_each_epoch = false;

    MlpModel trained = make_mlp({5}, 77);
    const MlpModel before = trained;
    train(trained, data, cfg);

    // Reproduce by hand: one backward over the whole train partition, one
    // Adam step.
    std::vector<Window> train_rows;
    for (std::size_t i = 0; i < data.windows.size(); ++i) {
        if (data.tags[i] == Partition::train) {
            train_rows.push_back(data.windows[i]);
        }
    }
    MlpModel manual = before;
    const Matrix x = window_features(train_rows);
    const Matrix t = encode_targets(train_rows);
    auto back = mlp_backward(manual, x, t);
    AdamState adam;
    std::vector<ParamGrad> blocks;
    for (std::size_t i = 0; i < manual.weights.size(); ++i) {
        blocks.push_back({"w", &manual.weights[i], &back.grads.weights[i]});
        blocks.push_back({"b", &manual.biases[i], &back.grads.biases[i]});
    }
    adam.step(blocks);

    for (std::size_t i = 0; i < manual.weights.size(); ++i) {
        CHECK(trained.weights[i] == manual.weights[i]);
        CHECK(trained.biases[i] == manual.biases[i]);
    }
}

TEST_CASE("training loss is non-increasing on a separable toy task") {
    Rng rng(35);
    Dataset data = toy_dataset(rng, 200);
    MlpModel m = make_mlp({8}, 5);
    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch = 32;
    cfg.shuffle_seed = 9;
    const TrainTrace trace = train(m, data, cfg);
    REQUIRE(trace.epochs.size() == 30);
    for (std::size_t e = 5; e + 1 < trace.epochs.size(); ++e) {
        CHECK(trace.epochs[e + 1].train_loss <= trace.epochs[e].train_loss + 1e-9);
    }
    CHECK(trace.epochs.back().train_acc > 0.95);
}

TEST_CASE("same seed and data give bit-identical saved models") {
    Rng rng(40);
    Dataset data = toy_dataset(rng, 80);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch = 16;
    cfg.shuffle_seed = 77;

    auto run = [&](const std::string& path) {
        MlpModel m = make_mlp({6}, 123);
        train(m, data, cfg);
        save_model(m, path);
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string a = run("/tmp/smokegram_det_a.mdl");
    const std::string b = run("/tmp/smokegram_det_b.mdl");
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("model save/load round-trips bit-exactly") {
    MlpModel m = make_mlp({12, 8}, 91);
    m.meta.split_seed = 5;
    m.meta.normalize = true;
    const std::string path = "/tmp/smokegram_roundtrip.mdl";
    save_model(m, path);
    const MlpModel back = load_mlp(path);
    REQUIRE(back.weights.size() == m.weights.size());
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
        CHECK(back.weights[i] == m.weights[i]);
        CHECK(back.biases[i] == m.biases[i]);
    }
    CHECK(back.meta.normalize == true);
    CHECK(back.meta.split_seed == 5);
    CHECK(back.meta.feature_order == m.meta.feature_order);

    Rng rng(44);
    const Matrix x = random_matrix(rng, 5, 60);
    CHECK(mlp_forward(m, x) == mlp_forward(back, x));

    LstmModel l = make_lstm(3, 17);
    save_model(l, path);
    const LstmModel lback = load_lstm(path);
    REQUIRE(lback.cells.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t g = 0; g < 4; ++g) {
            CHECK(lback.cells[c].wx[g] == l.cells[c].wx[g]);
        }
    }
    CHECK(lstm_forward(l, x) == lstm_forward(lback, x));
}

TEST_CASE("model load failures are distinct") {
    MlpModel m = make_mlp({5}, 3);
    const std::string path = "/tmp/smokegram_corrupt.mdl";
    save_model(m, path);

    // corrupt one parameter digit -> checksum error
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        const auto pos = text.find("0.");
        REQUIRE(pos != std::string::npos);
        text[pos + 2] = text[pos + 2] == '5' ? '6' : '5';
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    CHECK_THROWS_AS(load_model(path), ModelChecksumError);

    // truncated file (checksum line gone)
    save_model(m, path);
    {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        text.resize(text.rfind("checksum"));
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    CHECK_THROWS_AS(load_model(path), ModelTruncatedError);

    // family mismatch
    save_model(m, path);
    CHECK_THROWS_AS(load_lstm(path), ModelFamilyError);

    // unsupported version
    {
        std::string text = "smokegram-model v99\nfamily mlp\n";
        text += "checksum " + std::string(16, '0') + "\n";
        // fix the checksum so only the version is wrong
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    CHECK_THROWS(load_model(path));

    CHECK_THROWS_AS(load_model("/tmp/does_not_exist.mdl"), MissingFileError);
}

TEST_CASE("forward passes are pure") {
    MlpModel m = make_mlp({12, 8}, 50);
    Rng rng(51);
    const Matrix x = random_matrix(rng, 7, 60);
    CHECK(mlp_forward(m, x) == mlp_forward(m, x));
    LstmModel l = make_lstm(2, 52);
    CHECK(lstm_forward(l, x) == lstm_forward(l, x));
}
