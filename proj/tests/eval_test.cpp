#include "doctest.h"

#include <fstream>
#include <sstream>

#include "smokegram/errors.hpp"
#include "smokegram/eval.hpp"

using namespace smokegram;

namespace {

// Reference confusion matrices used as fixed test vectors, rows = actual.
constexpr std::size_t kAnnMatrix[4][4] = {
    {1125, 5, 9, 3},
    {14, 1021, 11, 0},
    {59, 7, 930, 9},
    {25, 10, 0, 1018},
};
constexpr std::size_t kLstmMatrix[4][4] = {
    {1090, 7, 33, 12},
    {17, 1017, 12, 0},
    {43, 23, 929, 10},
    {10, 25, 24, 994},
};

ConfusionMatrix make_cm(const std::size_t m[4][4]) {
    ConfusionMatrix cm;
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            cm.counts[r][c] = m[r][c];
        }
    }
    return cm;
}

} // namespace

TEST_CASE("confusion counts pairs and rejects bad input") {
    const auto cm = confusion({1, 2, 2, 4}, {1, 2, 3, 4});
    CHECK(cm.counts[0][0] == 1);
    CHECK(cm.counts[1][1] == 1);
    CHECK(cm.counts[2][1] == 1); // actual 3 predicted 2
    CHECK(cm.counts[3][3] == 1);
    CHECK(cm.total() == 4);

    CHECK(confusion({}, {}).total() == 0);
    CHECK_THROWS_AS(confusion({1}, {1, 2}), DataError);
    CHECK_THROWS_AS(confusion({5}, {1}), DataError);
}

TEST_CASE("confusion built from an explicit pair multiset reproduces the ANN matrix") {
    std::vector<int> predicted;
    std::vector<int> actual;
    for (int a = 0; a < 4; ++a) {
        for (int p = 0; p < 4; ++p) {
            for (std::size_t k = 0; k < kAnnMatrix[a][p]; ++k) {
                actual.push_back(a + 1);
                predicted.push_back(p + 1);
            }
        }
    }
    const auto cm = confusion(predicted, actual);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(cm.counts[r][c] == kAnnMatrix[r][c]);
        }
    }
    CHECK(cm.total() == 4246);
    CHECK(cm.trace() == 4094);
}

TEST_CASE("report reproduces the reference ANN table to two decimals") {
    const auto r = report(make_cm(kAnnMatrix));

    CHECK(round2(r.per_class[0].precision) == 0.92);
    CHECK(round2(r.per_class[0].recall) == 0.99);
    CHECK(round2(r.per_class[0].f1) == 0.95);
    CHECK(r.per_class[0].support == 1142);

    CHECK(round2(r.per_class[1].precision) == 0.98);
    CHECK(round2(r.per_class[1].recall) == 0.98);
    CHECK(round2(r.per_class[1].f1) == 0.98);
    CHECK(r.per_class[1].support == 1046);

    CHECK(round2(r.per_class[2].precision) == 0.98);
    CHECK(round2(r.per_class[2].recall) == 0.93);
    CHECK(round2(r.per_class[2].f1) == 0.95);
    CHECK(r.per_class[2].support == 1005);

    CHECK(round2(r.per_class[3].precision) == 0.99);
    CHECK(round2(r.per_class[3].recall) == 0.97);
    CHECK(round2(r.per_class[3].f1) == 0.98);
    CHECK(r.per_class[3].support == 1053);

    CHECK(round2(r.micro.precision) == 0.96);
    CHECK(round2(r.micro.recall) == 0.96);
    CHECK(round2(r.micro.f1) == 0.96);
    CHECK(r.micro.support == 4246);

    CHECK(round2(r.macro.precision) == 0.97);
    CHECK(round2(r.macro.recall) == 0.96);
    CHECK(round2(r.macro.f1) == 0.96);

    CHECK(round2(r.weighted.precision) == 0.97);
    CHECK(round2(r.weighted.recall) == 0.96);
    CHECK(round2(r.weighted.f1) == 0.96);

    CHECK(r.accuracy == doctest::Approx(4094.0 / 4246.0).epsilon(1e-12));
}

TEST_CASE("report reproduces the reference LSTM table to two decimals") {
    const auto r = report(make_cm(kLstmMatrix));

    CHECK(round2(r.per_class[0].precision) == 0.94);
    CHECK(round2(r.per_class[0].recall) == 0.95);
    CHECK(round2(r.per_class[0].f1) == 0.95);

    CHECK(round2(r.per_class[1].precision) == 0.95);
    CHECK(round2(r.per_class[1].recall) == 0.97);
    CHECK(round2(r.per_class[1].f1) == 0.96);

    CHECK(round2(r.per_class[2].precision) == 0.93);
    CHECK(round2(r.per_class[2].recall) == 0.92);
    CHECK(round2(r.per_class[2].f1) == 0.93);

    CHECK(round2(r.per_class[3].precision) == 0.98);
    CHECK(round2(r.per_class[3].recall) == 0.94);
    CHECK(round2(r.per_class[3].f1) == 0.96);

    for (double v : {r.micro.precision, r.micro.recall, r.micro.f1, r.macro.precision,
                     r.macro.recall, r.macro.f1, r.weighted.precision, r.weighted.recall,
                     r.weighted.f1}) {
        CHECK(round2(v) == 0.95);
    }
    CHECK(r.accuracy == doctest::Approx(4030.0 / 4246.0).epsilon(1e-12));
}

TEST_CASE("diagonal matrix gives all-ones metrics") {
    ConfusionMatrix cm;
    cm.counts[0][0] = 10;
    cm.counts[1][1] = 5;
    cm.counts[2][2] = 7;
    cm.counts[3][3] = 1;
    const auto r = report(cm);
    for (const auto& m : r.per_class) {
        CHECK(m.precision == 1.0);
        CHECK(m.recall == 1.0);
        CHECK(m.f1 == 1.0);
    }
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("report(confusion(x, x)) is all ones for any non-empty x") {
    const std::vector<int> x = {1, 2, 2, 3, 4, 4, 4, 1};
    const auto r = report(confusion(x, x));
    for (const auto& m : r.per_class) {
        if (m.support > 0) {
            CHECK(m.precision == 1.0);
            CHECK(m.recall == 1.0);
        }
    }
    CHECK(r.accuracy == 1.0);
}

TEST_CASE("micro equals trace over N and supports sum to N") {
    const auto cm = make_cm(kLstmMatrix);
    const auto r = report(cm);
    CHECK(r.micro.precision == doctest::Approx(static_cast<double>(cm.trace()) /
                                               static_cast<double>(cm.total())));
    std::size_t support_sum = 0;
    for (const auto& m : r.per_class) {
        support_sum += m.support;
    }
    CHECK(support_sum == cm.total());
}

TEST_CASE("report rejects an empty matrix") {
    CHECK_THROWS_AS(report(ConfusionMatrix{}), DataError);
}

TEST_CASE("rounding is half-up to two decimals") {
    CHECK(round2(0.955) == 0.96);
    CHECK(round2(0.954999) == 0.95);
    CHECK(round2(0.96419) == 0.96);
    CHECK(round2(0.965) == 0.97);
    CHECK(round2(0.0) == 0.0);
    CHECK(round2(1.0) == 1.0);
}

TEST_CASE("report csv layout") {
    std::ostringstream out;
    write_report_csv(out, report(make_cm(kAnnMatrix)));
    std::istringstream in(out.str());
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    REQUIRE(lines.size() == 8); // header + 4 classes + 3 averages
    CHECK(lines[0] == "class,precision,recall,f1,support");
    CHECK(lines[1] == "0,0.92,0.99,0.95,1142");
    CHECK(lines[5] == "micro avg,0.96,0.96,0.96,4246");
    CHECK(lines[6] == "macro avg,0.97,0.96,0.96,4246");
    CHECK(lines[7] == "weighted avg,0.97,0.96,0.96,4246");
}

TEST_CASE("curve export writes one row per epoch and round-trips") {
    TrainTrace trace;
    trace.epochs = {{0.9, 1.0, 0.5, 0.4}, {0.5, 0.6, 0.7, 0.6}, {0.3, 0.45, 0.8, 0.7}};
    std::ostringstream out;
    export_curves(out, trace);
    std::istringstream counter(out.str());
    std::string line;
    std::size_t n = 0;
    while (std::getline(counter, line)) {
        ++n;
    }
    CHECK(n == 4);

    const std::string path = "/tmp/smokegram_curves.csv";
    export_curves_file(path, trace);
    const TrainTrace back = read_curves_file(path);
    REQUIRE(back.epochs.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.epochs[i].train_loss == trace.epochs[i].train_loss);
        CHECK(back.epochs[i].val_loss == trace.epochs[i].val_loss);
        CHECK(back.epochs[i].train_acc == trace.epochs[i].train_acc);
        CHECK(back.epochs[i].val_acc == trace.epochs[i].val_acc);
    }

    // a monotone trace stays monotone across the round trip
    TrainTrace mono;
    for (int i = 0; i < 10; ++i) {
        mono.epochs.push_back({1.0 / (i + 1.0), 1.1 / (i + 1.0), 0.0, 0.0});
    }
    export_curves_file(path, mono);
    const TrainTrace mback = read_curves_file(path);
    for (std::size_t i = 1; i < mback.epochs.size(); ++i) {
        CHECK(mback.epochs[i].train_loss < mback.epochs[i - 1].train_loss);
    }

    TrainTrace empty;
    std::ostringstream sink;
    CHECK_THROWS_AS(export_curves(sink, empty), DataError);
}
