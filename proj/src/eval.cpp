#include "smokegram/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "smokegram/errors.hpp"
#include "smokegram/textio.hpp"

namespace smokegram {

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts) {
        for (std::size_t v : row) {
            n += v;
        }
    }
    return n;
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        n += counts[i][i];
    }
    return n;
}

std::size_t ConfusionMatrix::row_sum(std::size_t r) const {
    std::size_t n = 0;
    for (std::size_t v : counts[r]) {
        n += v;
    }
    return n;
}

std::size_t ConfusionMatrix::col_sum(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < kNumClasses; ++r) {
        n += counts[r][c];
    }
    return n;
}

ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& actual) {
    if (predicted.size() != actual.size()) {
        throw DataError("confusion: " + std::to_string(predicted.size()) +
                        " predictions vs " + std::to_string(actual.size()) + " actuals");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const int p = predicted[i];
        const int a = actual[i];
        if (p < 1 || p > kNumClasses || a < 1 || a > kNumClasses) {
            throw DataError("confusion: class outside {1,2,3,4} at index " +
                            std::to_string(i));
        }
        ++cm.counts[static_cast<std::size_t>(a - 1)][static_cast<std::size_t>(p - 1)];
    }
    return cm;
}

MetricsReport report(const ConfusionMatrix& cm) {
    const std::size_t n = cm.total();
    if (n == 0) {
        throw DataError("report: empty confusion matrix");
    }
    MetricsReport r;
    double macro_p = 0.0;
    double macro_r = 0.0;
    double macro_f = 0.0;
    double weighted_p = 0.0;
    double weighted_r = 0.0;
    double weighted_f = 0.0;

    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const auto diag = static_cast<double>(cm.counts[c][c]);
        const std::size_t col = cm.col_sum(c);
        const std::size_t row = cm.row_sum(c);
        ClassMetrics& m = r.per_class[c];
        m.support = row;
        m.precision = col == 0 ? 0.0 : diag / static_cast<double>(col);
        m.recall = row == 0 ? 0.0 : diag / static_cast<double>(row);
        m.f1 = (m.precision + m.recall) == 0.0
                   ? 0.0
                   : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        macro_p += m.precision;
        macro_r += m.recall;
        macro_f += m.f1;
        weighted_p += m.precision * static_cast<double>(m.support);
        weighted_r += m.recall * static_cast<double>(m.support);
        weighted_f += m.f1 * static_cast<double>(m.support);
    }

    const double micro = static_cast<double>(cm.trace()) / static_cast<double>(n);
    r.accuracy = micro;
    r.micro = {micro, micro, micro, n};
    r.macro = {macro_p / kNumClasses, macro_r / kNumClasses, macro_f / kNumClasses, n};
    r.weighted = {weighted_p / static_cast<double>(n), weighted_r / static_cast<double>(n),
                  weighted_f / static_cast<double>(n), n};
    return r;
}

double round2(double v) {
    return std::floor(v * 100.0 + 0.5) / 100.0;
}

namespace {

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", round2(v));
    return std::string(buf);
}

void emit_metrics_row(std::ostream& out, const std::string& name, const ClassMetrics& m) {
    out << name << ',' << fixed2(m.precision) << ',' << fixed2(m.recall) << ','
        << fixed2(m.f1) << ',' << m.support << '\n';
}

} // namespace

void write_report_csv(std::ostream& out, const MetricsReport& r) {
    out << "class,precision,recall,f1,support\n";
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        emit_metrics_row(out, std::to_string(c), r.per_class[c]);
    }
    emit_metrics_row(out, "micro avg", r.micro);
    emit_metrics_row(out, "macro avg", r.macro);
    emit_metrics_row(out, "weighted avg", r.weighted);
}

void write_report_csv_file(const std::string& path, const MetricsReport& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + path + "'");
    }
    write_report_csv(out, r);
}

void export_curves(std::ostream& out, const TrainTrace& trace) {
    if (trace.epochs.empty()) {
        throw DataError("export_curves: empty trace");
    }
    out << "epoch,train_loss,val_loss,train_acc,val_acc\n";
    for (std::size_t i = 0; i < trace.epochs.size(); ++i) {
        const EpochStats& e = trace.epochs[i];
        out << (i + 1) << ',' << textio::format_double(e.train_loss) << ','
            << textio::format_double(e.val_loss) << ','
            << textio::format_double(e.train_acc) << ','
            << textio::format_double(e.val_acc) << '\n';
    }
}

void export_curves_file(const std::string& path, const TrainTrace& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + path + "'");
    }
    export_curves(out, trace);
}

TrainTrace read_curves_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) ||
        textio::trim(line) != "epoch,train_loss,val_loss,train_acc,val_acc") {
        throw ParseError(path + ": unexpected curves header");
    }
    TrainTrace trace;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto trimmed = textio::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto fields = textio::split(trimmed, ',');
        if (fields.size() != 5) {
            throw ParseError(path + ": line " + std::to_string(lineno) +
                             ": expected 5 columns");
        }
        const std::string ctx = path + ": line " + std::to_string(lineno);
        EpochStats e;
        e.train_loss = textio::parse_double(fields[1], ctx);
        e.val_loss = textio::parse_double(fields[2], ctx);
        e.train_acc = textio::parse_double(fields[3], ctx);
        e.val_acc = textio::parse_double(fields[4], ctx);
        trace.epochs.push_back(e);
    }
    return trace;
}

} // namespace smokegram
