#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "smokegram/models.hpp"

namespace smokegram {

// 4x4 counts; rows = actual class, columns = predicted class, both in the
// order non-smoking, hand-to-lip, hand-on-lip, hand-off-lip.
struct ConfusionMatrix {
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts = {};

    std::size_t total() const;
    std::size_t trace() const;
    std::size_t row_sum(std::size_t r) const;
    std::size_t col_sum(std::size_t c) const;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

struct MetricsReport {
    std::array<ClassMetrics, kNumClasses> per_class;
    ClassMetrics micro; // micro precision = recall = f1 = argmax accuracy
    ClassMetrics macro;
    ClassMetrics weighted;
    double accuracy = 0.0;
};

// classes in {1..4}; throws DataError on length mismatch or bad class ids.
ConfusionMatrix confusion(const std::vector<int>& predicted,
                          const std::vector<int>& actual);

// precision_c = diag/colsum (0 when the column is empty), recall_c =
// diag/rowsum, f1 = harmonic mean (0 when both are 0); micro = trace/N,
// macro = plain class mean, weighted = support-weighted mean.
MetricsReport report(const ConfusionMatrix& cm);

// Half-up to two decimals, the convention used for displayed metrics.
double round2(double v);

// CSV mirroring the per-class report table:
// class,precision,recall,f1,support with rows 0..3 then micro/macro/weighted.
void write_report_csv(std::ostream& out, const MetricsReport& r);
void write_report_csv_file(const std::string& path, const MetricsReport& r);

// CSV "epoch,train_loss,val_loss,train_acc,val_acc", one row per epoch.
void export_curves(std::ostream& out, const TrainTrace& trace);
void export_curves_file(const std::string& path, const TrainTrace& trace);
TrainTrace read_curves_file(const std::string& path);

} // namespace smokegram
