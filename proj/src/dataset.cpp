#include "smokegram/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "smokegram/errors.hpp"
#include "smokegram/kvfile.hpp"
#include "smokegram/rng.hpp"
#include "smokegram/textio.hpp"
#include "smokegram/version.hpp"

namespace smokegram {
namespace {

void require_label(int label, const std::string& context) {
    if (label < 1 || label > kNumClasses) {
        throw DataError(context + ": label " + std::to_string(label) +
                        " outside {1,2,3,4}");
    }
}

} // namespace

const char* to_string(Partition p) {
    switch (p) {
    case Partition::train:
        return "train";
    case Partition::val:
        return "val";
    default:
        return "test";
    }
}

const char* to_string(LeakMode m) {
    return m == LeakMode::paper ? "paper" : "no_leak";
}

LeakMode leak_mode_from_string(const std::string& s) {
    if (s == "paper") {
        return LeakMode::paper;
    }
    if (s == "no_leak") {
        return LeakMode::no_leak;
    }
    throw DataError("unknown leak mode '" + s + "'");
}

std::vector<const Window*> Dataset::partition(Partition p) const {
    std::vector<const Window*> out;
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (tags[i] == p) {
            out.push_back(&windows[i]);
        }
    }
    return out;
}

std::array<std::size_t, 3> Dataset::partition_sizes() const {
    std::array<std::size_t, 3> sizes = {0, 0, 0};
    for (Partition t : tags) {
        ++sizes[static_cast<std::size_t>(t)];
    }
    return sizes;
}

SampleStream ingest_csv(std::istream& in, const std::string& id,
                        const IngestOptions& options) {
    SampleStream stream;
    stream.id = id;

    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(id + ": empty file");
    }
    const auto header = textio::split(textio::trim(line), ',');
    bool has_label_col = false;
    if (header.size() == 5 && header[0] == "t" && header[4] == "label") {
        has_label_col = true;
    } else if (header.size() != 4 || header[0] != "t") {
        throw ParseError(id + ": line 1: expected header 't,x,y,z[,label]'");
    }
    if (options.require_labels && !has_label_col) {
        throw DataError(id + ": labels required but no label column present");
    }

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        const auto trimmed = textio::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        const auto fields = textio::split(trimmed, ',');
        const std::size_t expected = has_label_col ? 5 : 4;
        if (fields.size() != expected) {
            throw ParseError(id + ": line " + std::to_string(lineno) + ": expected " +
                             std::to_string(expected) + " columns, got " +
                             std::to_string(fields.size()));
        }
        const std::string ctx = id + ": line " + std::to_string(lineno);
        Sample s;
        s.t = textio::parse_double(textio::trim(fields[0]), ctx);
        s.ax = textio::parse_double(textio::trim(fields[1]), ctx);
        s.ay = textio::parse_double(textio::trim(fields[2]), ctx);
        s.az = textio::parse_double(textio::trim(fields[3]), ctx);
        if (has_label_col) {
            const auto lab = textio::trim(fields[4]);
            if (!lab.empty()) {
                s.label = static_cast<int>(textio::parse_int(lab, ctx));
                require_label(s.label, ctx);
            } else if (options.require_labels) {
                throw DataError(ctx + ": missing label");
            }
        }
        if (!stream.samples.empty() && s.t <= stream.samples.back().t) {
            throw DataError(id + ": line " + std::to_string(lineno) +
                            ": timestamps not strictly increasing");
        }
        stream.samples.push_back(s);
    }

    stream.labeled = has_label_col;
    stream.sample_rate_hz = options.expected_rate_hz;
    if (stream.samples.size() >= 2 && !options.allow_any_rate) {
        const double span = stream.samples.back().t - stream.samples.front().t;
        const double rate = static_cast<double>(stream.samples.size() - 1) / span;
        if (std::abs(rate - options.expected_rate_hz) > 0.01 * options.expected_rate_hz) {
            throw DataError(id + ": sample rate " + textio::format_double(rate) +
                            " Hz differs from expected " +
                            textio::format_double(options.expected_rate_hz) +
                            " Hz (pass allow_any_rate to override)");
        }
    }
    return stream;
}

SampleStream ingest_csv_file(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("cannot open '" + path + "'");
    }
    return ingest_csv(in, path, options);
}

void export_csv(std::ostream& out, const SampleStream& stream) {
    if (stream.labeled) {
        out << "t,x,y,z,label\n";
    } else {
        out << "t,x,y,z\n";
    }
    for (const Sample& s : stream.samples) {
        out << textio::format_double(s.t) << ',' << textio::format_double(s.ax) << ','
            << textio::format_double(s.ay) << ',' << textio::format_double(s.az);
        if (stream.labeled) {
            out << ',' << s.label;
        }
        out << '\n';
    }
}

void export_csv_file(const std::string& path, const SampleStream& stream) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + path + "'");
    }
    export_csv(out, stream);
}

std::vector<Window> extract_windows(const SampleStream& stream,
                                    const WindowOptions& options) {
    if (options.window == 0 || options.stride == 0) {
        throw DataError("extract_windows: window and stride must be positive");
    }
    std::vector<Window> out;
    const std::size_t n = stream.samples.size();
    if (n < options.window) {
        return out;
    }
    for (std::size_t start = 0; start + options.window <= n; start += options.stride) {
        Window w;
        w.origin = {stream.id, start};
        w.features.reserve(3 * options.window);

        std::array<std::size_t, kNumClasses + 1> counts = {};
        for (std::size_t i = start; i < start + options.window; ++i) {
            const Sample& s = stream.samples[i];
            if (s.label < 1 || s.label > kNumClasses) {
                throw DataError(stream.id + ": sample " + std::to_string(i) +
                                " has no label; cannot build labeled windows");
            }
            ++counts[static_cast<std::size_t>(s.label)];
            w.features.push_back(s.ax);
            w.features.push_back(s.ay);
            w.features.push_back(s.az);
        }

        // Majority label; ties go to the smoking class with the lower id.
        std::size_t best_count = 0;
        for (int c = 1; c <= kNumClasses; ++c) {
            best_count = std::max(best_count, counts[static_cast<std::size_t>(c)]);
        }
        int label = kNonSmoking;
        for (int c = kHandToLip; c <= kHandOffLip; ++c) {
            if (counts[static_cast<std::size_t>(c)] == best_count) {
                label = c;
                break;
            }
        }
        w.label = label;

        if (options.normalize) {
            double lo = w.features[0];
            double hi = w.features[0];
            for (double v : w.features) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const double span = hi - lo;
            if (span > 0.0) {
                for (double& v : w.features) {
                    v = (v - lo) / span;
                }
            } else {
                for (double& v : w.features) {
                    v = 0.0;
                }
            }
        }
        out.push_back(std::move(w));
    }
    return out;
}

InferenceWindows windows_for_inference(const SampleStream& stream,
                                       const WindowOptions& options) {
    if (options.window == 0 || options.stride == 0) {
        throw DataError("windows_for_inference: window and stride must be positive");
    }
    InferenceWindows out;
    const std::size_t n = stream.samples.size();
    if (n < options.window) {
        return out;
    }
    const std::size_t count = (n - options.window) / options.stride + 1;
    out.features = Matrix(count, 3 * options.window);
    out.origins.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        const std::size_t start = w * options.stride;
        out.origins.push_back({stream.id, start});
        double* row = out.features.row_ptr(w);
        for (std::size_t i = 0; i < options.window; ++i) {
            const Sample& s = stream.samples[start + i];
            row[3 * i] = s.ax;
            row[3 * i + 1] = s.ay;
            row[3 * i + 2] = s.az;
        }
        if (options.normalize) {
            double lo = row[0];
            double hi = row[0];
            for (std::size_t i = 0; i < 3 * options.window; ++i) {
                lo = std::min(lo, row[i]);
                hi = std::max(hi, row[i]);
            }
            const double span = hi - lo;
            for (std::size_t i = 0; i < 3 * options.window; ++i) {
                row[i] = span > 0.0 ? (row[i] - lo) / span : 0.0;
            }
        }
    }
    return out;
}

std::vector<Window> balance(const std::vector<Window>& windows, std::size_t factor,
                            const std::vector<int>& classes) {
    if (factor == 0) {
        throw DataError("balance: factor must be >= 1");
    }
    std::vector<Window> out = windows;
    if (factor == 1) {
        return out;
    }
    for (const Window& w : windows) {
        if (std::find(classes.begin(), classes.end(), w.label) != classes.end()) {
            for (std::size_t i = 1; i < factor; ++i) {
                out.push_back(w);
            }
        }
    }
    return out;
}

Matrix encode_targets(const std::vector<Window>& windows) {
    Matrix targets(windows.size(), kNumClasses);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        require_label(windows[i].label, "encode_targets: window " + std::to_string(i));
        targets(i, static_cast<std::size_t>(windows[i].label - 1)) = 1.0;
    }
    return targets;
}

Matrix window_features(const std::vector<Window>& windows) {
    if (windows.empty()) {
        return Matrix();
    }
    const std::size_t width = windows[0].features.size();
    Matrix feats(windows.size(), width);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        if (windows[i].features.size() != width) {
            throw DimensionError("window_features: inconsistent feature widths");
        }
        for (std::size_t j = 0; j < width; ++j) {
            feats(i, j) = windows[i].features[j];
        }
    }
    return feats;
}

std::array<std::size_t, 3> partition_sizes_for(std::size_t n,
                                               const std::array<double, 3>& ratios) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9) {
        throw DataError("split: ratios must sum to 1");
    }
    // The epsilon keeps exact products like 0.15*100 from landing just
    // below the integer they represent.
    const auto train = static_cast<std::size_t>(
        std::floor(ratios[0] * static_cast<double>(n) + 1e-9));
    const auto val = static_cast<std::size_t>(
        std::floor(ratios[1] * static_cast<double>(n) + 1e-9));
    return {train, val, n - train - val};
}

Dataset split_dataset(std::vector<Window> windows, const SplitSpec& spec) {
    Dataset ds;
    if (spec.leak_mode == LeakMode::paper) {
        windows = balance(windows, spec.balance_factor, spec.balance_classes);
    }
    if (windows.size() < 3) {
        throw DataError("split: need at least 3 windows, got " +
                        std::to_string(windows.size()));
    }

    std::vector<std::size_t> order(windows.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(spec.seed);
    rng.shuffle(order);

    const auto sizes = partition_sizes_for(windows.size(), spec.ratios);
    std::vector<Partition> tag_by_index(windows.size(), Partition::test);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        Partition p = Partition::test;
        if (pos < sizes[0]) {
            p = Partition::train;
        } else if (pos < sizes[0] + sizes[1]) {
            p = Partition::val;
        }
        tag_by_index[order[pos]] = p;
    }

    ds.windows = std::move(windows);
    ds.tags = std::move(tag_by_index);

    if (spec.leak_mode == LeakMode::no_leak && spec.balance_factor > 1) {
        std::vector<Window> extra;
        for (std::size_t i = 0; i < ds.windows.size(); ++i) {
            if (ds.tags[i] != Partition::train) {
                continue;
            }
            const Window& w = ds.windows[i];
            if (std::find(spec.balance_classes.begin(), spec.balance_classes.end(),
                          w.label) != spec.balance_classes.end()) {
                for (std::size_t c = 1; c < spec.balance_factor; ++c) {
                    extra.push_back(w);
                }
            }
        }
        for (auto& w : extra) {
            ds.windows.push_back(std::move(w));
            ds.tags.push_back(Partition::train);
        }
    }

    for (const Window& w : ds.windows) {
        ++ds.class_counts[static_cast<std::size_t>(w.label - 1)];
    }
    return ds;
}

void write_dataset_meta(const std::string& csv_path, const DatasetMeta& meta) {
    kv::File f;
    f.set_double("sample_rate_hz", meta.sample_rate_hz);
    f.set_int("window", static_cast<long long>(meta.window));
    f.set_int("stride", static_cast<long long>(meta.stride));
    f.set("feature_order", meta.feature_order.empty() ? kFeatureOrder : meta.feature_order);
    f.set("leak_mode", meta.leak_mode);
    f.set_uint("seed", meta.seed);
    f.write_file(csv_path + ".meta");
}

DatasetMeta read_dataset_meta(const std::string& csv_path, bool* found) {
    DatasetMeta meta;
    meta.feature_order = kFeatureOrder;
    std::ifstream probe(csv_path + ".meta");
    if (!probe) {
        if (found) {
            *found = false;
        }
        return meta;
    }
    probe.close();
    const kv::File f = kv::File::read_file(csv_path + ".meta");
    meta.sample_rate_hz = f.get_double("sample_rate_hz");
    meta.window = static_cast<std::size_t>(f.get_int("window"));
    meta.stride = static_cast<std::size_t>(f.get_int("stride"));
    meta.feature_order = f.get("feature_order");
    meta.leak_mode = f.get("leak_mode");
    meta.seed = f.get_uint("seed");
    if (found) {
        *found = true;
    }
    return meta;
}

} // namespace smokegram
