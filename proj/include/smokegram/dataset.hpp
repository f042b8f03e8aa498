#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "smokegram/matrix.hpp"

namespace smokegram {

// Gesture classes. 1-based ids are the on-disk and one-hot convention.
enum Gesture : int {
    kNonSmoking = 1,
    kHandToLip = 2,
    kHandOnLip = 3,
    kHandOffLip = 4,
};
inline constexpr int kNumClasses = 4;
inline constexpr double kDefaultSampleRateHz = 25.0;

struct Sample {
    double t = 0.0; // seconds since stream start
    double ax = 0.0;
    double ay = 0.0;
    double az = 0.0;
    int label = 0; // 0 = unlabeled, else 1..4
};

struct SampleStream {
    std::string id;
    std::vector<Sample> samples;
    double sample_rate_hz = kDefaultSampleRateHz;
    bool labeled = false;
};

struct WindowOrigin {
    std::string stream_id;
    std::size_t start_index = 0;
};

struct Window {
    std::vector<double> features; // 3 * window_size, interleaved x,y,z
    int label = 0;
    WindowOrigin origin;
};

enum class Partition { train, val, test };
const char* to_string(Partition p);

enum class LeakMode { paper, no_leak };
const char* to_string(LeakMode m);
LeakMode leak_mode_from_string(const std::string& s);

struct Dataset {
    std::vector<Window> windows;
    std::vector<Partition> tags; // one per window
    std::array<std::size_t, kNumClasses> class_counts = {};

    std::vector<const Window*> partition(Partition p) const;
    std::array<std::size_t, 3> partition_sizes() const;
};

struct IngestOptions {
    double expected_rate_hz = kDefaultSampleRateHz;
    bool allow_any_rate = false;
    bool require_labels = false;
};

// One stream per CSV file: header "t,x,y,z,label" (label column optional).
// Throws ParseError with the line number on malformed rows, DataError on
// non-monotone timestamps or an off-rate stream.
SampleStream ingest_csv(std::istream& in, const std::string& id,
                        const IngestOptions& options = {});
SampleStream ingest_csv_file(const std::string& path,
                             const IngestOptions& options = {});
void export_csv(std::ostream& out, const SampleStream& stream);
void export_csv_file(const std::string& path, const SampleStream& stream);

struct WindowOptions {
    std::size_t window = 20;
    std::size_t stride = 1;
    bool normalize = false; // per-window min-max scaling
};

// Rolling windows; label = majority of the member samples, ties broken
// toward the smoking class with the lower id. Streams shorter than one
// window yield an empty result.
std::vector<Window> extract_windows(const SampleStream& stream,
                                    const WindowOptions& options = {});

// Same windowing without labels, for inference on unlabeled streams.
struct InferenceWindows {
    Matrix features;
    std::vector<WindowOrigin> origins;
};
InferenceWindows windows_for_inference(const SampleStream& stream,
                                       const WindowOptions& options = {});

// Each window of a targeted class ends up `factor` times: originals keep
// their order, then copies grouped per original.
std::vector<Window> balance(const std::vector<Window>& windows, std::size_t factor = 30,
                            const std::vector<int>& classes = {kHandToLip, kHandOffLip});

// Row i = one-hot code of window i's label (1->1000, 2->0100, 3->0010, 4->0001).
Matrix encode_targets(const std::vector<Window>& windows);
Matrix window_features(const std::vector<Window>& windows);

// floor(r0*N), floor(r1*N), remainder.
std::array<std::size_t, 3> partition_sizes_for(std::size_t n,
                                               const std::array<double, 3>& ratios);

struct SplitSpec {
    std::array<double, 3> ratios = {0.70, 0.15, 0.15};
    std::uint64_t seed = 0;
    LeakMode leak_mode = LeakMode::paper;
    std::size_t balance_factor = 30;
    std::vector<int> balance_classes = {kHandToLip, kHandOffLip};
};

// paper mode: balance everything, shuffle, partition (duplicates may straddle
// partitions). no_leak mode: shuffle, partition, then duplicate only inside
// the training partition.
Dataset split_dataset(std::vector<Window> windows, const SplitSpec& spec);

// Sidecar metadata describing an exported stream (written next to the CSV).
struct DatasetMeta {
    double sample_rate_hz = kDefaultSampleRateHz;
    std::size_t window = 20;
    std::size_t stride = 1;
    std::string feature_order;
    std::string leak_mode = "paper";
    std::uint64_t seed = 0;
};
void write_dataset_meta(const std::string& csv_path, const DatasetMeta& meta);
// Missing sidecar is fine (defaults); a present one must parse.
DatasetMeta read_dataset_meta(const std::string& csv_path, bool* found = nullptr);

} // namespace smokegram
