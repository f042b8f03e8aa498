#pragma once

#include <cstdint>
#include <vector>

#include "smokegram/dataset.hpp"
#include "smokegram/grammar.hpp"

namespace smokegram {

// Parametric generator of labeled wrist-accelerometer streams: puffs (smooth
// arm-raise ramp, plateau at the mouth, mirrored descent) separated by rest
// and distractor activity, in normalized g units.
struct SynthConfig {
    std::uint64_t seed = 0;
    double sample_rate_hz = kDefaultSampleRateHz;
    std::size_t puffs = 10;
    std::size_t distractors = 3;
    double noise_sigma = 0.05;
    double hol_min_s = 0.5;
    double hol_max_s = 3.0;
    double ramp_s = 0.8; // hand-to-lip and hand-off-lip duration
    double rest_min_s = 2.0;
    double rest_max_s = 6.0;

    void validate() const;
};

struct SynthSegment {
    int label = kNonSmoking;
    std::size_t start = 0;
    std::size_t length = 0;
};

struct SynthResult {
    SampleStream stream;
    std::vector<PuffEvent> truth;   // exact events implied by the plan
    std::vector<SynthSegment> plan; // segment boundaries, label per sample
};

SynthResult generate(const SynthConfig& config);

} // namespace smokegram
