#include "smokegram/synth.hpp"

#include <cmath>

#include "smokegram/errors.hpp"
#include "smokegram/rng.hpp"

namespace smokegram {
namespace {

constexpr double kPi = 3.141592653589793238462643;

struct Vec3 {
    double x, y, z;
};

// Wrist at rest (hanging) vs at the mouth, in normalized g units.
constexpr Vec3 kRestPose = {0.05, -0.98, 0.10};
constexpr Vec3 kMouthPose = {0.55, 0.25, 0.72};

double smoothstep(double u) { return u * u * (3.0 - 2.0 * u); }

// Mix the x/z components of the rest->mouth delta; every puff approaches the
// mouth from a slightly different angle.
Vec3 mouth_pose_rotated(double angle) {
    const double dx = kMouthPose.x - kRestPose.x;
    const double dz = kMouthPose.z - kRestPose.z;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    return {kRestPose.x + dx * c + dz * s, kMouthPose.y, kRestPose.z - dx * s + dz * c};
}

struct SegmentPlan {
    int label;
    std::size_t length;
    // Waveform parameters fixed when the plan is drawn.
    double angle = 0.0;   // puff approach angle
    double phase = 0.0;   // oscillation phase
    double amp = 0.0;     // distractor amplitude
    double freq = 0.0;    // distractor frequency (Hz)
    bool is_distractor = false;
    bool is_h2l = false;
    bool is_hol = false;
    bool is_hoffl = false;
};

} // namespace

void SynthConfig::validate() const {
    if (sample_rate_hz <= 0.0) {
        throw DataError("synth: sample rate must be positive");
    }
    if (noise_sigma < 0.0) {
        throw DataError("synth: noise_sigma must be >= 0");
    }
    if (!(hol_min_s > 0.0 && hol_min_s < hol_max_s)) {
        throw DataError("synth: need 0 < hol_min_s < hol_max_s");
    }
    if (ramp_s <= 0.0 || rest_min_s <= 0.0 || rest_min_s > rest_max_s) {
        throw DataError("synth: bad segment durations");
    }
}

SynthResult generate(const SynthConfig& config) {
    config.validate();
    Rng rng(config.seed);
    const double rate = config.sample_rate_hz;
    auto seconds_to_samples = [&](double s) {
        return static_cast<std::size_t>(std::max<long long>(1, std::llround(s * rate)));
    };
    const std::size_t ramp_len = seconds_to_samples(config.ramp_s);

    // Draw the event order, then the full segment plan, before any noise.
    std::vector<char> kinds;
    kinds.insert(kinds.end(), config.puffs, 'P');
    kinds.insert(kinds.end(), config.distractors, 'D');
    rng.shuffle(kinds);

    std::vector<SegmentPlan> plan;
    auto push_rest = [&]() {
        SegmentPlan seg;
        seg.label = kNonSmoking;
        seg.length = seconds_to_samples(rng.uniform(config.rest_min_s, config.rest_max_s));
        seg.phase = rng.uniform(0.0, 2.0 * kPi);
        plan.push_back(seg);
    };

    push_rest();
    for (char kind : kinds) {
        if (kind == 'P') {
            const double angle = rng.uniform(-0.35, 0.35);
            const double hol_s = rng.uniform(config.hol_min_s, config.hol_max_s);
            const double phase = rng.uniform(0.0, 2.0 * kPi);

            SegmentPlan up;
            up.label = kHandToLip;
            up.length = ramp_len;
            up.angle = angle;
            up.is_h2l = true;
            plan.push_back(up);

            SegmentPlan hold;
            hold.label = kHandOnLip;
            hold.length = seconds_to_samples(hol_s);
            hold.angle = angle;
            hold.phase = phase;
            hold.is_hol = true;
            plan.push_back(hold);

            SegmentPlan down;
            down.label = kHandOffLip;
            down.length = ramp_len;
            down.angle = angle;
            down.is_hoffl = true;
            plan.push_back(down);
        } else {
            SegmentPlan d;
            d.label = kNonSmoking;
            d.length = seconds_to_samples(rng.uniform(2.0, 5.0));
            d.amp = rng.uniform(0.20, 0.40);
            d.freq = rng.uniform(0.8, 2.5);
            d.phase = rng.uniform(0.0, 2.0 * kPi);
            d.is_distractor = true;
            plan.push_back(d);
        }
        push_rest();
    }

    SynthResult result;
    result.stream.id = "synth";
    result.stream.sample_rate_hz = rate;
    result.stream.labeled = true;

    std::size_t index = 0;
    for (const SegmentPlan& seg : plan) {
        result.plan.push_back({seg.label, index, seg.length});

        const Vec3 mouth = mouth_pose_rotated(seg.angle);
        for (std::size_t i = 0; i < seg.length; ++i) {
            const double t = static_cast<double>(index) / rate;
            Vec3 p = kRestPose;
            if (seg.is_h2l) {
                const double u =
                    smoothstep(static_cast<double>(i + 1) / static_cast<double>(seg.length));
                p = {kRestPose.x + u * (mouth.x - kRestPose.x),
                     kRestPose.y + u * (mouth.y - kRestPose.y),
                     kRestPose.z + u * (mouth.z - kRestPose.z)};
            } else if (seg.is_hol) {
                const double wob = 0.02 * std::sin(2.0 * kPi * 1.2 * t + seg.phase);
                p = {mouth.x + wob, mouth.y, mouth.z - wob};
            } else if (seg.is_hoffl) {
                const double u = smoothstep(
                    1.0 - static_cast<double>(i + 1) / static_cast<double>(seg.length));
                p = {kRestPose.x + u * (mouth.x - kRestPose.x),
                     kRestPose.y + u * (mouth.y - kRestPose.y),
                     kRestPose.z + u * (mouth.z - kRestPose.z)};
            } else if (seg.is_distractor) {
                const double osc = seg.amp * std::sin(2.0 * kPi * seg.freq * t + seg.phase);
                p = {kRestPose.x + osc, kRestPose.y + 0.25 * osc, kRestPose.z - 0.5 * osc};
            } else {
                const double drift = 0.03 * std::sin(2.0 * kPi * 0.15 * t + seg.phase);
                p = {kRestPose.x + drift, kRestPose.y, kRestPose.z + drift};
            }

            Sample s;
            s.t = static_cast<double>(index) / rate;
            s.ax = p.x + config.noise_sigma * rng.gaussian();
            s.ay = p.y + config.noise_sigma * rng.gaussian();
            s.az = p.z + config.noise_sigma * rng.gaussian();
            s.label = seg.label;
            result.stream.samples.push_back(s);
            ++index;
        }
    }

    // Ground truth straight from the plan: puff start = hand-to-lip onset,
    // end = hand-off-lip onset.
    for (std::size_t i = 0; i + 2 < result.plan.size(); ++i) {
        if (result.plan[i].label == kHandToLip) {
            PuffEvent e;
            e.start_sample = result.plan[i].start;
            e.end_sample = result.plan[i + 2].start;
            e.hol_duration_s = static_cast<double>(result.plan[i + 1].length) / rate;
            result.truth.push_back(e);
        }
    }
    return result;
}

} // namespace smokegram
