#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "smokegram/dataset.hpp"
#include "smokegram/matrix.hpp"

namespace smokegram {

// One classified window, positioned in the sample stream.
struct Token {
    int cls = kNonSmoking; // 1..4
    std::size_t start_sample = 0;
    double confidence = 1.0;
};

struct PuffEvent {
    std::size_t start_sample = 0; // hand-to-lip onset
    std::size_t end_sample = 0;   // hand-off-lip onset
    double hol_duration_s = 0.0;
    std::size_t first_token = 0;
    std::size_t last_token = 0;
};

struct Session {
    std::vector<PuffEvent> puffs;
    std::size_t start_sample = 0;
    std::size_t end_sample = 0;
};

struct GrammarConfig {
    double sample_rate_hz = kDefaultSampleRateHz;
    double min_hol_s = 0.5;
    double max_hol_s = 3.0;
    bool inclusive_bounds = true; // [min,max] if true, (min,max) if false
    // Non-smoking tokens tolerated inside the hand-on-lip run. A hand-to-lip
    // token inside the run is never noise: it restarts the match there.
    std::size_t noise_tolerance = 2;
    std::size_t stride = 1; // samples between consecutive tokens
    std::size_t min_puffs = 2;
    double max_gap_s = 60.0;

    void validate() const; // throws DataError on nonsense (min >= max, ...)
};

// Left-to-right scan of IDLE ->(H2L) ARMED ->(HOL) IN_PUFF ->(HOffL) VALIDATE.
// Repeated hand-to-lip tokens keep the armed start; a violation resets to
// IDLE and reprocesses the offending token (so a hand-to-lip re-arms there,
// nothing further back is revisited). VALIDATE emits iff the hand-on-lip run
// duration ((last_hol.start - first_hol.start) + stride) / rate lies within
// the configured bounds. Emitted events are non-overlapping and ordered;
// events already emitted never change when more tokens arrive.
std::vector<PuffEvent> parse(const std::vector<Token>& tokens,
                             const GrammarConfig& config);

// Greedy grouping: extend while the gap between consecutive puffs is at most
// max_gap_s; groups smaller than min_puffs are dropped.
std::vector<Session> group_sessions(const std::vector<PuffEvent>& puffs,
                                    const GrammarConfig& config);

// Bridge classifier output to grammar input: class = argmax (ties -> lowest
// index), confidence = max output, start_sample = window origin.
std::vector<Token> tokenize(const Matrix& predictions,
                            const std::vector<WindowOrigin>& origins);

// One token per sample from ground-truth labels (stride-1 semantics).
std::vector<Token> tokens_from_labels(const std::vector<int>& labels);

// CSV "kind,start_sample,end_sample,hol_duration_s,session_id": one row per
// puff (session_id empty when ungrouped) followed by one row per session.
void write_events_csv(std::ostream& out, const std::vector<PuffEvent>& puffs,
                      const std::vector<Session>& sessions);
void write_events_csv_file(const std::string& path, const std::vector<PuffEvent>& puffs,
                           const std::vector<Session>& sessions);
std::vector<PuffEvent> read_puffs_csv_file(const std::string& path);

} // namespace smokegram
