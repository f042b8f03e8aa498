#include "smokegram/grammar.hpp"

#include <fstream>
#include <ostream>

#include "smokegram/errors.hpp"
#include "smokegram/models.hpp"
#include "smokegram/textio.hpp"

namespace smokegram {

void GrammarConfig::validate() const {
    if (!(min_hol_s < max_hol_s)) {
        throw DataError("grammar: min_hol_s must be < max_hol_s");
    }
    if (min_hol_s < 0.0 || sample_rate_hz <= 0.0 || max_gap_s < 0.0) {
        throw DataError("grammar: negative durations or rate");
    }
    if (stride == 0) {
        throw DataError("grammar: stride must be >= 1");
    }
}

std::vector<PuffEvent> parse(const std::vector<Token>& tokens,
                             const GrammarConfig& config) {
    config.validate();
    for (std::size_t i = 1; i < tokens.size(); ++i) {
        if (tokens[i].start_sample <= tokens[i - 1].start_sample) {
            throw DataError("parse: tokens not ordered at index " + std::to_string(i));
        }
    }

    enum class State { idle, armed, in_puff };
    State state = State::idle;
    std::size_t match_first = 0;  // token index of the first hand-to-lip
    std::size_t first_hol = 0;    // token indices of the hand-on-lip run
    std::size_t last_hol = 0;
    std::size_t noise_used = 0;

    std::vector<PuffEvent> events;

    for (std::size_t i = 0; i < tokens.size(); ++i) {
        bool reprocess = true;
        while (reprocess) {
            reprocess = false;
            const int cls = tokens[i].cls;
            switch (state) {
            case State::idle:
                if (cls == kHandToLip) {
                    state = State::armed;
                    match_first = i;
                }
                break;
            case State::armed:
                if (cls == kHandToLip) {
                    // Repeated hand-to-lip extends the streak; keep the start.
                } else if (cls == kHandOnLip) {
                    state = State::in_puff;
                    first_hol = i;
                    last_hol = i;
                    noise_used = 0;
                } else {
                    state = State::idle;
                    reprocess = true;
                }
                break;
            case State::in_puff:
                if (cls == kHandOnLip) {
                    last_hol = i;
                } else if (cls == kHandOffLip) {
                    const double duration_samples = static_cast<double>(
                        tokens[last_hol].start_sample - tokens[first_hol].start_sample +
                        config.stride);
                    const double duration_s = duration_samples / config.sample_rate_hz;
                    const bool ok =
                        config.inclusive_bounds
                            ? duration_s >= config.min_hol_s && duration_s <= config.max_hol_s
                            : duration_s > config.min_hol_s && duration_s < config.max_hol_s;
                    if (ok) {
                        PuffEvent e;
                        e.start_sample = tokens[match_first].start_sample;
                        e.end_sample = tokens[i].start_sample;
                        e.hol_duration_s = duration_s;
                        e.first_token = match_first;
                        e.last_token = i;
                        events.push_back(e);
                    }
                    state = State::idle;
                } else if (cls == kNonSmoking) {
                    ++noise_used;
                    if (noise_used > config.noise_tolerance) {
                        state = State::idle;
                        reprocess = true;
                    }
                } else { // hand-to-lip inside the run: restart the match here
                    state = State::idle;
                    reprocess = true;
                }
                break;
            }
        }
    }
    return events;
}

std::vector<Session> group_sessions(const std::vector<PuffEvent>& puffs,
                                    const GrammarConfig& config) {
    config.validate();
    for (std::size_t i = 1; i < puffs.size(); ++i) {
        if (puffs[i].start_sample < puffs[i - 1].end_sample) {
            throw DataError("group_sessions: puffs overlap or are unordered");
        }
    }

    std::vector<Session> sessions;
    Session current;
    auto flush = [&]() {
        if (current.puffs.size() >= config.min_puffs) {
            current.start_sample = current.puffs.front().start_sample;
            current.end_sample = current.puffs.back().end_sample;
            sessions.push_back(current);
        }
        current.puffs.clear();
    };

    for (const PuffEvent& p : puffs) {
        if (!current.puffs.empty()) {
            const double gap_s =
                static_cast<double>(p.start_sample - current.puffs.back().end_sample) /
                config.sample_rate_hz;
            if (gap_s > config.max_gap_s) {
                flush();
            }
        }
        current.puffs.push_back(p);
    }
    flush();
    return sessions;
}

std::vector<Token> tokenize(const Matrix& predictions,
                            const std::vector<WindowOrigin>& origins) {
    if (predictions.rows() != origins.size()) {
        throw DimensionError("tokenize: " + std::to_string(predictions.rows()) +
                             " prediction rows for " + std::to_string(origins.size()) +
                             " origins");
    }
    std::vector<Token> tokens;
    tokens.reserve(origins.size());
    for (std::size_t r = 0; r < predictions.rows(); ++r) {
        const std::size_t best = argmax_row(predictions, r);
        Token t;
        t.cls = static_cast<int>(best) + 1;
        t.confidence = predictions(r, best);
        t.start_sample = origins[r].start_index;
        tokens.push_back(t);
    }
    return tokens;
}

std::vector<Token> tokens_from_labels(const std::vector<int>& labels) {
    std::vector<Token> tokens;
    tokens.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 1 || labels[i] > kNumClasses) {
            throw DataError("tokens_from_labels: bad label at index " + std::to_string(i));
        }
        tokens.push_back({labels[i], i, 1.0});
    }
    return tokens;
}

void write_events_csv(std::ostream& out, const std::vector<PuffEvent>& puffs,
                      const std::vector<Session>& sessions) {
    out << "kind,start_sample,end_sample,hol_duration_s,session_id\n";

    // Map each puff to its session id (1-based), if any.
    auto session_of = [&](const PuffEvent& p) -> std::string {
        for (std::size_t s = 0; s < sessions.size(); ++s) {
            for (const PuffEvent& q : sessions[s].puffs) {
                if (q.start_sample == p.start_sample && q.end_sample == p.end_sample) {
                    return std::to_string(s + 1);
                }
            }
        }
        return "";
    };

    for (const PuffEvent& p : puffs) {
        out << "puff," << p.start_sample << ',' << p.end_sample << ','
            << textio::format_double(p.hol_duration_s) << ',' << session_of(p) << '\n';
    }
    for (std::size_t s = 0; s < sessions.size(); ++s) {
        out << "session," << sessions[s].start_sample << ',' << sessions[s].end_sample
            << ",," << (s + 1) << '\n';
    }
}

void write_events_csv_file(const std::string& path, const std::vector<PuffEvent>& puffs,
                           const std::vector<Session>& sessions) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + path + "'");
    }
    write_events_csv(out, puffs, sessions);
}

std::vector<PuffEvent> read_puffs_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(path + ": empty events file");
    }
    if (textio::trim(line) != "kind,start_sample,end_sample,hol_duration_s,session_id") {
        throw ParseError(path + ": unexpected events header");
    }
    std::vector<PuffEvent> puffs;
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
        if (fields[0] != "puff") {
            continue;
        }
        const std::string ctx = path + ": line " + std::to_string(lineno);
        PuffEvent p;
        p.start_sample = static_cast<std::size_t>(textio::parse_int(fields[1], ctx));
        p.end_sample = static_cast<std::size_t>(textio::parse_int(fields[2], ctx));
        p.hol_duration_s = textio::parse_double(fields[3], ctx);
        puffs.push_back(p);
    }
    return puffs;
}

} // namespace smokegram
