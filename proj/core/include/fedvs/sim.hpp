#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fedvs/rng.hpp"

namespace fedvs {

enum class Phase { ModelShare, EmbeddingUpload };

/// Per-client compute-delay distributions. Non-stragglers draw from an
/// exponential with a fixed mean; the last `num_stragglers` client ids are
/// stragglers with incremental means straggler_base + 2i/N for straggler
/// index i = 1..num_stragglers. Model-share delays use the same shape with
/// the mean divided by the batch size.
struct DelayModel {
    int n_clients = 0;
    int num_stragglers = 0;
    double nonstraggler_mean_s = 0.2;
    double straggler_base_s = 1.0;

    bool is_straggler(int client) const { return client >= n_clients - num_stragglers; }

    double mean_for(int client, Phase phase, int batch_size) const;
};

double sample_delay(const DelayModel& model, int client, Phase phase, int batch_size, Rng& rng);

struct NetworkModel {
    double bandwidth_bps = 300e6;

    double transfer_seconds(std::uint64_t bytes) const {
        return static_cast<double>(bytes) * 8.0 / bandwidth_bps;
    }
};

/// Monotone simulated clock; no wall-time anywhere.
struct SimClock {
    double now_s = 0.0;

    void advance(double dt) { now_s += dt; }
};

struct ResponderPolicy {
    enum class Kind { Threshold, All, Deadline } kind = Kind::All;
    int threshold = 0;
    double deadline_s = 0.0;

    static ResponderPolicy first(int threshold) {
        return ResponderPolicy{Kind::Threshold, threshold, 0.0};
    }
    static ResponderPolicy all() { return ResponderPolicy{Kind::All, 0, 0.0}; }
    static ResponderPolicy deadline(double d) { return ResponderPolicy{Kind::Deadline, 0, d}; }
};

struct RoundTiming {
    std::vector<int> responders; // client ids, ordered by (arrival, id)
    double elapsed_s = 0.0;      // arrival time of the last accepted response
};

/// Select responders from per-client arrival times (compute delay plus
/// transfer). Ties break by client id, so the result depends only on the
/// timestamps, never on evaluation order.
RoundTiming round_time(std::span<const double> arrivals, const ResponderPolicy& policy);

constexpr std::uint64_t kFieldElementBytes = 8;
constexpr std::uint64_t kRealElementBytes = 8;

inline std::uint64_t matrix_bytes(std::size_t rows, std::size_t cols,
                                  std::uint64_t elem_bytes = kFieldElementBytes) {
    return static_cast<std::uint64_t>(rows) * cols * elem_bytes;
}

/// Bytes of one data-share message (all powers of one segment-sized block).
inline std::uint64_t data_share_message_bytes(std::size_t seg_rows, std::size_t width, int degree) {
    return matrix_bytes(seg_rows, width) * static_cast<std::uint64_t>(degree);
}

/// Bytes of one model-share message (all layers).
inline std::uint64_t model_share_message_bytes(std::size_t width, std::size_t embed, int degree) {
    return matrix_bytes(width, embed) * static_cast<std::uint64_t>(degree);
}

/// Bytes of one coded-embedding upload.
inline std::uint64_t embedding_upload_bytes(std::size_t batch, std::size_t embed) {
    return matrix_bytes(batch, embed);
}

} // namespace fedvs
