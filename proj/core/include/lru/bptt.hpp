#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lru/dataset.hpp"
#include "lru/network.hpp"
#include "lru/optim.hpp"

namespace lru {

/// Fixed-length training windows, each inside a single session.
struct WindowBatch {
    std::vector<SeqMatrix> inputs;   // batch x (T x m)
    std::vector<SeqMatrix> targets;  // batch x (T x p)
    Index window = 0;
    std::vector<int> session_ids;
    std::vector<Index> offsets;

    std::size_t size() const { return inputs.size(); }
};

/// Draws window start positions uniformly over every admissible
/// (session, offset) pair, so sessions are hit in proportion to their
/// available windows.
class WindowSampler {
public:
    WindowSampler(const Dataset& data, Index window);

    struct Location {
        std::size_t session;
        Index offset;
    };

    Location draw(std::mt19937_64& rng) const;
    WindowBatch draw_batch(std::mt19937_64& rng, Index batch) const;
    Index window() const { return window_; }
    Index total_windows() const { return cumulative_.back(); }

private:
    const Dataset* data_;
    Index window_;
    std::vector<Index> cumulative_;  // running count of windows per session
};

/// Throws ErrorKind::Config naming the session when a session is shorter than T.
WindowBatch sample_windows(const Dataset& data, Index window, Index batch, std::uint64_t seed);

/// Full-unroll reverse-mode gradient of weight * sum_t L_t for one sequence
/// starting from a zero state. Accumulates into `grads` and returns sum_t L_t.
double sequence_gradient(const Network& net, const SeqMatrix& inputs, const SeqMatrix& targets,
                         const HuberLoss& loss, double weight, StepGradient& grads);

struct BatchGradient {
    double loss = 0.0;  // mean per-step Huber over batch and time
    StepGradient grads;
};

/// Mean loss over batch and time and its exact gradient. With threads > 1 the
/// batch is split into fixed contiguous blocks whose partial sums are reduced
/// in block order, so the result depends on the thread count but not on
/// scheduling. Throws TrainingError with the offending window index on a
/// non-finite loss.
BatchGradient bptt_gradient(const Network& net, const WindowBatch& batch, const HuberLoss& loss, int threads = 1);

/// Frozen forward pass over a whole sequence from a zero state (T x p).
SeqMatrix predict_sequence(const Network& net, const SeqMatrix& inputs);

struct LossTotals {
    double sum = 0.0;
    Index steps = 0;

    double mean() const { return steps > 0 ? sum / static_cast<double>(steps) : 0.0; }
};

/// Per-step Huber loss of a frozen network over every session.
LossTotals evaluate_loss(const Network& net, const Dataset& data, const HuberLoss& loss);

}  // namespace lru
