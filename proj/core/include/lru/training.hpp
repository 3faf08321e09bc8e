#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lru/bptt.hpp"
#include "lru/network.hpp"
#include "lru/optim.hpp"

namespace lru {

enum class Trainer { Bptt, Rtrl };

/// When the RTRL trainer applies its accumulated online gradients.
enum class RtrlCadence {
    PerStep,    // one Adam update after every timestep (batch advanced in lockstep)
    PerWindow,  // one Adam update per batch of windows
};

struct TrainConfig {
    Trainer trainer = Trainer::Bptt;
    long steps = 100000;  // optimizer updates
    Index batch = 256;
    Index window = 256;
    double learning_rate = 1e-3;
    std::optional<double> clip = 0.5;
    double huber_delta = 1.0;
    std::uint64_t seed = 0;
    long eval_every = 100;
    RtrlCadence cadence = RtrlCadence::PerWindow;
    int threads = 1;
};

struct LossRow {
    long step = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;
};

struct TrainResult {
    Network best;        // lowest validation loss seen (initial network included)
    Network last;        // parameters after the final update
    AdamState optimizer; // optimizer state belonging to `best`
    std::vector<LossRow> curve;
    double best_val_loss = 0.0;
    long best_step = 0;
    bool diverged = false;
    std::string divergence;
};

/// Adam training loop with global-norm clipping. Validation loss (mean per-step
/// Huber over `val`) is recorded at step 0, every eval_every updates and after
/// the last update. A non-finite loss stops training and keeps the best
/// finite checkpoint.
TrainResult train(const Network& init, const Dataset& train_data, const Dataset& val_data, const TrainConfig& cfg);

/// Accumulated RTRL gradient of the mean per-step loss over a batch of windows
/// (zero state and traces at each window start). Matches bptt_gradient for
/// depth-1 networks.
BatchGradient rtrl_window_gradient(const Network& net, const WindowBatch& batch, const HuberLoss& loss);

}  // namespace lru
