#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lru/harness/checkpoint.hpp"
#include "lru/harness/prepare.hpp"
#include "lru/training.hpp"

namespace lru::harness {

struct PretrainConfig {
    std::vector<Index> widths{16};
    TrainConfig train;
    double r_min = 0.9;
    double r_max = 0.999;
    double max_phase = 3.14159265358979323846 / 10.0;
};

nlohmann::json to_json(const PretrainConfig& cfg);
std::string trainer_name(Trainer trainer);
/// "(16,)", "(8, 8)", ...
std::string layers_label(const std::vector<Index>& widths);

struct PretrainResult {
    Checkpoint checkpoint;  // best validation checkpoint
    TrainResult training;
};

PretrainResult pretrain(const PreparedData& data, const PretrainConfig& cfg);

struct SweepGrid {
    std::vector<std::vector<Index>> layers{{8}, {16}, {8, 8}, {16, 16}, {8, 8, 8}};
    std::vector<double> learning_rates{1e-2, 1e-3, 1e-4};
    std::vector<std::optional<double>> clips{0.5, 1.0, std::nullopt};
    std::vector<Trainer> trainers{Trainer::Bptt, Trainer::Rtrl};
    int repeats = 5;
};

struct SweepCell {
    Trainer trainer = Trainer::Bptt;
    std::vector<Index> layers;
    double learning_rate = 0.0;
    std::optional<double> clip;
    int repeat = 0;
    std::uint64_t seed = 0;
};

/// Cells ordered by (trainer, layers, learning rate, clip, repeat) in grid
/// order. Repeat r uses seed base_seed + r for every configuration.
std::vector<SweepCell> plan_sweep(const SweepGrid& grid, std::uint64_t base_seed);

struct SweepRow {
    SweepCell cell;
    double best_val_loss = 0.0;
    long best_step = 0;
    double wall_seconds = 0.0;
    bool diverged = false;
    std::string error;  // non-empty when the run threw
};

/// Runs every cell of the grid; failures are recorded and the sweep goes on.
/// Rows come back in plan order regardless of `threads`.
std::vector<SweepRow> run_sweep(const PreparedData& data, const SweepGrid& grid, const PretrainConfig& base,
                                int threads = 1);

}  // namespace lru::harness
