#include "lru/harness/pretrain.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "lru/error.hpp"

namespace lru::harness {

std::string trainer_name(Trainer trainer) { return trainer == Trainer::Bptt ? "bptt" : "rtrl"; }

std::string layers_label(const std::vector<Index>& widths) {
    std::string out = "(";
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i > 0) out += ", ";
        out += std::to_string(widths[i]);
    }
    return out + (widths.size() == 1 ? ",)" : ")");
}

nlohmann::json to_json(const PretrainConfig& cfg) {
    const TrainConfig& t = cfg.train;
    return {{"trainer", trainer_name(t.trainer)},
            {"layers", cfg.widths},
            {"steps", t.steps},
            {"batch", t.batch},
            {"window", t.window},
            {"learning_rate", t.learning_rate},
            {"clip", t.clip ? nlohmann::json(*t.clip) : nlohmann::json(nullptr)},
            {"huber_delta", t.huber_delta},
            {"seed", t.seed},
            {"eval_every", t.eval_every},
            {"rtrl_cadence", t.cadence == RtrlCadence::PerStep ? "per-step" : "per-window"},
            {"r_min", cfg.r_min},
            {"r_max", cfg.r_max},
            {"max_phase", cfg.max_phase}};
}

PretrainResult pretrain(const PreparedData& data, const PretrainConfig& cfg) {
    if (cfg.widths.empty()) fail(ErrorKind::Config, "at least one layer width is required");
    NetworkInit init;
    init.input_size = data.train.input_size();
    init.output_size = data.train.target_size();
    init.widths = cfg.widths;
    init.r_min = cfg.r_min;
    init.r_max = cfg.r_max;
    init.max_phase = cfg.max_phase;
    init.seed = cfg.train.seed;
    const Network net = init_network(init);

    PretrainResult out;
    out.training = train(net, data.train, data.val, cfg.train);
    out.checkpoint.network = out.training.best;
    out.checkpoint.optimizer = out.training.optimizer;
    out.checkpoint.pipeline = data.pipeline;
    out.checkpoint.config = to_json(cfg);
    out.checkpoint.seed = cfg.train.seed;
    out.checkpoint.command = "pretrain";
    return out;
}

std::vector<SweepCell> plan_sweep(const SweepGrid& grid, std::uint64_t base_seed) {
    if (grid.repeats < 1) fail(ErrorKind::Config, "sweep needs at least one repeat");
    std::vector<SweepCell> cells;
    for (Trainer trainer : grid.trainers) {
        for (const auto& layers : grid.layers) {
            for (double lr : grid.learning_rates) {
                for (const auto& clip : grid.clips) {
                    for (int r = 0; r < grid.repeats; ++r) {
                        cells.push_back({trainer, layers, lr, clip, r, base_seed + static_cast<std::uint64_t>(r)});
                    }
                }
            }
        }
    }
    return cells;
}

std::vector<SweepRow> run_sweep(const PreparedData& data, const SweepGrid& grid, const PretrainConfig& base,
                                int threads) {
    const auto cells = plan_sweep(grid, base.train.seed);
    std::vector<SweepRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const SweepCell& cell = cells[i];
            SweepRow& row = rows[i];
            row.cell = cell;
            PretrainConfig cfg = base;
            cfg.widths = cell.layers;
            cfg.train.trainer = cell.trainer;
            cfg.train.learning_rate = cell.learning_rate;
            cfg.train.clip = cell.clip;
            cfg.train.seed = cell.seed;
            cfg.train.threads = 1;
            const auto start = std::chrono::steady_clock::now();
            try {
                const PretrainResult r = pretrain(data, cfg);
                row.best_val_loss = r.training.best_val_loss;
                row.best_step = r.training.best_step;
                row.diverged = r.training.diverged;
            } catch (const std::exception& e) {
                row.error = e.what();
                row.best_val_loss = std::numeric_limits<double>::quiet_NaN();
            }
            row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    const int n = std::max(1, threads);
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    return rows;
}

}  // namespace lru::harness
