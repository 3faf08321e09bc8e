// lru-tool: data generation, preprocessing, training, fine-tuning and
// evaluation front end for the lru library.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lru/bptt.hpp"
#include "lru/data/io.hpp"
#include "lru/data/synthetic.hpp"
#include "lru/data/transform.hpp"
#include "lru/error.hpp"
#include "lru/harness/checkpoint.hpp"
#include "lru/harness/evaluate.hpp"
#include "lru/harness/finetune.hpp"
#include "lru/harness/impute_bench.hpp"
#include "lru/harness/prepare.hpp"
#include "lru/harness/pretrain.hpp"
#include "lru/harness/run_dir.hpp"
#include "lru/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lru;
using namespace lru::harness;

namespace {

std::vector<std::string> g_argv;

std::vector<Index> parse_layers(const std::string& text) {
    std::vector<Index> widths;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" ()");
        const auto last = item.find_last_not_of(" ()");
        if (first == std::string::npos) continue;
        try {
            const long w = std::stol(item.substr(first, last - first + 1));
            if (w < 1) fail(ErrorKind::Config, "layer widths must be positive: '" + text + "'");
            widths.push_back(w);
        } catch (const std::logic_error&) {
            fail(ErrorKind::Config, "cannot parse layer widths '" + text + "'");
        }
    }
    if (widths.empty()) fail(ErrorKind::Config, "no layer widths in '" + text + "'");
    return widths;
}

std::optional<double> parse_clip(const std::string& text) {
    if (text == "none" || text == "None" || text.empty()) return std::nullopt;
    try {
        const double c = std::stod(text);
        if (!(c > 0.0)) fail(ErrorKind::Config, "clip threshold must be positive or 'none'");
        return c;
    } catch (const std::logic_error&) {
        fail(ErrorKind::Config, "cannot parse clip threshold '" + text + "'");
    }
}

Trainer parse_trainer(const std::string& name) {
    if (name == "bptt") return Trainer::Bptt;
    if (name == "rtrl") return Trainer::Rtrl;
    fail(ErrorKind::Config, "unknown trainer '" + name + "'");
}

json clip_json(const std::optional<double>& clip) { return clip ? json(*clip) : json(nullptr); }

struct RunContext {
    fs::path dir;
    json summary;
};

RunContext open_run(const fs::path& root, const std::string& command, const json& config) {
    RunContext run;
    const std::string hash = config_hash(config);
    run.dir = make_run_dir(root, command, hash);
    run.summary = {{"command", command}, {"config", config}, {"config_hash", hash}, {"provenance", provenance(g_argv)}};
    return run;
}

void close_run(RunContext& run) {
    write_json(run.dir / "summary.json", run.summary);
    std::cout << run.dir.string() << '\n';
}

// ---- shared option groups ---------------------------------------------------

struct DataArgs {
    std::string dir;
    DataOptions options;

    void add(CLI::App* app) {
        app->add_option("--data", dir, "Directory with emission.csv, weather.csv and optional sessions.json")
            ->required()
            ->check(CLI::ExistingDirectory);
        app->add_option("--train-fraction", options.train_fraction, "Share of sessions used for training")
            ->capture_default_str();
        app->add_option("--impute-window", options.impute_window, "Rolling median window (odd)")
            ->capture_default_str();
        app->add_flag("--strict-vocabulary", options.strict_vocabulary, "Fit categories on the training split only");
        app->add_option("--max-gap", options.max_gap, "Session split gap in seconds when no manifest exists")
            ->capture_default_str();
    }

    json to_json() const {
        return {{"data", dir},
                {"train_fraction", options.train_fraction},
                {"impute_window", options.impute_window},
                {"strict_vocabulary", options.strict_vocabulary},
                {"max_gap", options.max_gap}};
    }
};

struct TrainArgs {
    std::string trainer = "bptt";
    std::string layers = "16";
    std::string clip = "0.5";
    std::string cadence = "window";
    PretrainConfig cfg;

    void add(CLI::App* app, bool grid_fields) {
        TrainConfig& t = cfg.train;
        t.steps = 5000;
        t.batch = 32;
        t.window = 128;
        t.learning_rate = 1e-2;
        if (!grid_fields) {
            app->add_option("--trainer", trainer, "bptt or rtrl")
                ->check(CLI::IsMember({"bptt", "rtrl"}))
                ->capture_default_str();
            app->add_option("--layers", layers, "Comma-separated hidden widths, e.g. 8,8")->capture_default_str();
            app->add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str();
            app->add_option("--clip", clip, "Global gradient-norm clip, or 'none'")->capture_default_str();
        }
        app->add_option("--steps", t.steps, "Optimizer updates")->capture_default_str();
        app->add_option("--batch", t.batch, "Windows per update")->capture_default_str();
        app->add_option("--window", t.window, "Window length in steps")->capture_default_str();
        app->add_option("--huber-delta", t.huber_delta, "Huber threshold")->capture_default_str();
        app->add_option("--eval-every", t.eval_every, "Validation interval in updates")->capture_default_str();
        app->add_option("--cadence", cadence, "RTRL update cadence: step or window")
            ->check(CLI::IsMember({"step", "window"}))
            ->capture_default_str();
        app->add_option("--threads", t.threads, "Worker threads for batch gradients")->capture_default_str();
        app->add_option("--r-min", cfg.r_min, "Minimum initial eigenvalue magnitude")->capture_default_str();
        app->add_option("--r-max", cfg.r_max, "Maximum initial eigenvalue magnitude")->capture_default_str();
        app->add_option("--max-phase", cfg.max_phase, "Maximum initial eigenvalue phase")->capture_default_str();
    }

    PretrainConfig resolve(std::uint64_t seed) const {
        PretrainConfig out = cfg;
        out.widths = parse_layers(layers);
        out.train.trainer = parse_trainer(trainer);
        out.train.clip = parse_clip(clip);
        out.train.cadence = cadence == "step" ? RtrlCadence::PerStep : RtrlCadence::PerWindow;
        out.train.seed = seed;
        return out;
    }
};

struct FinetuneArgs {
    std::string clip = "0.5";
    long freeze_after = -1;
    FinetuneConfig cfg;

    void add(CLI::App* app, bool grid_fields) {
        if (!grid_fields) {
            app->add_option("--lambda", cfg.lambda_reg, "Anchor regularization strength")->capture_default_str();
            app->add_option("--freeze-after", freeze_after, "Stop updating after N stream steps (-1: never)")
                ->capture_default_str();
        }
        app->add_option("--lr", cfg.learning_rate, "Adam learning rate")->capture_default_str();
        app->add_option("--clip", clip, "Global gradient-norm clip, or 'none'")->capture_default_str();
        app->add_option("--huber-delta", cfg.huber_delta, "Huber threshold")->capture_default_str();
        app->add_flag("--squared-anchor", cfg.squared_anchor, "Use the squared anchor penalty");
        app->add_flag("--carry-optimizer", cfg.carry_optimizer, "Start from the checkpoint's Adam moments");
    }

    FinetuneConfig resolve(std::uint64_t seed) const {
        FinetuneConfig out = cfg;
        out.clip = parse_clip(clip);
        if (freeze_after >= 0) out.freeze_after = freeze_after;
        out.seed = seed;
        return out;
    }
};

json finetune_json(const FinetuneConfig& c) {
    return {{"lambda_reg", c.lambda_reg},
            {"freeze_after", c.freeze_after ? json(*c.freeze_after) : json(nullptr)},
            {"learning_rate", c.learning_rate},
            {"clip", clip_json(c.clip)},
            {"huber_delta", c.huber_delta},
            {"squared_anchor", c.squared_anchor},
            {"carry_optimizer", c.carry_optimizer},
            {"seed", c.seed}};
}

// ---- commands -----------------------------------------------------------------

void write_dataset_csv(const fs::path& path, const Dataset& d) {
    std::vector<std::string> header{"session", "timestamp"};
    header.insert(header.end(), d.feature_names.begin(), d.feature_names.end());
    header.insert(header.end(), d.target_names.begin(), d.target_names.end());
    CsvWriter csv(path, header);
    for (const auto& s : d.sessions) {
        for (Index t = 0; t < s.length(); ++t) {
            csv << s.id << s.timestamps[static_cast<std::size_t>(t)];
            for (Index j = 0; j < s.inputs.cols(); ++j) csv << s.inputs(t, j);
            for (Index k = 0; k < s.targets.cols(); ++k) csv << s.targets(t, k);
            csv.end_row();
        }
    }
}

json dataset_json(const Dataset& d) {
    json sessions = json::array();
    for (const auto& s : d.sessions) sessions.push_back({{"id", s.id}, {"steps", s.length()}});
    return {{"steps", d.total_steps()}, {"sessions", sessions}, {"inputs", d.input_size()}, {"targets", d.target_size()}};
}

void write_curve(const fs::path& path, const TrainResult& r) {
    CsvWriter csv(path, {"step", "train_loss", "val_loss"});
    for (const auto& row : r.curve) {
        csv << row.step << row.train_loss;
        if (row.val_loss) {
            csv << *row.val_loss;
        } else {
            csv << std::string();
        }
        csv.end_row();
    }
}

Dataset stream_for(const Checkpoint& ck, const DataArgs& data) {
    return prepare_validation(load_raw(data.dir, data.options), ck.pipeline, data.options);
}

int run_gen_data(const std::string& out, const data::GeneratorConfig& cfg) {
    const data::SyntheticData d = data::generate_synthetic(cfg);
    data::write_synthetic(out, d);
    const auto grid_rows = static_cast<std::size_t>(cfg.sessions) * (static_cast<std::size_t>(cfg.duration_s) + 1);
    std::cout << "wrote " << d.emission.rows() << " emission rows (" << grid_rows - d.emission.rows()
              << " of " << grid_rows << " grid rows dropped) and " << d.weather.rows() << " weather rows to " << out
              << '\n';
    return 0;
}

int run_preprocess(const fs::path& root, const DataArgs& data, std::uint64_t seed) {
    json config = data.to_json();
    config["seed"] = seed;
    RunContext run = open_run(root, "preprocess", config);
    const PreparedData p = prepare(load_raw(data.dir, data.options), data.options);
    write_dataset_csv(run.dir / "train.csv", p.train);
    write_dataset_csv(run.dir / "val.csv", p.val);
    write_json(run.dir / "pipeline.json", pipeline_to_json(p.pipeline));
    run.summary["train"] = dataset_json(p.train);
    run.summary["val"] = dataset_json(p.val);
    run.summary["features"] = p.pipeline.feature_names();
    close_run(run);
    return 0;
}

int run_pretrain(const fs::path& root, const DataArgs& data, const TrainArgs& args, std::uint64_t seed) {
    const PretrainConfig cfg = args.resolve(seed);
    json config = to_json(cfg);
    config["data"] = data.to_json();
    RunContext run = open_run(root, "pretrain", config);
    const PreparedData p = prepare(load_raw(data.dir, data.options), data.options);
    const auto start = std::chrono::steady_clock::now();
    const PretrainResult r = pretrain(p, cfg);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_checkpoint(run.dir / "checkpoint.json", r.checkpoint);
    write_curve(run.dir / "loss_curve.csv", r.training);
    run.summary["best_val_loss"] = r.training.best_val_loss;
    run.summary["best_step"] = r.training.best_step;
    run.summary["diverged"] = r.training.diverged;
    if (r.training.diverged) run.summary["divergence"] = r.training.divergence;
    run.summary["wall_seconds"] = wall;
    close_run(run);
    return 0;
}

struct SweepArgs {
    std::vector<std::string> layers{"8", "16", "8,8", "16,16", "8,8,8"};
    std::vector<double> lrs{1e-2, 1e-3, 1e-4};
    std::vector<std::string> clips{"0.5", "1.0", "none"};
    std::vector<std::string> trainers{"bptt", "rtrl"};
    int repeats = 5;
    int workers = 1;

    void add(CLI::App* app) {
        app->add_option("--grid-layers", layers, "Layer configurations, e.g. --grid-layers 8 8,8")
            ->capture_default_str();
        app->add_option("--grid-lr", lrs, "Learning rates")->capture_default_str();
        app->add_option("--grid-clip", clips, "Clip thresholds ('none' disables)")->capture_default_str();
        app->add_option("--grid-trainer", trainers, "Trainers")->capture_default_str();
        app->add_option("--repeats", repeats, "Seeds per configuration")->capture_default_str();
        app->add_option("--workers", workers, "Concurrent runs")->capture_default_str();
    }

    SweepGrid grid() const {
        SweepGrid g;
        g.layers.clear();
        for (const auto& l : layers) g.layers.push_back(parse_layers(l));
        g.learning_rates = lrs;
        g.clips.clear();
        for (const auto& c : clips) g.clips.push_back(parse_clip(c));
        g.trainers.clear();
        for (const auto& t : trainers) g.trainers.push_back(parse_trainer(t));
        g.repeats = repeats;
        return g;
    }
};

int run_sweep_cmd(const fs::path& root, const DataArgs& data, const TrainArgs& train, const SweepArgs& sweep,
                  std::uint64_t seed) {
    const SweepGrid grid = sweep.grid();
    const PretrainConfig base = train.resolve(seed);
    json config = to_json(base);
    config["data"] = data.to_json();
    config["grid"] = {{"layers", sweep.layers},  {"learning_rates", sweep.lrs}, {"clips", sweep.clips},
                      {"trainers", sweep.trainers}, {"repeats", sweep.repeats}};
    RunContext run = open_run(root, "sweep", config);
    const PreparedData p = prepare(load_raw(data.dir, data.options), data.options);
    const std::vector<SweepRow> rows = run_sweep(p, grid, base, sweep.workers);

    CsvWriter csv(run.dir / "sweep.csv", {"trainer", "layers", "learning_rate", "clip", "repeat", "seed",
                                          "best_val_loss", "best_step", "wall_seconds", "diverged", "error"});
    std::map<std::string, std::vector<double>> by_config;
    long failures = 0;
    for (const auto& r : rows) {
        const std::string clip = r.cell.clip ? data::format_number(*r.cell.clip) : "none";
        csv << trainer_name(r.cell.trainer) << layers_label(r.cell.layers) << r.cell.learning_rate << clip
            << r.cell.repeat << static_cast<long>(r.cell.seed);
        if (r.error.empty()) {
            csv << r.best_val_loss << r.best_step;
            by_config[trainer_name(r.cell.trainer) + " " + layers_label(r.cell.layers) + " lr=" +
                      data::format_number(r.cell.learning_rate) + " clip=" + clip]
                .push_back(r.best_val_loss);
        } else {
            csv << std::string() << std::string();
            ++failures;
        }
        csv << r.wall_seconds << (r.diverged ? 1 : 0) << r.error;
        csv.end_row();
    }
    json best = json::object();
    for (const auto& [name, losses] : by_config) best[name] = *std::min_element(losses.begin(), losses.end());
    run.summary["runs"] = rows.size();
    run.summary["failed_runs"] = failures;
    run.summary["best_val_loss_by_config"] = best;
    close_run(run);
    return 0;
}

void write_finetune_outputs(RunContext& run, const Checkpoint& ck, const Dataset& stream, const FinetuneConfig& cfg) {
    std::vector<std::string> header{"step", "timestamp", "session"};
    for (const auto& name : stream.target_names) {
        for (const char* suffix : {"_true", "_frozen", "_tuned"}) header.push_back(name + suffix);
    }
    for (const char* col : {"frozen_loss", "tuned_loss", "frozen_cumulative", "tuned_cumulative", "anchor_distance"}) {
        header.emplace_back(col);
    }
    CsvWriter csv(run.dir / "steps.csv", header);
    const FinetuneSummary s = run_finetune(
        ck.network, stream, cfg,
        [&](const StepRecord& r) {
            csv << r.step << r.timestamp << r.session;
            for (Index k = 0; k < r.target->size(); ++k) {
                const auto kk = static_cast<std::size_t>(k);
                csv << ck.pipeline.restore_target(kk, (*r.target)[k])
                    << ck.pipeline.restore_target(kk, (*r.frozen_prediction)[k])
                    << ck.pipeline.restore_target(kk, (*r.tuned_prediction)[k]);
            }
            csv << r.frozen_loss << r.tuned_loss << r.frozen_cumulative << r.tuned_cumulative << r.anchor_distance;
            csv.end_row();
        },
        cfg.carry_optimizer ? &ck.optimizer : nullptr);

    Checkpoint tuned = ck;
    tuned.network = s.final_network;
    tuned.command = "finetune";
    tuned.config = finetune_json(cfg);
    tuned.seed = cfg.seed;
    save_checkpoint(run.dir / "checkpoint.json", tuned);

    run.summary["steps"] = s.steps;
    run.summary["frozen_total"] = s.frozen_total;
    run.summary["tuned_total"] = s.tuned_total;
    run.summary["frozen_mean"] = s.frozen_mean();
    run.summary["tuned_mean"] = s.tuned_mean();
    run.summary["improvement_ratio"] = s.frozen_total > 0.0 ? s.tuned_total / s.frozen_total : 1.0;
    run.summary["anchor_distance"] = s.anchor_distance;
    run.summary["diverged"] = s.diverged;
    if (s.diverged) run.summary["divergence"] = s.divergence;
}

int run_finetune_cmd(const fs::path& root, const std::string& checkpoint, const DataArgs& data,
                     const FinetuneArgs& args, std::uint64_t seed) {
    const FinetuneConfig cfg = args.resolve(seed);
    json config = finetune_json(cfg);
    config["checkpoint"] = checkpoint;
    config["data"] = data.to_json();
    RunContext run = open_run(root, "finetune", config);
    const Checkpoint ck = load_checkpoint(checkpoint);
    write_finetune_outputs(run, ck, stream_for(ck, data), cfg);
    close_run(run);
    return 0;
}

int run_ablate(const fs::path& root, const std::string& checkpoint, const DataArgs& data, const FinetuneArgs& args,
               const AblationGrid& grid, std::uint64_t seed) {
    const FinetuneConfig base = args.resolve(seed);
    json config = finetune_json(base);
    config["checkpoint"] = checkpoint;
    config["data"] = data.to_json();
    config["lambdas"] = grid.lambdas;
    config["freezes"] = grid.freezes;
    RunContext run = open_run(root, "ablate", config);
    const Checkpoint ck = load_checkpoint(checkpoint);
    const std::vector<AblationRow> rows = run_ablation(ck.network, stream_for(ck, data), base, grid);
    CsvWriter csv(run.dir / "ablation.csv",
                  {"grid", "lambda_reg", "freeze_after", "total_loss", "mean_loss", "anchor_distance"});
    json table = json::array();
    for (const auto& r : rows) {
        csv << r.grid << r.lambda_reg;
        if (r.freeze_after) {
            csv << *r.freeze_after;
        } else {
            csv << std::string();
        }
        csv << r.total_loss << r.mean_loss << r.anchor_distance;
        csv.end_row();
        table.push_back({{"grid", r.grid},
                         {"lambda_reg", r.lambda_reg},
                         {"freeze_after", r.freeze_after ? json(*r.freeze_after) : json(nullptr)},
                         {"total_loss", r.total_loss}});
    }
    run.summary["rows"] = table;
    close_run(run);
    return 0;
}

int run_evaluate(const fs::path& root, const std::string& checkpoint, const DataArgs& data, double delta,
                 std::uint64_t seed) {
    json config = {{"checkpoint", checkpoint}, {"data", data.to_json()}, {"huber_delta", delta}, {"seed", seed}};
    RunContext run = open_run(root, "evaluate", config);
    const Checkpoint ck = load_checkpoint(checkpoint);
    const Dataset stream = stream_for(ck, data);
    std::vector<std::string> header{"step", "timestamp", "session"};
    for (const auto& name : stream.target_names) {
        header.push_back(name + "_true");
        header.push_back(name + "_pred");
    }
    CsvWriter csv(run.dir / "predictions.csv", header);
    const Evaluation e = evaluate(ck.network, stream, delta,
                                 [&](long step, const SessionData& s, Index t, const Vector& pred) {
                                     csv << step << s.timestamps[static_cast<std::size_t>(t)] << s.id;
                                     for (Index k = 0; k < pred.size(); ++k) {
                                         const auto kk = static_cast<std::size_t>(k);
                                         csv << ck.pipeline.restore_target(kk, s.targets(t, k))
                                             << ck.pipeline.restore_target(kk, pred[k]);
                                     }
                                     csv.end_row();
                                 });
    run.summary["steps"] = e.steps;
    run.summary["huber_total"] = e.huber_total;
    run.summary["huber_mean"] = e.huber_mean;
    json mse = json::object();
    for (std::size_t k = 0; k < e.mse.size(); ++k) mse[stream.target_names[k]] = e.mse[k];
    run.summary["mse"] = mse;
    close_run(run);
    return 0;
}

int run_impute_bench(const fs::path& root, const data::GeneratorConfig& gen, const ImputeBenchConfig& cfg,
                     double train_fraction) {
    json config = {{"sessions", gen.sessions}, {"duration_s", gen.duration_s}, {"noise_scale", gen.noise_scale},
                   {"mask_rate", cfg.mask_rate}, {"window", cfg.window},    {"k", cfg.k},
                   {"seed", cfg.seed},           {"train_fraction", train_fraction}};
    RunContext run = open_run(root, "impute-bench", config);
    data::GeneratorConfig complete = gen;
    complete.missing_rate = 0.0;
    const data::SyntheticData d = data::generate_synthetic(complete);
    const data::SeriesTable val = data::split_sessions(d.emission, train_fraction).val;
    const ImputeBenchResult r = impute_bench(val, cfg);
    CsvWriter csv(run.dir / "imputation.csv", {"method", "mse"});
    csv << std::string("knn") << r.knn_mse;
    csv.end_row();
    csv << std::string("rolling_median") << r.rolling_mse;
    csv.end_row();
    run.summary["rows"] = r.rows;
    run.summary["masked_cells"] = r.masked_cells;
    run.summary["knn_mse"] = r.knn_mse;
    run.summary["rolling_mse"] = r.rolling_mse;
    close_run(run);
    return 0;
}

void add_generator_options(CLI::App* app, data::GeneratorConfig& g) {
    app->add_option("--sessions", g.sessions, "Number of recording sessions")->capture_default_str();
    app->add_option("--duration", g.duration_s, "Seconds per session")->capture_default_str();
    app->add_option("--noise-scale", g.noise_scale, "Multiplier on all noise terms")->capture_default_str();
    app->add_option("--shift-sessions", g.shift.sessions, "Trailing sessions with shifted dynamics")
        ->capture_default_str();
    app->add_option("--emission-gain", g.shift.emission_gain, "Emission multiplier in shifted sessions")
        ->capture_default_str();
    app->add_option("--temp-offset", g.shift.temp_offset_c, "Ambient offset (C) in shifted sessions")
        ->capture_default_str();
    app->add_option("--start-epoch", g.start_epoch, "Unix time of the first session")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    g_argv.assign(argv, argv + argc);
    CLI::App app{"LRU emission model toolkit"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string runs_root = "runs";
    auto common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Random seed")->capture_default_str();
        sub->add_option("--runs", runs_root, "Root directory for run outputs")->capture_default_str();
    };

    data::GeneratorConfig gen;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset with a distribution shift");
    gen_cmd->add_option("--out", gen_out, "Output directory")->required();
    add_generator_options(gen_cmd, gen);
    gen_cmd->add_option("--missing-rate", gen.missing_rate, "Share of dropped emission rows")->capture_default_str();
    gen_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();

    DataArgs data;
    auto* pre_cmd = app.add_subcommand("preprocess", "Clean, split and standardize a dataset");
    data.add(pre_cmd);
    common(pre_cmd);

    TrainArgs train;
    auto* pt_cmd = app.add_subcommand("pretrain", "Train an LRU network offline");
    data.add(pt_cmd);
    train.add(pt_cmd, false);
    common(pt_cmd);

    TrainArgs sweep_train;
    SweepArgs sweep;
    auto* sw_cmd = app.add_subcommand("sweep", "Grid of pretraining runs");
    data.add(sw_cmd);
    sweep_train.add(sw_cmd, true);
    sweep.add(sw_cmd);
    common(sw_cmd);

    std::string checkpoint;
    FinetuneArgs ft;
    auto* ft_cmd = app.add_subcommand("finetune", "Online fine-tuning on the validation stream");
    ft_cmd->add_option("--checkpoint", checkpoint, "Pretrained checkpoint")->required()->check(CLI::ExistingFile);
    data.add(ft_cmd);
    ft.add(ft_cmd, false);
    common(ft_cmd);

    FinetuneArgs ab;
    AblationGrid ab_grid;
    auto* ab_cmd = app.add_subcommand("ablate", "Anchor strength and freeze-point ablation");
    ab_cmd->add_option("--checkpoint", checkpoint, "Pretrained checkpoint")->required()->check(CLI::ExistingFile);
    data.add(ab_cmd);
    ab.add(ab_cmd, true);
    ab_cmd->add_option("--lambdas", ab_grid.lambdas, "Anchor strengths")->capture_default_str();
    ab_cmd->add_option("--freezes", ab_grid.freezes, "Freeze points in steps")->capture_default_str();
    common(ab_cmd);

    double eval_delta = 1.0;
    auto* ev_cmd = app.add_subcommand("evaluate", "Frozen evaluation on the validation stream");
    ev_cmd->add_option("--checkpoint", checkpoint, "Checkpoint to evaluate")->required()->check(CLI::ExistingFile);
    data.add(ev_cmd);
    ev_cmd->add_option("--huber-delta", eval_delta, "Huber threshold")->capture_default_str();
    common(ev_cmd);

    data::GeneratorConfig bench_gen;
    ImputeBenchConfig bench;
    double bench_fraction = 0.8;
    auto* ib_cmd = app.add_subcommand("impute-bench", "Rolling median vs KNN imputation on masked cells");
    add_generator_options(ib_cmd, bench_gen);
    ib_cmd->add_option("--mask-rate", bench.mask_rate, "Share of cells hidden")->capture_default_str();
    ib_cmd->add_option("--window", bench.window, "Rolling median window")->capture_default_str();
    ib_cmd->add_option("--k", bench.k, "KNN neighbours")->capture_default_str();
    ib_cmd->add_option("--train-fraction", bench_fraction, "Sessions held out for training")->capture_default_str();
    common(ib_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        const fs::path root(runs_root);
        if (*gen_cmd) {
            gen.seed = seed;
            return run_gen_data(gen_out, gen);
        }
        if (*pre_cmd) return run_preprocess(root, data, seed);
        if (*pt_cmd) return run_pretrain(root, data, train, seed);
        if (*sw_cmd) return run_sweep_cmd(root, data, sweep_train, sweep, seed);
        if (*ft_cmd) return run_finetune_cmd(root, checkpoint, data, ft, seed);
        if (*ab_cmd) return run_ablate(root, checkpoint, data, ab, ab_grid, seed);
        if (*ev_cmd) return run_evaluate(root, checkpoint, data, eval_delta, seed);
        if (*ib_cmd) {
            bench_gen.seed = seed;
            bench.seed = seed;
            return run_impute_bench(root, bench_gen, bench, bench_fraction);
        }
    } catch (const ParseError& e) {
        std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what();
        if (e.byte_offset() >= 0) std::cerr << " (byte " << e.byte_offset() << ')';
        std::cerr << '\n';
        return exit_code(e.kind());
    } catch (const Error& e) {
        std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error[" << to_string(ErrorKind::Io) << "]: " << e.what() << '\n';
        return exit_code(ErrorKind::Io);
    }
    return 0;
}
