#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "lru/bptt.hpp"
#include "lru/data/synthetic.hpp"
#include "lru/error.hpp"
#include "lru/harness/checkpoint.hpp"
#include "lru/harness/evaluate.hpp"
#include "lru/harness/finetune.hpp"
#include "lru/harness/impute_bench.hpp"
#include "lru/harness/prepare.hpp"
#include "lru/harness/pretrain.hpp"
#include "lru/harness/run_dir.hpp"

namespace lru::harness {
namespace {

RawData small_raw(std::uint64_t seed = 3, double duration = 600.0) {
    data::GeneratorConfig g;
    g.sessions = 5;
    g.duration_s = duration;
    g.seed = seed;
    const data::SyntheticData d = data::generate_synthetic(g);
    return {d.emission, d.weather};
}

const PreparedData& small_data() {
    static const PreparedData data = prepare(small_raw());
    return data;
}

PretrainConfig quick_config(long steps) {
    PretrainConfig cfg;
    cfg.widths = {8};
    cfg.train.steps = steps;
    cfg.train.batch = 4;
    cfg.train.window = 32;
    cfg.train.learning_rate = 1e-2;
    cfg.train.eval_every = 10;
    cfg.train.seed = 5;
    return cfg;
}

const PretrainResult& quick_pretrain() {
    static const PretrainResult r = pretrain(small_data(), quick_config(40));
    return r;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("lru_harness_" + std::to_string(::getpid()) + "_" + name);
}

// ---- checkpoints ----------------------------------------------------------

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
    const Checkpoint& ck = quick_pretrain().checkpoint;
    const std::string first = serialize_checkpoint(ck);
    const std::string second = serialize_checkpoint(parse_checkpoint(first));
    EXPECT_EQ(first, second);

    const auto path = temp_path("ck.json");
    save_checkpoint(path, ck);
    const Checkpoint loaded = load_checkpoint(path);
    std::filesystem::remove(path);
    EXPECT_EQ(serialize_checkpoint(loaded), first);
    EXPECT_EQ(loaded.command, "pretrain");
    EXPECT_EQ(loaded.pipeline.feature_names(), ck.pipeline.feature_names());
}

TEST(Checkpoint, RoundTripPreservesPredictionsBitwise) {
    const Checkpoint& ck = quick_pretrain().checkpoint;
    const Checkpoint loaded = parse_checkpoint(serialize_checkpoint(ck));
    EXPECT_EQ(flatten(loaded.network), flatten(ck.network));
    const SeqMatrix& u = small_data().val.sessions[0].inputs;
    EXPECT_EQ(predict_sequence(loaded.network, u), predict_sequence(ck.network, u));
    EXPECT_EQ(loaded.optimizer.m, ck.optimizer.m);
    EXPECT_EQ(loaded.optimizer.t, ck.optimizer.t);
}

TEST(Checkpoint, BumpedVersionIsVersionError) {
    std::string text = serialize_checkpoint(quick_pretrain().checkpoint);
    const auto pos = text.find("\"version\": 1");
    ASSERT_NE(pos, std::string::npos);
    text.replace(pos, 12, "\"version\": 2");
    try {
        parse_checkpoint(text);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Version);
    }
}

TEST(Checkpoint, CorruptionReportsByteOffset) {
    const std::string text = serialize_checkpoint(quick_pretrain().checkpoint);
    std::string broken = text;
    broken[text.size() / 2] = '@';
    try {
        parse_checkpoint(broken);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_GE(e.byte_offset(), static_cast<long>(text.size() / 2));
    }
    EXPECT_THROW(parse_checkpoint(text.substr(0, text.size() / 3)), ParseError);
    EXPECT_THROW(parse_checkpoint("{\"format\": \"something-else\"}"), ParseError);
}

TEST(Checkpoint, ConfigHashIsStable) {
    const nlohmann::json a = {{"b", 1}, {"a", 2}};
    const nlohmann::json b = {{"a", 2}, {"b", 1}};
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    EXPECT_NE(config_hash(a), config_hash(nlohmann::json{{"a", 3}}));
}

// ---- pretrain / sweep -----------------------------------------------------

TEST(Pretrain, ZeroStepsGivesInitialisation) {
    PretrainConfig cfg = quick_config(0);
    const PretrainResult r = pretrain(small_data(), cfg);
    NetworkInit init;
    init.input_size = small_data().train.input_size();
    init.output_size = 5;
    init.widths = cfg.widths;
    init.seed = cfg.train.seed;
    EXPECT_EQ(flatten(r.checkpoint.network), flatten(init_network(init)));
}

TEST(Pretrain, SameSeedSameCheckpointBytes) {
    const PretrainResult again = pretrain(small_data(), quick_config(40));
    EXPECT_EQ(serialize_checkpoint(again.checkpoint), serialize_checkpoint(quick_pretrain().checkpoint));
    ASSERT_EQ(again.training.curve.size(), quick_pretrain().training.curve.size());
    for (std::size_t i = 1; i < again.training.curve.size(); ++i) {
        EXPECT_EQ(again.training.curve[i].train_loss, quick_pretrain().training.curve[i].train_loss);
    }
}

TEST(Pretrain, DefaultBpttConfigurationIsExpressible) {
    PretrainConfig cfg;
    cfg.widths = {16};
    cfg.train.trainer = Trainer::Bptt;
    cfg.train.learning_rate = 1e-3;
    cfg.train.clip = 0.5;
    cfg.train.batch = 256;
    const auto j = to_json(cfg);
    EXPECT_EQ(j.at("layers"), nlohmann::json({16}));
    EXPECT_EQ(j.at("clip"), 0.5);
    EXPECT_EQ(j.at("batch"), 256);
    EXPECT_EQ(layers_label(cfg.widths), "(16,)");
    EXPECT_EQ(layers_label({8, 8, 8}), "(8, 8, 8)");
}

TEST(Pretrain, RtrlTrainerProducesCheckpoint) {
    PretrainConfig cfg = quick_config(10);
    cfg.train.trainer = Trainer::Rtrl;
    cfg.train.cadence = RtrlCadence::PerStep;
    const PretrainResult r = pretrain(small_data(), cfg);
    EXPECT_FALSE(r.training.diverged);
    EXPECT_EQ(r.checkpoint.config.at("trainer"), "rtrl");
}

TEST(Sweep, FullGridHas450Cells) {
    EXPECT_EQ(plan_sweep(SweepGrid{}, 0).size(), 450u);
}

TEST(Sweep, CellsSortedByConfigThenRepeat) {
    const auto cells = plan_sweep(SweepGrid{}, 100);
    EXPECT_EQ(cells.front().trainer, Trainer::Bptt);
    EXPECT_EQ(cells.back().trainer, Trainer::Rtrl);
    for (int r = 0; r < 5; ++r) {
        EXPECT_EQ(cells[static_cast<std::size_t>(r)].repeat, r);
        EXPECT_EQ(cells[static_cast<std::size_t>(r)].seed, 100u + static_cast<std::uint64_t>(r));
    }
    EXPECT_EQ(cells[5].clip, std::optional<double>(1.0));
}

TEST(Sweep, SingleCellSingleRow) {
    SweepGrid grid;
    grid.layers = {{4}};
    grid.learning_rates = {1e-2};
    grid.clips = {0.5};
    grid.trainers = {Trainer::Bptt};
    grid.repeats = 1;
    const auto rows = run_sweep(small_data(), grid, quick_config(5));
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_TRUE(rows[0].error.empty());
    EXPECT_TRUE(std::isfinite(rows[0].best_val_loss));
}

TEST(Sweep, FailedRunIsRecordedAndSweepContinues) {
    SweepGrid grid;
    grid.layers = {{4}};
    grid.learning_rates = {1e-2, -1.0};
    grid.clips = {0.5};
    grid.trainers = {Trainer::Bptt};
    grid.repeats = 1;
    const auto rows = run_sweep(small_data(), grid, quick_config(3), 2);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_TRUE(rows[0].error.empty());
    EXPECT_FALSE(rows[1].error.empty());
}

// ---- fine-tuning ----------------------------------------------------------

const Network& pretrained() { return quick_pretrain().checkpoint.network; }
const Dataset& stream() { return small_data().val; }

struct Trace {
    std::vector<Vector> frozen;
    std::vector<Vector> tuned;
    std::vector<double> distance;
};

Trace record(const FinetuneConfig& cfg, const Dataset& data) {
    Trace tr;
    run_finetune(pretrained(), data, cfg, [&](const StepRecord& r) {
        tr.frozen.push_back(*r.frozen_prediction);
        tr.tuned.push_back(*r.tuned_prediction);
        tr.distance.push_back(r.anchor_distance);
    });
    return tr;
}

TEST(Finetune, ZeroLearningRateMatchesFrozenBaseline) {
    FinetuneConfig cfg;
    cfg.learning_rate = 0.0;
    const Trace tr = record(cfg, stream());
    ASSERT_FALSE(tr.tuned.empty());
    for (std::size_t i = 0; i < tr.tuned.size(); ++i) EXPECT_EQ(tr.tuned[i], tr.frozen[i]);
    const FinetuneSummary s = run_finetune(pretrained(), stream(), cfg);
    EXPECT_EQ(s.tuned_total, s.frozen_total);
}

TEST(Finetune, FreezeAtZeroMatchesFrozenBaseline) {
    FinetuneConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.freeze_after = 0;
    const FinetuneSummary s = run_finetune(pretrained(), stream(), cfg);
    EXPECT_EQ(s.tuned_total, s.frozen_total);
    EXPECT_EQ(s.anchor_distance, 0.0);
}

TEST(Finetune, FrozenParametersStayBitwiseFixed) {
    FinetuneConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.freeze_after = 50;
    OnlineFinetuner tuner(pretrained(), cfg);
    const SessionData& s = stream().sessions[0];
    Vector at_freeze;
    for (Index t = 0; t < 200; ++t) {
        tuner.step(s.inputs.row(t).transpose(), s.targets.row(t).transpose());
        if (tuner.steps() == 50) at_freeze = tuner.parameters();
        if (tuner.steps() > 50) EXPECT_EQ(tuner.parameters(), at_freeze);
    }
    EXPECT_NE(at_freeze, flatten(pretrained()));
}

TEST(Finetune, FreezeRunAgreesWithUnfrozenUpToFreezePoint) {
    FinetuneConfig cfg;
    cfg.learning_rate = 1e-2;
    const Trace full = record(cfg, stream());
    cfg.freeze_after = 120;
    const Trace frozen = record(cfg, stream());
    for (std::size_t i = 0; i <= 120; ++i) EXPECT_EQ(full.tuned[i], frozen.tuned[i]) << i;
    for (std::size_t i = 0; i < 120; ++i) EXPECT_EQ(full.distance[i], frozen.distance[i]);
}

TEST(Finetune, PredictionsNeverSeeTheirOwnLabel) {
    FinetuneConfig cfg;
    cfg.learning_rate = 1e-2;
    const Trace base = record(cfg, stream());
    Dataset perturbed = stream();
    const Index t_star = 77;
    perturbed.sessions[0].targets.row(t_star).array() += 5.0;
    const Trace after = record(cfg, perturbed);
    for (Index t = 0; t <= t_star; ++t) {
        EXPECT_EQ(after.tuned[static_cast<std::size_t>(t)], base.tuned[static_cast<std::size_t>(t)]);
    }
    EXPECT_NE(after.tuned[static_cast<std::size_t>(t_star + 1)], base.tuned[static_cast<std::size_t>(t_star + 1)]);
}

TEST(Finetune, PairedTracesHaveEqualLength) {
    std::size_t n = 0;
    std::vector<double> stamps;
    const FinetuneSummary s = run_finetune(pretrained(), stream(), FinetuneConfig{}, [&](const StepRecord& r) {
        ++n;
        stamps.push_back(r.timestamp);
        EXPECT_EQ(r.frozen_prediction->size(), r.tuned_prediction->size());
    });
    EXPECT_EQ(static_cast<Index>(n), stream().total_steps());
    EXPECT_EQ(s.steps, static_cast<long>(n));
    EXPECT_EQ(stamps.front(), stream().sessions[0].timestamps.front());
}

TEST(Finetune, ZeroAnchorStrengthAddsNoGradient) {
    FinetuneConfig with;
    with.lambda_reg = 0.0;
    FinetuneConfig squared = with;
    squared.squared_anchor = true;
    const FinetuneSummary a = run_finetune(pretrained(), stream(), with);
    const FinetuneSummary b = run_finetune(pretrained(), stream(), squared);
    EXPECT_EQ(flatten(a.final_network), flatten(b.final_network));
}

TEST(Finetune, WidthMismatchIsCompatibilityError) {
    Dataset bad = stream();
    bad.feature_names.pop_back();
    for (auto& s : bad.sessions) s.inputs.conservativeResize(Eigen::NoChange, s.inputs.cols() - 1);
    try {
        run_finetune(pretrained(), bad, FinetuneConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Compatibility);
    }
}

TEST(Finetune, TraceMemoryIsConstantOverTheStream) {
    OnlineFinetuner tuner(pretrained(), FinetuneConfig{});
    const std::size_t bytes = tuner.trace_bytes();
    const SessionData& s = stream().sessions[0];
    for (int rep = 0; rep < 3; ++rep) {
        for (Index t = 0; t < s.length(); ++t) tuner.step(s.inputs.row(t).transpose(), s.targets.row(t).transpose());
    }
    EXPECT_EQ(tuner.trace_bytes(), bytes);
}

TEST(Ablation, RowLayoutAndConsistency) {
    AblationGrid grid;
    grid.freezes = {100, 200, 300};
    FinetuneConfig base;
    base.learning_rate = 1e-2;
    const auto rows = run_ablation(pretrained(), stream(), base, grid);
    ASSERT_EQ(rows.size(), 4u + 6u + 1u);
    EXPECT_EQ(rows.back().grid, "baseline");
    FinetuneConfig direct = base;
    direct.lambda_reg = 0.0;
    const FinetuneSummary s = run_finetune(pretrained(), stream(), direct);
    EXPECT_EQ(rows[0].total_loss, s.tuned_total);
    EXPECT_EQ(rows.back().total_loss, s.frozen_total);
    for (std::size_t i = 7; i < 10; ++i) EXPECT_EQ(rows[i].lambda_reg, 0.0);
}

// ---- evaluation -----------------------------------------------------------

TEST(Evaluate, MatchesRecordedBestValidationLoss) {
    const PretrainResult& r = quick_pretrain();
    const Evaluation e = evaluate(r.checkpoint.network, small_data().val);
    EXPECT_EQ(e.huber_mean, r.training.best_val_loss);
    EXPECT_EQ(e.mse.size(), 5u);
    EXPECT_EQ(e.steps, small_data().val.total_steps());
}

TEST(Evaluate, RepeatedEvaluationIsIdentical) {
    std::vector<double> a, b;
    evaluate(pretrained(), stream(), 1.0, [&](long, const SessionData&, Index, const Vector& p) { a.push_back(p[0]); });
    evaluate(pretrained(), stream(), 1.0, [&](long, const SessionData&, Index, const Vector& p) { b.push_back(p[0]); });
    EXPECT_EQ(a, b);
}

// ---- data preparation and run directories ---------------------------------

TEST(Prepare, ValidationStreamMatchesPreparedSplit) {
    const RawData raw = small_raw();
    const Dataset val = prepare_validation(raw, small_data().pipeline);
    ASSERT_EQ(val.sessions.size(), small_data().val.sessions.size());
    EXPECT_EQ(val.sessions[0].inputs, small_data().val.sessions[0].inputs);
    EXPECT_EQ(small_data().train.sessions.size(), 4u);
}

TEST(Prepare, LoadsGeneratedFiles) {
    data::GeneratorConfig g;
    g.sessions = 3;
    g.duration_s = 300;
    const auto dir = temp_path("gen");
    data::write_synthetic(dir, data::generate_synthetic(g));
    const RawData raw = load_raw(dir);
    std::filesystem::remove(dir / "sessions.json");
    const RawData by_gap = load_raw(dir);
    std::filesystem::remove_all(dir);
    EXPECT_EQ(raw.emission.sessions().size(), 3u);
    EXPECT_EQ(raw.emission.session, by_gap.emission.session);
}

TEST(RunDir, CreatesUniqueDirectories) {
    const auto root = temp_path("runs");
    const auto a = make_run_dir(root, "evaluate", "0123456789abcdef");
    const auto b = make_run_dir(root, "evaluate", "0123456789abcdef");
    EXPECT_NE(a, b);
    EXPECT_NE(a.filename().string().find("evaluate-01234567"), std::string::npos);
    {
        CsvWriter csv(a / "m.csv", {"step", "value", "label"});
        csv << 1L << 0.5 << std::string("a,b");
        csv.end_row();
    }
    std::ifstream in(a / "m.csv");
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "step,value,label\n1,0.5,\"a,b\"\n");
    std::filesystem::remove_all(root);
}

TEST(ImputeBench, RollingBeatsKnnOnSmoothSignals) {
    data::GeneratorConfig g;
    g.sessions = 1;
    g.duration_s = 900;
    g.missing_rate = 0.0;
    g.shift.sessions = 0;
    const auto d = data::generate_synthetic(g);
    const ImputeBenchResult r = impute_bench(d.emission, {0.2, 5, 20, 11});
    EXPECT_EQ(r.rows, 901u);
    EXPECT_GT(r.masked_cells, 1500u);
    EXPECT_LT(r.rolling_mse, r.knn_mse);
}

}  // namespace
}  // namespace lru::harness
