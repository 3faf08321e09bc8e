#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lru/dataset.hpp"
#include "lru/network.hpp"
#include "lru/optim.hpp"
#include "lru/rtrl.hpp"

namespace lru::harness {

struct FinetuneConfig {
    double lambda_reg = 0.01;
    /// Update only during the first N stream steps; 0 never updates.
    std::optional<long> freeze_after;
    double learning_rate = 1e-3;
    std::optional<double> clip = 0.5;
    double huber_delta = 1.0;
    bool squared_anchor = false;
    /// Start from the checkpoint's Adam moments instead of a fresh state.
    bool carry_optimizer = false;
    std::uint64_t seed = 0;
};

/// Everything logged for one stream step. Predictions are made before the
/// step's update. Vectors are only valid during the callback.
struct StepRecord {
    long step = 0;  // 1-based
    double timestamp = 0.0;
    int session = 0;
    const Vector* target = nullptr;
    const Vector* frozen_prediction = nullptr;
    const Vector* tuned_prediction = nullptr;
    double frozen_loss = 0.0;
    double tuned_loss = 0.0;
    double frozen_cumulative = 0.0;
    double tuned_cumulative = 0.0;
    double anchor_distance = 0.0;  // ||theta - theta_pre|| after the step's update
};

using StepSink = std::function<void(const StepRecord&)>;

/// Online RTRL fine-tuning of a copy of `pretrained`, paired with the frozen
/// network on the same inputs. Memory does not grow with stream length.
class OnlineFinetuner {
public:
    OnlineFinetuner(const Network& pretrained, const FinetuneConfig& cfg, const AdamState* carried = nullptr);

    /// Predict with both networks, then (unless frozen) update the tuned one
    /// from the observed target. Returns the record of this step.
    const StepRecord& step(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& y);

    /// Zero hidden states and traces, e.g. at a session boundary.
    void reset_state();

    const Network& network() const { return tuned_; }
    const Vector& parameters() const { return theta_; }
    const Vector& anchor() const { return anchor_.theta_pre; }
    long steps() const { return t_; }
    bool diverged() const { return diverged_; }
    const std::string& divergence() const { return divergence_; }
    std::size_t trace_bytes() const { return rtrl_.traces().bytes(); }

private:
    FinetuneConfig cfg_;
    HuberLoss loss_;
    Network frozen_;
    Network tuned_;
    NetworkStepper frozen_stepper_;
    NetworkState frozen_states_;
    RtrlStepper rtrl_;
    StepGradient step_grad_;
    Vector theta_;
    Vector grad_;
    Vector dl_;
    Vector frozen_pred_;
    Vector tuned_pred_;
    Vector target_;
    AnchorConfig anchor_;
    AdamState adam_;
    StepRecord record_;
    long t_ = 0;
    bool diverged_ = false;
    std::string divergence_;
};

struct FinetuneSummary {
    long steps = 0;
    double frozen_total = 0.0;
    double tuned_total = 0.0;
    double anchor_distance = 0.0;  // end of stream
    bool diverged = false;
    std::string divergence;
    Network final_network;

    double frozen_mean() const { return steps > 0 ? frozen_total / static_cast<double>(steps) : 0.0; }
    double tuned_mean() const { return steps > 0 ? tuned_total / static_cast<double>(steps) : 0.0; }
};

/// Streams every session of `stream` in order through an OnlineFinetuner,
/// resetting hidden state at session boundaries. Throws a Compatibility error
/// if the stream's widths differ from the network's.
FinetuneSummary run_finetune(const Network& pretrained, const Dataset& stream, const FinetuneConfig& cfg,
                             const StepSink& sink = {}, const AdamState* carried = nullptr);

struct AblationRow {
    std::string grid;  // "lambda", "freeze" or "baseline"
    double lambda_reg = 0.0;
    std::optional<long> freeze_after;
    double total_loss = 0.0;
    double mean_loss = 0.0;
    double anchor_distance = 0.0;
};

struct AblationGrid {
    std::vector<double> lambdas{0.0, 0.001, 0.01, 0.1};
    std::vector<long> freezes{1000, 2000, 3000};
};

/// Full-horizon runs over the lambda grid, freeze runs at the best lambda and
/// at lambda = 0, and the frozen baseline as the last row.
std::vector<AblationRow> run_ablation(const Network& pretrained, const Dataset& stream, const FinetuneConfig& base,
                                      const AblationGrid& grid = {});

}  // namespace lru::harness
