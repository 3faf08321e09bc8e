#include "lru/harness/finetune.hpp"

#include <cmath>
#include <limits>

#include "lru/error.hpp"

namespace lru::harness {

OnlineFinetuner::OnlineFinetuner(const Network& pretrained, const FinetuneConfig& cfg, const AdamState* carried)
    : cfg_(cfg),
      loss_(cfg.huber_delta),
      frozen_(pretrained),
      tuned_(pretrained),
      frozen_stepper_(pretrained),
      frozen_states_(zero_state(pretrained)),
      rtrl_(pretrained),
      step_grad_(StepGradient::zeros_like(pretrained)),
      theta_(flatten(pretrained)),
      grad_(theta_.size()),
      dl_(pretrained.output_size()),
      frozen_pred_(pretrained.output_size()),
      tuned_pred_(pretrained.output_size()),
      target_(pretrained.output_size()) {
    if (cfg.learning_rate < 0.0) fail(ErrorKind::Config, "learning rate must be non-negative");
    if (cfg.freeze_after && *cfg.freeze_after < 0) fail(ErrorKind::Config, "freeze_after must be non-negative");
    if (cfg.clip && !(*cfg.clip > 0.0)) fail(ErrorKind::Config, "clip norm must be positive");
    anchor_.theta_pre = theta_;
    anchor_.lambda_reg = cfg.lambda_reg;
    anchor_.squared = cfg.squared_anchor;
    anchor_penalty(theta_, anchor_);  // validates lambda_reg
    if (cfg.carry_optimizer && carried != nullptr && carried->m.size() == theta_.size()) {
        adam_ = *carried;
        adam_.config.learning_rate = cfg.learning_rate;
    } else {
        adam_ = AdamState::fresh(theta_.size(), {cfg.learning_rate});
    }
}

void OnlineFinetuner::reset_state() {
    for (auto& h : frozen_states_) {
        h.re.setZero();
        h.im.setZero();
    }
    rtrl_.reset();
}

const StepRecord& OnlineFinetuner::step(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& y) {
    ++t_;
    target_ = y;
    frozen_pred_ = frozen_stepper_.step(frozen_, frozen_states_, u);
    tuned_pred_ = rtrl_.forward(tuned_, u);

    record_.step = t_;
    record_.target = &target_;
    record_.frozen_prediction = &frozen_pred_;
    record_.tuned_prediction = &tuned_pred_;
    record_.frozen_loss = loss_.value(frozen_pred_, y);
    record_.tuned_loss = loss_.value_and_gradient(tuned_pred_, y, dl_);
    record_.frozen_cumulative += record_.frozen_loss;
    record_.tuned_cumulative += record_.tuned_loss;

    const bool updating = !diverged_ && (!cfg_.freeze_after || t_ <= *cfg_.freeze_after);
    if (updating) {
        rtrl_.gradient(tuned_, dl_, step_grad_);
        flatten_into(step_grad_.layers, grad_);
        add_anchor_gradient(theta_, anchor_, grad_);
        clip_global_norm(grad_, cfg_.clip);
        try {
            adam_step(theta_, grad_, adam_);
            unflatten(tuned_.layers, theta_);
            rtrl_.refresh(tuned_);
        } catch (const TrainingError& e) {
            diverged_ = true;
            divergence_ = std::string(e.what()) + " at stream step " + std::to_string(t_);
        }
    }
    record_.anchor_distance = (theta_ - anchor_.theta_pre).norm();
    return record_;
}

FinetuneSummary run_finetune(const Network& pretrained, const Dataset& stream, const FinetuneConfig& cfg,
                             const StepSink& sink, const AdamState* carried) {
    pretrained.validate();
    if (stream.input_size() != pretrained.input_size() || stream.target_size() != pretrained.output_size()) {
        fail(ErrorKind::Compatibility, "stream has " + std::to_string(stream.input_size()) + " features and " +
                                           std::to_string(stream.target_size()) + " targets; the network expects " +
                                           std::to_string(pretrained.input_size()) + " and " +
                                           std::to_string(pretrained.output_size()));
    }
    OnlineFinetuner tuner(pretrained, cfg, carried);
    const StepRecord* last = nullptr;
    for (std::size_t s = 0; s < stream.sessions.size(); ++s) {
        const SessionData& session = stream.sessions[s];
        if (s > 0) tuner.reset_state();
        for (Index t = 0; t < session.length(); ++t) {
            const StepRecord& rec = tuner.step(session.inputs.row(t).transpose(), session.targets.row(t).transpose());
            if (sink) {
                StepRecord copy = rec;
                copy.timestamp = session.timestamps.empty() ? 0.0 : session.timestamps[static_cast<std::size_t>(t)];
                copy.session = session.id;
                sink(copy);
            }
            last = &rec;
        }
    }
    FinetuneSummary out;
    out.steps = tuner.steps();
    if (last != nullptr) {
        out.frozen_total = last->frozen_cumulative;
        out.tuned_total = last->tuned_cumulative;
    }
    out.anchor_distance = (tuner.parameters() - tuner.anchor()).norm();
    out.diverged = tuner.diverged();
    out.divergence = tuner.divergence();
    out.final_network = tuner.network();
    return out;
}

std::vector<AblationRow> run_ablation(const Network& pretrained, const Dataset& stream, const FinetuneConfig& base,
                                      const AblationGrid& grid) {
    std::vector<AblationRow> rows;
    double frozen_total = 0.0;
    long steps = 0;
    auto run = [&](const std::string& name, double lambda, std::optional<long> freeze) {
        FinetuneConfig cfg = base;
        cfg.lambda_reg = lambda;
        cfg.freeze_after = freeze;
        const FinetuneSummary s = run_finetune(pretrained, stream, cfg);
        frozen_total = s.frozen_total;
        steps = s.steps;
        rows.push_back({name, lambda, freeze, s.tuned_total, s.tuned_mean(), s.anchor_distance});
    };
    for (double lambda : grid.lambdas) run("lambda", lambda, std::nullopt);
    double best_lambda = grid.lambdas.empty() ? base.lambda_reg : grid.lambdas.front();
    double best_loss = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        if (r.total_loss < best_loss) {
            best_loss = r.total_loss;
            best_lambda = r.lambda_reg;
        }
    }
    for (double lambda : {best_lambda, 0.0}) {
        for (long n : grid.freezes) run("freeze", lambda, n);
    }
    if (rows.empty()) {
        FinetuneConfig cfg = base;
        cfg.freeze_after = 0;
        const FinetuneSummary s = run_finetune(pretrained, stream, cfg);
        frozen_total = s.frozen_total;
        steps = s.steps;
    }
    rows.push_back({"baseline", 0.0, 0L, frozen_total, steps > 0 ? frozen_total / static_cast<double>(steps) : 0.0,
                    0.0});
    return rows;
}

}  // namespace lru::harness
