#include "lru/training.hpp"

#include <cmath>
#include <limits>

#include "lru/error.hpp"
#include "lru/rtrl.hpp"

namespace lru {

BatchGradient rtrl_window_gradient(const Network& net, const WindowBatch& batch, const HuberLoss& loss) {
    if (batch.size() == 0) {
        fail(ErrorKind::Contract, "empty window batch");
    }
    const Index T = batch.inputs.front().rows();
    const double weight = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(T));

    BatchGradient out{0.0, StepGradient::zeros_like(net)};
    StepGradient step = StepGradient::zeros_like(net);
    RtrlStepper stepper(net);
    Vector dl(net.output_size());
    double total = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        stepper.reset();
        for (Index t = 0; t < T; ++t) {
            const Vector& pred = stepper.forward(net, batch.inputs[b].row(t).transpose());
            total += loss.value_and_gradient(pred, batch.targets[b].row(t).transpose(), dl);
            dl *= weight;
            stepper.gradient(net, dl, step);
            out.grads += step;
        }
        if (!std::isfinite(total)) {
            throw TrainingError("non-finite loss in window " + std::to_string(b), static_cast<long>(b));
        }
    }
    out.loss = total * weight;
    return out;
}

namespace {

void check_config(const TrainConfig& cfg) {
    if (cfg.steps < 0) fail(ErrorKind::Config, "steps must be non-negative");
    if (cfg.learning_rate < 0.0) fail(ErrorKind::Config, "learning rate must be non-negative");
    if (cfg.eval_every < 1) fail(ErrorKind::Config, "eval cadence must be at least 1");
    if (cfg.batch < 1) fail(ErrorKind::Config, "batch size must be at least 1");
    if (cfg.clip && !(*cfg.clip > 0.0)) fail(ErrorKind::Config, "clip norm must be positive");
}

/// Shared bookkeeping: parameter vector, optimizer, curve, best checkpoint.
class Loop {
public:
    Loop(const Network& init, const Dataset& val, const TrainConfig& cfg)
        : cfg_(cfg), loss_(cfg.huber_delta), val_(val), net_(init), theta_(flatten(init)),
          grad_(theta_.size()), adam_(AdamState::fresh(theta_.size(), {cfg.learning_rate})) {
        result_.best = init;
        result_.optimizer = adam_;
        result_.best_val_loss = std::numeric_limits<double>::infinity();
        LossRow row;
        row.step = 0;
        row.train_loss = std::numeric_limits<double>::quiet_NaN();
        if (!val_.empty()) {
            row.val_loss = evaluate_loss(net_, val_, loss_).mean();
            result_.best_val_loss = *row.val_loss;
        }
        result_.curve.push_back(row);
    }

    const Network& net() const { return net_; }
    const HuberLoss& loss() const { return loss_; }

    /// Clip, update and record one step. Returns false on divergence.
    bool apply(long step, const StepGradient& grads, double train_loss) {
        if (!std::isfinite(train_loss)) {
            diverge("non-finite training loss at step " + std::to_string(step));
            return false;
        }
        grad_ = flatten(grads);
        clip_global_norm(grad_, cfg_.clip);
        try {
            adam_step(theta_, grad_, adam_);
        } catch (const TrainingError& e) {
            diverge(e.what());
            return false;
        }
        if (!theta_.allFinite()) {
            diverge("non-finite parameters after step " + std::to_string(step));
            return false;
        }
        unflatten(net_.layers, theta_);

        LossRow row;
        row.step = step;
        row.train_loss = train_loss;
        if (step % cfg_.eval_every == 0 || step == cfg_.steps) {
            const double val = val_.empty() ? train_loss : evaluate_loss(net_, val_, loss_).mean();
            if (!val_.empty()) row.val_loss = val;
            if (!std::isfinite(val)) {
                result_.curve.push_back(row);
                diverge("non-finite validation loss at step " + std::to_string(step));
                return false;
            }
            if (val < result_.best_val_loss || val_.empty()) {
                result_.best_val_loss = val;
                result_.best = net_;
                result_.optimizer = adam_;
                result_.best_step = step;
            }
        }
        result_.curve.push_back(row);
        return true;
    }

    void diverge(const std::string& why) {
        result_.diverged = true;
        result_.divergence = why;
    }

    TrainResult finish() {
        result_.last = net_;
        if (val_.empty() && result_.best_step == 0) {
            result_.best = net_;
            result_.optimizer = adam_;
        }
        return std::move(result_);
    }

private:
    const TrainConfig& cfg_;
    HuberLoss loss_;
    const Dataset& val_;
    Network net_;
    Vector theta_;
    Vector grad_;
    AdamState adam_;
    TrainResult result_;
};

}  // namespace

TrainResult train(const Network& init, const Dataset& train_data, const Dataset& val_data, const TrainConfig& cfg) {
    check_config(cfg);
    init.validate();
    if (!train_data.empty() && (train_data.input_size() != init.input_size() ||
                                train_data.target_size() != init.output_size())) {
        fail(ErrorKind::Compatibility, "dataset feature/target widths do not match the network");
    }
    Loop loop(init, val_data, cfg);
    if (cfg.steps == 0) return loop.finish();

    std::mt19937_64 rng(cfg.seed);
    const WindowSampler sampler(train_data, cfg.window);

    if (cfg.trainer == Trainer::Rtrl && cfg.cadence == RtrlCadence::PerStep) {
        const auto batch_size = static_cast<std::size_t>(cfg.batch);
        std::vector<RtrlStepper> steppers(batch_size, RtrlStepper(loop.net()));
        StepGradient acc = StepGradient::zeros_like(loop.net());
        StepGradient tmp = StepGradient::zeros_like(loop.net());
        Vector dl(loop.net().output_size());
        WindowBatch batch;
        Index t = cfg.window;
        const double weight = 1.0 / static_cast<double>(batch_size);
        for (long step = 1; step <= cfg.steps; ++step) {
            if (t == cfg.window) {
                batch = sampler.draw_batch(rng, cfg.batch);
                for (auto& s : steppers) s.reset();
                t = 0;
            }
            acc.set_zero();
            double total = 0.0;
            for (std::size_t b = 0; b < batch_size; ++b) {
                const Vector& pred = steppers[b].forward(loop.net(), batch.inputs[b].row(t).transpose());
                total += loop.loss().value_and_gradient(pred, batch.targets[b].row(t).transpose(), dl);
                dl *= weight;
                steppers[b].gradient(loop.net(), dl, tmp);
                acc += tmp;
            }
            ++t;
            if (!loop.apply(step, acc, total * weight)) break;
            for (auto& s : steppers) s.refresh(loop.net());
        }
        return loop.finish();
    }

    const HuberLoss& loss = loop.loss();
    for (long step = 1; step <= cfg.steps; ++step) {
        const WindowBatch batch = sampler.draw_batch(rng, cfg.batch);
        BatchGradient bg;
        try {
            bg = cfg.trainer == Trainer::Bptt ? bptt_gradient(loop.net(), batch, loss, cfg.threads)
                                              : rtrl_window_gradient(loop.net(), batch, loss);
        } catch (const TrainingError& e) {
            loop.diverge(std::string(e.what()) + " at step " + std::to_string(step));
            break;
        }
        if (!loop.apply(step, bg.grads, bg.loss)) break;
    }
    return loop.finish();
}

}  // namespace lru
