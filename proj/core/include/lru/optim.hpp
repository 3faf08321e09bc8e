#pragma once

#include <optional>

#include "lru/layer.hpp"

namespace lru {

/// 0.5 r^2 for |r| <= delta, delta (|r| - 0.5 delta) beyond.
double huber(double residual, double delta);
/// d huber / d residual.
double huber_derivative(double residual, double delta);

/// Per-step Huber loss averaged over the target dimensions.
struct HuberLoss {
    double delta = 1.0;

    explicit HuberLoss(double delta_ = 1.0);

    double value(const Eigen::Ref<const Vector>& prediction, const Eigen::Ref<const Vector>& target) const;
    /// Writes dL/dprediction into `out` and returns the loss value.
    double value_and_gradient(const Eigen::Ref<const Vector>& prediction, const Eigen::Ref<const Vector>& target,
                              Eigen::Ref<Vector> out) const;
};

double global_norm(const Eigen::Ref<const Vector>& grads);

/// Scales `grads` by max_norm/g when the global L2 norm g exceeds max_norm.
/// Returns the pre-clip norm. std::nullopt disables clipping.
double clip_global_norm(Eigen::Ref<Vector> grads, std::optional<double> max_norm);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    Vector m;
    Vector v;
    long t = 0;
    AdamConfig config;

    static AdamState fresh(Index size, const AdamConfig& config);
};

/// Bias-corrected Adam update of `theta` in place. Throws TrainingError on
/// non-finite gradients.
void adam_step(Eigen::Ref<Vector> theta, const Eigen::Ref<const Vector>& grads, AdamState& state);

/// Fine-tuning anchor R = lambda_reg * ||theta_pre - theta||_2.
struct AnchorConfig {
    Vector theta_pre;
    double lambda_reg = 0.0;
    /// Non-default: 0.5 * lambda_reg * ||theta - theta_pre||^2 instead.
    bool squared = false;
};

double anchor_penalty(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor);

/// lambda_reg (theta - theta_pre) / ||theta - theta_pre||, zero at theta_pre.
Vector anchor_gradient(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor);

/// Adds the anchor gradient into `grads` without allocating.
void add_anchor_gradient(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor, Eigen::Ref<Vector> grads);

}  // namespace lru
