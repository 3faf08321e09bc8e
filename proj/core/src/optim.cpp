#include "lru/optim.hpp"

#include <cmath>
#include <string>

#include "lru/error.hpp"

namespace lru {

namespace {

void check_delta(double delta) {
    if (!(delta > 0.0)) {
        fail(ErrorKind::Config, "Huber delta must be positive, got " + std::to_string(delta));
    }
}

}  // namespace

double huber(double residual, double delta) {
    check_delta(delta);
    const double a = std::abs(residual);
    return a <= delta ? 0.5 * residual * residual : delta * (a - 0.5 * delta);
}

double huber_derivative(double residual, double delta) {
    check_delta(delta);
    if (residual > delta) return delta;
    if (residual < -delta) return -delta;
    return residual;
}

HuberLoss::HuberLoss(double delta_) : delta(delta_) { check_delta(delta); }

double HuberLoss::value(const Eigen::Ref<const Vector>& prediction, const Eigen::Ref<const Vector>& target) const {
    double total = 0.0;
    for (Index k = 0; k < prediction.size(); ++k) total += huber(prediction[k] - target[k], delta);
    return total / static_cast<double>(prediction.size());
}

double HuberLoss::value_and_gradient(const Eigen::Ref<const Vector>& prediction, const Eigen::Ref<const Vector>& target,
                                     Eigen::Ref<Vector> out) const {
    const double inv_p = 1.0 / static_cast<double>(prediction.size());
    double total = 0.0;
    for (Index k = 0; k < prediction.size(); ++k) {
        const double r = prediction[k] - target[k];
        total += huber(r, delta);
        out[k] = huber_derivative(r, delta) * inv_p;
    }
    return total * inv_p;
}

double global_norm(const Eigen::Ref<const Vector>& grads) { return grads.norm(); }

double clip_global_norm(Eigen::Ref<Vector> grads, std::optional<double> max_norm) {
    const double norm = grads.norm();
    if (!max_norm) return norm;
    if (!(*max_norm > 0.0)) {
        fail(ErrorKind::Config, "clip norm must be positive");
    }
    if (norm > *max_norm) grads *= *max_norm / norm;
    return norm;
}

AdamState AdamState::fresh(Index size, const AdamConfig& config) {
    return {Vector::Zero(size), Vector::Zero(size), 0, config};
}

void adam_step(Eigen::Ref<Vector> theta, const Eigen::Ref<const Vector>& grads, AdamState& state) {
    if (theta.size() != grads.size() || state.m.size() != theta.size() || state.v.size() != theta.size()) {
        fail(ErrorKind::Contract, "Adam state, parameters and gradients must have the same length");
    }
    if (!grads.allFinite()) {
        throw TrainingError("non-finite gradient passed to Adam", state.t);
    }
    const AdamConfig& c = state.config;
    state.t += 1;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
    for (Index i = 0; i < theta.size(); ++i) {
        const double g = grads[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
}

namespace {

void check_anchor(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor) {
    if (anchor.lambda_reg < 0.0) {
        fail(ErrorKind::Config, "regularization strength must be non-negative");
    }
    if (anchor.theta_pre.size() != theta.size()) {
        fail(ErrorKind::Contract, "anchor snapshot does not match the parameter vector");
    }
}

}  // namespace

double anchor_penalty(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor) {
    check_anchor(theta, anchor);
    const double dist = (theta - anchor.theta_pre).norm();
    return anchor.squared ? 0.5 * anchor.lambda_reg * dist * dist : anchor.lambda_reg * dist;
}

void add_anchor_gradient(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor, Eigen::Ref<Vector> grads) {
    check_anchor(theta, anchor);
    if (anchor.lambda_reg == 0.0) return;
    if (anchor.squared) {
        grads += anchor.lambda_reg * (theta - anchor.theta_pre);
        return;
    }
    double sq = 0.0;
    for (Index i = 0; i < theta.size(); ++i) {
        const double diff = theta[i] - anchor.theta_pre[i];
        sq += diff * diff;
    }
    // subgradient zero at the kink
    if (sq == 0.0) return;
    const double scale = anchor.lambda_reg / std::sqrt(sq);
    for (Index i = 0; i < theta.size(); ++i) grads[i] += scale * (theta[i] - anchor.theta_pre[i]);
}

Vector anchor_gradient(const Eigen::Ref<const Vector>& theta, const AnchorConfig& anchor) {
    Vector out = Vector::Zero(theta.size());
    add_anchor_gradient(theta, anchor, out);
    return out;
}

}  // namespace lru
