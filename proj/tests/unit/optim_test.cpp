#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "lru/error.hpp"
#include "lru/optim.hpp"

namespace lru {
namespace {

TEST(Huber, QuadraticInsideLinearOutside) {
    EXPECT_DOUBLE_EQ(huber(0.5, 1.0), 0.125);
    EXPECT_DOUBLE_EQ(huber(-0.5, 1.0), 0.125);
    EXPECT_DOUBLE_EQ(huber(3.0, 1.0), 2.5);
    EXPECT_DOUBLE_EQ(huber(-3.0, 1.0), 2.5);
    EXPECT_DOUBLE_EQ(huber(0.0, 1.0), 0.0);
    EXPECT_DOUBLE_EQ(huber(4.0, 2.0), 6.0);
}

TEST(Huber, ContinuouslyDifferentiableAtThreshold) {
    for (double delta : {0.1, 1.0, 2.5}) {
        for (double sign : {-1.0, 1.0}) {
            const double r = sign * delta;
            const double h = 1e-9;
            EXPECT_NEAR(huber(r - h, delta), huber(r + h, delta), 1e-8);
            EXPECT_NEAR(huber_derivative(r - h, delta), huber_derivative(r + h, delta), 1e-8);
            EXPECT_DOUBLE_EQ(huber_derivative(r, delta), sign * delta);
        }
    }
}

TEST(Huber, DerivativeMatchesCentralDifference) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> ud(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double r = ud(rng);
        const double fd = (huber(r + 1e-6, 1.3) - huber(r - 1e-6, 1.3)) / 2e-6;
        EXPECT_NEAR(huber_derivative(r, 1.3), fd, 1e-6);
    }
}

TEST(Huber, NonPositiveDeltaIsConfigError) {
    EXPECT_THROW(huber(1.0, 0.0), Error);
    EXPECT_THROW(HuberLoss(-1.0), Error);
}

TEST(HuberLoss, AveragesOverTargets) {
    const HuberLoss loss(1.0);
    Vector pred(3), target(3), grad(3);
    pred << 0.5, 3.0, 0.0;
    target << 0.0, 0.0, 0.0;
    EXPECT_DOUBLE_EQ(loss.value(pred, target), (0.125 + 2.5 + 0.0) / 3.0);
    EXPECT_DOUBLE_EQ(loss.value_and_gradient(pred, target, grad), (0.125 + 2.5) / 3.0);
    EXPECT_DOUBLE_EQ(grad[0], 0.5 / 3.0);
    EXPECT_DOUBLE_EQ(grad[1], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(grad[2], 0.0);
}

TEST(ClipGlobalNorm, ScalesDownToLimit) {
    Vector g(2);
    g << 3.0, 4.0;
    EXPECT_DOUBLE_EQ(clip_global_norm(g, 0.5), 5.0);
    EXPECT_NEAR(g[0], 0.3, 1e-15);
    EXPECT_NEAR(g[1], 0.4, 1e-15);
}

TEST(ClipGlobalNorm, IdempotentAndNoOpBelowLimit) {
    Vector g(2);
    g << 3.0, 4.0;
    clip_global_norm(g, 0.5);
    const Vector once = g;
    clip_global_norm(g, 0.5);
    EXPECT_NEAR((g - once).norm(), 0.0, 1e-15);

    Vector small(2);
    small << 0.1, 0.2;
    const Vector copy = small;
    clip_global_norm(small, 0.5);
    EXPECT_EQ(small, copy);
    clip_global_norm(g, std::nullopt);
    EXPECT_NEAR(global_norm(g), 0.5, 1e-15);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Vector theta(2);
    theta << 1.0, -2.0;
    Vector g(2);
    g << 0.3, -7.0;
    AdamState st = AdamState::fresh(2, {0.1});
    adam_step(theta, g, st);
    // bias-corrected moments equal g and g^2 after one step
    EXPECT_NEAR(theta[0], 1.0 - 0.1 * 0.3 / (0.3 + 1e-8), 1e-15);
    EXPECT_NEAR(theta[1], -2.0 + 0.1 * 7.0 / (7.0 + 1e-8), 1e-15);
    EXPECT_EQ(st.t, 1);
}

TEST(Adam, MatchesHandRolledRecurrence) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    Vector theta = Vector::Zero(4);
    Vector ref = theta;
    Vector m = Vector::Zero(4), v = Vector::Zero(4);
    AdamState st = AdamState::fresh(4, {0.01});
    for (int t = 1; t <= 50; ++t) {
        Vector g(4);
        for (Index i = 0; i < 4; ++i) g[i] = nd(rng);
        adam_step(theta, g, st);
        for (Index i = 0; i < 4; ++i) {
            m[i] = 0.9 * m[i] + 0.1 * g[i];
            v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
            const double mh = m[i] / (1.0 - std::pow(0.9, t));
            const double vh = v[i] / (1.0 - std::pow(0.999, t));
            ref[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
        }
    }
    EXPECT_LT((theta - ref).norm(), 1e-12);
}

TEST(Adam, MinimisesQuadratic) {
    Vector theta(1);
    theta << 1.0;
    AdamState st = AdamState::fresh(1, {0.1});
    for (int i = 0; i < 100; ++i) {
        Vector g = 2.0 * theta;
        adam_step(theta, g, st);
    }
    EXPECT_LT(std::abs(theta[0]), 0.1);
}

TEST(Adam, NonFiniteGradientIsTrainingError) {
    Vector theta = Vector::Zero(2);
    Vector g(2);
    g << 1.0, std::numeric_limits<double>::infinity();
    AdamState st = AdamState::fresh(2, {});
    EXPECT_THROW(adam_step(theta, g, st), TrainingError);
    EXPECT_TRUE(theta.isZero(0.0));
}

TEST(Anchor, PenaltyAndGradient) {
    AnchorConfig a;
    a.theta_pre = Vector::Zero(2);
    a.lambda_reg = 0.5;
    Vector theta(2);
    theta << 3.0, 4.0;
    EXPECT_DOUBLE_EQ(anchor_penalty(theta, a), 2.5);
    const Vector g = anchor_gradient(theta, a);
    EXPECT_NEAR(g[0], 0.5 * 0.6, 1e-15);
    EXPECT_NEAR(g[1], 0.5 * 0.8, 1e-15);
    EXPECT_NEAR(g.norm(), a.lambda_reg, 1e-15);
}

TEST(Anchor, ZeroAtPretrainedPoint) {
    AnchorConfig a;
    a.theta_pre = Vector::Constant(3, 1.5);
    a.lambda_reg = 2.0;
    EXPECT_EQ(anchor_penalty(a.theta_pre, a), 0.0);
    EXPECT_TRUE(anchor_gradient(a.theta_pre, a).isZero(0.0));
}

TEST(Anchor, SquaredVariant) {
    AnchorConfig a;
    a.theta_pre = Vector::Zero(2);
    a.lambda_reg = 0.5;
    a.squared = true;
    Vector theta(2);
    theta << 3.0, 4.0;
    EXPECT_DOUBLE_EQ(anchor_penalty(theta, a), 0.5 * 0.5 * 25.0);
    const Vector g = anchor_gradient(theta, a);
    EXPECT_DOUBLE_EQ(g[0], 1.5);
    EXPECT_DOUBLE_EQ(g[1], 2.0);
}

TEST(Anchor, GradientMatchesCentralDifferenceAwayFromKink) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd;
    AnchorConfig a;
    a.theta_pre = Vector(5);
    Vector theta(5);
    for (Index i = 0; i < 5; ++i) {
        a.theta_pre[i] = nd(rng);
        theta[i] = nd(rng);
    }
    a.lambda_reg = 0.7;
    Vector g = Vector::Zero(5);
    add_anchor_gradient(theta, a, g);
    for (Index i = 0; i < 5; ++i) {
        Vector tp = theta, tm = theta;
        tp[i] += 1e-6;
        tm[i] -= 1e-6;
        EXPECT_NEAR(g[i], (anchor_penalty(tp, a) - anchor_penalty(tm, a)) / 2e-6, 1e-7);
    }
}

TEST(Anchor, NegativeStrengthIsConfigError) {
    AnchorConfig a;
    a.theta_pre = Vector::Zero(1);
    a.lambda_reg = -0.1;
    EXPECT_THROW(anchor_penalty(Vector::Zero(1), a), Error);
}

}  // namespace
}  // namespace lru
