#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "lru/bptt.hpp"
#include "lru/error.hpp"
#include "oracles.hpp"

namespace lru {
namespace {

Dataset sessions_of_lengths(std::initializer_list<Index> lengths, Index m = 2, Index p = 1) {
    Dataset d;
    int id = 1;
    std::mt19937_64 rng(1);
    for (Index len : lengths) {
        SessionData s;
        s.id = id++;
        s.inputs = oracle::random_sequence(len, m, rng);
        s.targets = oracle::random_sequence(len, p, rng);
        for (Index t = 0; t < len; ++t) s.timestamps.push_back(static_cast<double>(t));
        d.sessions.push_back(std::move(s));
    }
    for (Index i = 0; i < m; ++i) d.feature_names.push_back("f" + std::to_string(i));
    for (Index k = 0; k < p; ++k) d.target_names.push_back("y" + std::to_string(k));
    return d;
}

TEST(SampleWindows, SingleExactSessionAlwaysReturnsIt) {
    const Dataset d = sessions_of_lengths({32});
    const WindowBatch b = sample_windows(d, 32, 8, 3);
    ASSERT_EQ(b.size(), 8u);
    for (std::size_t i = 0; i < b.size(); ++i) {
        EXPECT_EQ(b.offsets[i], 0);
        EXPECT_EQ(b.inputs[i], d.sessions[0].inputs);
    }
}

TEST(SampleWindows, DeterministicInSeed) {
    const Dataset d = sessions_of_lengths({100, 300});
    const WindowBatch a = sample_windows(d, 20, 16, 42);
    const WindowBatch b = sample_windows(d, 20, 16, 42);
    EXPECT_EQ(a.offsets, b.offsets);
    EXPECT_EQ(a.session_ids, b.session_ids);
}

TEST(SampleWindows, SessionFrequencyProportionalToAvailableWindows) {
    const Dataset d = sessions_of_lengths({1000, 3000}, 1, 1);
    const WindowSampler sampler(d, 200);
    std::mt19937_64 rng(2024);
    long second = 0;
    const long draws = 100000;
    for (long i = 0; i < draws; ++i) second += sampler.draw(rng).session == 1 ? 1 : 0;
    const double expected = (3000.0 - 199.0) / ((1000.0 - 199.0) + (3000.0 - 199.0));
    EXPECT_NEAR(static_cast<double>(second) / draws, expected, 0.02 * expected);
}

TEST(SampleWindows, NeverCrossesSessionBoundary) {
    const Dataset d = sessions_of_lengths({50, 61, 75});
    const WindowBatch b = sample_windows(d, 50, 2000, 9);
    for (std::size_t i = 0; i < b.size(); ++i) {
        const auto& s = d.sessions[static_cast<std::size_t>(b.session_ids[i] - 1)];
        EXPECT_GE(b.offsets[i], 0);
        EXPECT_LE(b.offsets[i] + 50, s.length());
        EXPECT_EQ(b.inputs[i], SeqMatrix(s.inputs.middleRows(b.offsets[i], 50)));
    }
}

TEST(SampleWindows, WindowLongerThanSessionNamesIt) {
    const Dataset d = sessions_of_lengths({100, 40});
    try {
        sample_windows(d, 64, 4, 0);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Config);
        EXPECT_NE(std::string(e.what()).find("session 2"), std::string::npos);
    }
}

TEST(BpttGradient, PerfectPredictionsGiveZero) {
    std::mt19937_64 rng(1);
    const Network net = testing::random_network(3, {6}, 2, 1);
    WindowBatch b;
    b.window = 30;
    for (int i = 0; i < 3; ++i) {
        b.inputs.push_back(oracle::random_sequence(30, 3, rng));
        b.targets.push_back(predict_sequence(net, b.inputs.back()));
    }
    const BatchGradient g = bptt_gradient(net, b, HuberLoss(1.0));
    EXPECT_LT(g.loss, 1e-28);
    EXPECT_LT(flatten(g.grads).norm(), 1e-13);
}

class BpttFiniteDifference : public ::testing::TestWithParam<std::vector<Index>> {};

TEST_P(BpttFiniteDifference, AllBlocksAgree) {
    std::mt19937_64 rng(17);
    const Network net = testing::random_network(3, GetParam(), 2, 17);
    const SeqMatrix u = oracle::random_sequence(50, 3, rng);
    const SeqMatrix y = oracle::random_sequence(50, 2, rng);
    StepGradient g = StepGradient::zeros_like(net);
    sequence_gradient(net, u, y, HuberLoss(1.0), 1.0, g);
    const Vector fd = oracle::central_difference(net, [&](const Network& n) { return oracle::reference_loss(n, u, y); });
    const Vector an = flatten(g);
    Index offset = 0;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        for_each_block(net.layers[k], [&](std::string_view name, const auto& block) {
            EXPECT_LT(oracle::relative_error(an.segment(offset, block.size()), fd.segment(offset, block.size())), 1e-4)
                << "layer " << k << " block " << name;
            offset += block.size();
        });
    }
}

INSTANTIATE_TEST_SUITE_P(Depths, BpttFiniteDifference,
                         ::testing::Values(std::vector<Index>{5}, std::vector<Index>{4, 3}));

TEST(BpttGradient, LossIsMeanOverBatchAndTime) {
    std::mt19937_64 rng(2);
    const Network net = testing::random_network(2, {4}, 2, 2);
    WindowBatch b;
    b.window = 20;
    double ref = 0.0;
    for (int i = 0; i < 4; ++i) {
        b.inputs.push_back(oracle::random_sequence(20, 2, rng));
        b.targets.push_back(oracle::random_sequence(20, 2, rng));
        ref += oracle::reference_loss(net, b.inputs.back(), b.targets.back());
    }
    EXPECT_NEAR(bptt_gradient(net, b, HuberLoss(1.0)).loss, ref / 80.0, 1e-12);
}

TEST(BpttGradient, ThreadedReductionIsDeterministic) {
    std::mt19937_64 rng(3);
    const Network net = testing::random_network(3, {6}, 2, 3);
    WindowBatch b;
    b.window = 25;
    for (int i = 0; i < 10; ++i) {
        b.inputs.push_back(oracle::random_sequence(25, 3, rng));
        b.targets.push_back(oracle::random_sequence(25, 2, rng));
    }
    const BatchGradient serial = bptt_gradient(net, b, HuberLoss(1.0), 1);
    const BatchGradient t3a = bptt_gradient(net, b, HuberLoss(1.0), 3);
    const BatchGradient t3b = bptt_gradient(net, b, HuberLoss(1.0), 3);
    EXPECT_EQ(flatten(t3a.grads), flatten(t3b.grads));
    EXPECT_LT(oracle::relative_error(flatten(t3a.grads), flatten(serial.grads)), 1e-13);
}

TEST(BpttGradient, NonFiniteLossReportsWindow) {
    std::mt19937_64 rng(4);
    const Network net = testing::random_network(2, {3}, 1, 4);
    WindowBatch b;
    b.window = 10;
    for (int i = 0; i < 4; ++i) {
        b.inputs.push_back(oracle::random_sequence(10, 2, rng));
        b.targets.push_back(oracle::random_sequence(10, 1, rng));
    }
    b.targets[2](5, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        bptt_gradient(net, b, HuberLoss(1.0));
        FAIL();
    } catch (const TrainingError& e) {
        EXPECT_EQ(e.batch_index(), 2);
        EXPECT_EQ(e.kind(), ErrorKind::Training);
    }
}

TEST(PredictSequence, MatchesReference) {
    std::mt19937_64 rng(5);
    const Network net = testing::random_network(3, {6, 4}, 2, 5);
    const SeqMatrix u = oracle::random_sequence(300, 3, rng);
    const SeqMatrix pred = predict_sequence(net, u);
    const auto ref = oracle::reference_forward(net, u);
    for (Index t = 0; t < 300; ++t) {
        for (Index k = 0; k < 2; ++k) EXPECT_NEAR(pred(t, k), ref.outputs.back()[t][k], 1e-12);
    }
}

TEST(EvaluateLoss, SumsPerStepLossOverSessions) {
    const Dataset d = sessions_of_lengths({30, 45}, 2, 1);
    const Network net = testing::random_network(2, {4}, 1, 6);
    const LossTotals totals = evaluate_loss(net, d, HuberLoss(1.0));
    const double ref = oracle::reference_loss(net, d.sessions[0].inputs, d.sessions[0].targets) +
                       oracle::reference_loss(net, d.sessions[1].inputs, d.sessions[1].targets);
    EXPECT_EQ(totals.steps, 75);
    EXPECT_NEAR(totals.sum, ref, 1e-11);
    EXPECT_NEAR(totals.mean(), ref / 75.0, 1e-13);
}

}  // namespace
}  // namespace lru
