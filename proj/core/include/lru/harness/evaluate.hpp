#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lru/dataset.hpp"
#include "lru/network.hpp"

namespace lru::harness {

struct Evaluation {
    long steps = 0;
    double huber_total = 0.0;
    double huber_mean = 0.0;
    std::vector<double> mse;  // per target, standardized units
};

using PredictionSink =
    std::function<void(long step, const SessionData& session, Index t, const Vector& prediction)>;

/// Frozen full-sequence prediction of every session from zero state.
Evaluation evaluate(const Network& net, const Dataset& data, double huber_delta = 1.0,
                    const PredictionSink& sink = {});

}  // namespace lru::harness
