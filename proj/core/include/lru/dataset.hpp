#pragma once

#include <string>
#include <vector>

#include "lru/layer.hpp"

namespace lru {

/// One preprocessed recording session: model-ready inputs and targets on a
/// regular time grid.
struct SessionData {
    int id = 0;
    std::vector<double> timestamps;
    SeqMatrix inputs;   // T x m
    SeqMatrix targets;  // T x p

    Index length() const { return inputs.rows(); }
};

struct Dataset {
    std::vector<SessionData> sessions;
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;

    Index input_size() const { return static_cast<Index>(feature_names.size()); }
    Index target_size() const { return static_cast<Index>(target_names.size()); }
    Index total_steps() const;
    bool empty() const { return sessions.empty(); }
};

}  // namespace lru
