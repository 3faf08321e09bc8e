#pragma once

#include <random>
#include <vector>

#include "lru/network.hpp"

namespace lru::testing {

/// Ring-initialized network with a non-zero passthrough D so every block
/// carries signal in gradient checks.
inline Network random_network(Index m, std::vector<Index> widths, Index p, std::uint64_t seed,
                              double r_min = 0.5, double r_max = 0.95) {
    NetworkInit init;
    init.input_size = m;
    init.widths = std::move(widths);
    init.output_size = p;
    init.r_min = r_min;
    init.r_max = r_max;
    init.max_phase = 3.14159265358979323846;
    init.seed = seed;
    Network net = init_network(init);
    std::mt19937_64 rng(seed ^ 0xD1B54A32D192ED03ULL);
    std::normal_distribution<double> nd(0.0, 0.3);
    for (auto& layer : net.layers) {
        for (Index r = 0; r < layer.d.rows(); ++r) {
            for (Index c = 0; c < layer.d.cols(); ++c) layer.d(r, c) = nd(rng);
        }
    }
    return net;
}

}  // namespace lru::testing
