#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lru/layer.hpp"

namespace lru {

/// Stack of LRU layers. Layer k maps m_k -> p_k with state width n_k; hidden
/// layers emit n_k features, the top layer's C and D act as the linear readout
/// onto the p targets. No nonlinearity between layers.
struct Network {
    std::vector<LayerParams> layers;

    Index input_size() const { return layers.front().input_size(); }
    Index output_size() const { return layers.back().output_size(); }
    std::vector<Index> widths() const;
    Index depth() const { return static_cast<Index>(layers.size()); }

    /// Throws ErrorKind::Contract when layer k+1 does not consume layer k's output.
    void validate() const;
};

/// Gradient with the same block shapes as a Network.
struct StepGradient {
    std::vector<LayerParams> layers;

    static StepGradient zeros_like(const Network& net);
    StepGradient& operator+=(const StepGradient& other);
    StepGradient& operator*=(double scale);
    void set_zero();
};

struct NetworkInit {
    Index input_size = 1;
    std::vector<Index> widths{16};
    Index output_size = 1;
    double r_min = 0.9;
    double r_max = 0.999;
    double max_phase = 3.14159265358979323846 / 10.0;
    std::uint64_t seed = 0;
};

Network init_network(const NetworkInit& init);

using NetworkState = std::vector<HiddenState>;

NetworkState zero_state(const Network& net);

struct NetworkStepOutput {
    NetworkState states;
    Vector prediction;
};

/// One timestep through the stack: layer k's y feeds layer k+1's u.
NetworkStepOutput network_forward(const Network& net, const NetworkState& states, const Vector& u);

/// Cached dynamics and scratch buffers for stepping a network in a hot loop
/// without heap allocation. Call refresh() after the parameters change.
class NetworkStepper {
public:
    explicit NetworkStepper(const Network& net);

    void refresh(const Network& net);

    /// Advances `states` and returns the prediction (valid until the next call).
    /// layer_inputs()[k] holds the input consumed by layer k in this step.
    const Vector& step(const Network& net, NetworkState& states, const Eigen::Ref<const Vector>& u);

    const std::vector<LayerDynamics>& dynamics() const { return dynamics_; }
    const std::vector<Vector>& layer_inputs() const { return inputs_; }
    const std::vector<Vector>& layer_outputs() const { return outputs_; }

private:
    std::vector<LayerDynamics> dynamics_;
    std::vector<Vector> inputs_;
    std::vector<Vector> outputs_;
};

/// Flat parameter vector in canonical order (layer, block, row-major entries).
Index parameter_count(std::span<const LayerParams> layers);
Vector flatten(std::span<const LayerParams> layers);
void flatten_into(std::span<const LayerParams> layers, Eigen::Ref<Vector> flat);
void unflatten(std::span<LayerParams> layers, const Eigen::Ref<const Vector>& flat);

inline Vector flatten(const Network& net) { return flatten(net.layers); }
inline Vector flatten(const StepGradient& g) { return flatten(g.layers); }

}  // namespace lru
