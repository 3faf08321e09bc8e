#include "lru/network.hpp"

#include <string>

#include "lru/error.hpp"

namespace lru {

std::vector<Index> Network::widths() const {
    std::vector<Index> out;
    out.reserve(layers.size());
    for (const auto& layer : layers) out.push_back(layer.state_size());
    return out;
}

void Network::validate() const {
    if (layers.empty()) {
        fail(ErrorKind::Contract, "network has no layers");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].validate();
        if (k + 1 < layers.size() && layers[k].output_size() != layers[k + 1].input_size()) {
            fail(ErrorKind::Contract, "layer " + std::to_string(k) + " emits " +
                                          std::to_string(layers[k].output_size()) + " features but layer " +
                                          std::to_string(k + 1) + " consumes " +
                                          std::to_string(layers[k + 1].input_size()));
        }
    }
}

StepGradient StepGradient::zeros_like(const Network& net) {
    StepGradient g;
    g.layers.reserve(net.layers.size());
    for (const auto& layer : net.layers) {
        g.layers.push_back(LayerParams::zeros(layer.input_size(), layer.state_size(), layer.output_size()));
    }
    return g;
}

StepGradient& StepGradient::operator+=(const StepGradient& other) {
    if (other.layers.size() != layers.size()) {
        fail(ErrorKind::Contract, "gradient depth mismatch");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].nu += other.layers[k].nu;
        layers[k].theta_phase += other.layers[k].theta_phase;
        layers[k].gamma_log += other.layers[k].gamma_log;
        layers[k].b_re += other.layers[k].b_re;
        layers[k].b_im += other.layers[k].b_im;
        layers[k].c_re += other.layers[k].c_re;
        layers[k].c_im += other.layers[k].c_im;
        layers[k].d += other.layers[k].d;
    }
    return *this;
}

StepGradient& StepGradient::operator*=(double scale) {
    for (auto& layer : layers) {
        for_each_block(layer, [scale](std::string_view, auto& block) { block *= scale; });
    }
    return *this;
}

void StepGradient::set_zero() {
    for (auto& layer : layers) {
        for_each_block(layer, [](std::string_view, auto& block) { block.setZero(); });
    }
}

Network init_network(const NetworkInit& init) {
    if (init.widths.empty()) {
        fail(ErrorKind::Config, "network needs at least one layer width");
    }
    Network net;
    Index in = init.input_size;
    for (std::size_t k = 0; k < init.widths.size(); ++k) {
        const bool top = k + 1 == init.widths.size();
        LayerInit li;
        li.input_size = in;
        li.state_size = init.widths[k];
        li.output_size = top ? init.output_size : init.widths[k];
        li.r_min = init.r_min;
        li.r_max = init.r_max;
        li.max_phase = init.max_phase;
        // distinct, reproducible stream per layer
        li.seed = init.seed * 0x9E3779B97F4A7C15ULL + k + 1;
        net.layers.push_back(init_layer(li));
        in = li.output_size;
    }
    return net;
}

NetworkState zero_state(const Network& net) {
    NetworkState states;
    states.reserve(net.layers.size());
    for (const auto& layer : net.layers) states.push_back(HiddenState::zeros(layer.state_size()));
    return states;
}

NetworkStepOutput network_forward(const Network& net, const NetworkState& states, const Vector& u) {
    net.validate();
    if (states.size() != net.layers.size()) {
        fail(ErrorKind::Contract, "expected " + std::to_string(net.layers.size()) + " layer states, got " +
                                      std::to_string(states.size()));
    }
    NetworkStepOutput out{states, u};
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        StepOutput step = layer_step(net.layers[k], states[k], out.prediction);
        out.states[k] = std::move(step.h);
        out.prediction = std::move(step.y);
    }
    return out;
}

NetworkStepper::NetworkStepper(const Network& net) {
    net.validate();
    for (const auto& layer : net.layers) {
        inputs_.push_back(Vector::Zero(layer.input_size()));
        outputs_.push_back(Vector::Zero(layer.output_size()));
    }
    refresh(net);
}

void NetworkStepper::refresh(const Network& net) {
    dynamics_.resize(net.layers.size());
    for (std::size_t k = 0; k < net.layers.size(); ++k) refresh_dynamics(net.layers[k], dynamics_[k]);
}

const Vector& NetworkStepper::step(const Network& net, NetworkState& states, const Eigen::Ref<const Vector>& u) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        if (k == 0) {
            inputs_[0] = u;
        } else {
            inputs_[k] = outputs_[k - 1];
        }
        layer_step_inplace(net.layers[k], dynamics_[k], states[k], inputs_[k], outputs_[k]);
    }
    return outputs_.back();
}

Index parameter_count(std::span<const LayerParams> layers) {
    Index total = 0;
    for (const auto& layer : layers) total += parameter_count(layer);
    return total;
}

Vector flatten(std::span<const LayerParams> layers) {
    Vector flat(parameter_count(layers));
    flatten_into(layers, flat);
    return flat;
}

void flatten_into(std::span<const LayerParams> layers, Eigen::Ref<Vector> flat) {
    require(flat.size() == parameter_count(layers), ErrorKind::Contract, "flat buffer has the wrong size");
    Index pos = 0;
    for (const auto& layer : layers) {
        for_each_block(layer, [&](std::string_view, const auto& block) {
            for (Index r = 0; r < block.rows(); ++r) {
                for (Index c = 0; c < block.cols(); ++c) flat[pos++] = block(r, c);
            }
        });
    }
}

void unflatten(std::span<LayerParams> layers, const Eigen::Ref<const Vector>& flat) {
    Index needed = 0;
    for (const auto& layer : layers) needed += parameter_count(layer);
    if (flat.size() != needed) {
        fail(ErrorKind::Contract, "flat parameter vector has " + std::to_string(flat.size()) +
                                      " entries, expected " + std::to_string(needed));
    }
    Index pos = 0;
    for (auto& layer : layers) {
        for_each_block(layer, [&](std::string_view, auto& block) {
            for (Index r = 0; r < block.rows(); ++r) {
                for (Index c = 0; c < block.cols(); ++c) block(r, c) = flat[pos++];
            }
        });
    }
}

}  // namespace lru
