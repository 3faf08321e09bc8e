#pragma once

#include <cstddef>
#include <vector>

#include "lru/network.hpp"

namespace lru {

/// Total derivative dh_t/dtheta of one layer's complex state.
///
/// Since dh_t/dh_{t-1} = diag(lambda), node j's state only depends on its own
/// recurrent parameters and on row j of B, so one complex scalar per
/// parameter suffices: memory is O(n*m), not O(n^2*m).
struct LayerTrace {
    ComplexVector nu;     // dh_j / dnu_j
    ComplexVector phase;  // dh_j / dtheta_phase_j
    ComplexVector gamma;  // dh_j / dgamma_log_j
    Matrix b_re_re, b_re_im;  // dh_j / dB_re(j,i), real and imaginary parts
    Matrix b_im_re, b_im_im;  // dh_j / dB_im(j,i)

    static LayerTrace zeros(Index n, Index m);
    std::size_t bytes() const;
};

struct EligibilityTrace {
    std::vector<LayerTrace> layers;

    std::size_t bytes() const;
};

/// All-zero traces shaped for `net` (J_0 = 0).
EligibilityTrace reset_trace(const Network& net);

/// J_t = diag(lambda) J_{t-1} + dh_t/dtheta, evaluated at h_prev = h_{t-1}.
LayerTrace trace_step(const LayerParams& params, const HiddenState& h_prev, const Vector& u,
                      const LayerTrace& trace_prev);

void trace_step_inplace(const LayerParams& params, const LayerDynamics& dyn, const HiddenState& h_prev,
                        const Eigen::Ref<const Vector>& u, LayerTrace& trace);

/// Parameter gradient of the current step's loss given dL/dy_hat.
///
/// `states` are the post-update hidden states h_t and `u` the network input at
/// step t. For depth > 1, credit flows to lower layers only through the
/// instantaneous input maps of the layers above; cross-layer temporal
/// dependencies are dropped, so the result is exact for depth 1 only.
StepGradient online_gradient(const Network& net, const EligibilityTrace& traces, const NetworkState& states,
                             const Vector& u, const Vector& dl_dy);

/// Stateful RTRL forward pass: keeps hidden states, traces and scratch space
/// for a network, with no heap allocation per step.
class RtrlStepper {
public:
    explicit RtrlStepper(const Network& net);

    /// Zero hidden states and traces (start of a new sequence).
    void reset();

    /// Recompute cached eigenvalues after the parameters changed.
    void refresh(const Network& net);

    /// Advances traces then states with input u; returns the prediction.
    const Vector& forward(const Network& net, const Eigen::Ref<const Vector>& u);

    /// Writes the online gradient for the most recent forward() into `out`.
    void gradient(const Network& net, const Eigen::Ref<const Vector>& dl_dy, StepGradient& out);

    const NetworkState& states() const { return states_; }
    const EligibilityTrace& traces() const { return traces_; }
    const Vector& prediction() const { return outputs_.back(); }

private:
    std::vector<LayerDynamics> dynamics_;
    std::vector<Vector> inputs_;
    std::vector<Vector> outputs_;
    NetworkState states_;
    EligibilityTrace traces_;
    std::vector<Vector> upstream_;  // dL/dy per layer
    std::vector<Vector> delta_re_, delta_im_;
};

}  // namespace lru
