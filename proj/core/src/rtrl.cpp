#include "lru/rtrl.hpp"

#include <cmath>
#include <string>

#include "lru/error.hpp"

namespace lru {

LayerTrace LayerTrace::zeros(Index n, Index m) {
    return {ComplexVector::zeros(n), ComplexVector::zeros(n), ComplexVector::zeros(n),
            Matrix::Zero(n, m),      Matrix::Zero(n, m),      Matrix::Zero(n, m),
            Matrix::Zero(n, m)};
}

std::size_t LayerTrace::bytes() const {
    const auto count = 2 * (nu.size() + phase.size() + gamma.size()) + b_re_re.size() + b_re_im.size() +
                       b_im_re.size() + b_im_im.size();
    return static_cast<std::size_t>(count) * sizeof(double);
}

std::size_t EligibilityTrace::bytes() const {
    std::size_t total = 0;
    for (const auto& layer : layers) total += layer.bytes();
    return total;
}

EligibilityTrace reset_trace(const Network& net) {
    EligibilityTrace out;
    out.layers.reserve(net.layers.size());
    for (const auto& layer : net.layers) out.layers.push_back(LayerTrace::zeros(layer.state_size(), layer.input_size()));
    return out;
}

void trace_step_inplace(const LayerParams& params, const LayerDynamics& dyn, const HiddenState& h_prev,
                        const Eigen::Ref<const Vector>& u, LayerTrace& trace) {
    const Index n = params.state_size();
    const Index m = params.input_size();
    for (Index j = 0; j < n; ++j) {
        const double lr = dyn.lambda_re[j];
        const double li = dyn.lambda_im[j];
        const double g = dyn.gamma[j];
        const double hr = h_prev.re[j];
        const double hi = h_prev.im[j];

        // dlambda/dnu = -exp(nu) lambda
        const double s_nu = -std::exp(params.nu[j]);
        const double dnu_re = s_nu * lr;
        const double dnu_im = s_nu * li;
        // dlambda/dtheta = i exp(theta) lambda
        const double s_ph = std::exp(params.theta_phase[j]);
        const double dph_re = -s_ph * li;
        const double dph_im = s_ph * lr;

        auto advance = [lr, li](double& re, double& im, double add_re, double add_im) {
            const double r = lr * re - li * im + add_re;
            const double i = lr * im + li * re + add_im;
            re = r;
            im = i;
        };

        advance(trace.nu.re[j], trace.nu.im[j], dnu_re * hr - dnu_im * hi, dnu_re * hi + dnu_im * hr);
        advance(trace.phase.re[j], trace.phase.im[j], dph_re * hr - dph_im * hi, dph_re * hi + dph_im * hr);

        const double bu_re = params.b_re.row(j).dot(u);
        const double bu_im = params.b_im.row(j).dot(u);
        advance(trace.gamma.re[j], trace.gamma.im[j], g * bu_re, g * bu_im);

        for (Index i = 0; i < m; ++i) {
            const double gu = g * u[i];
            // dh_j/dB_re(j,i) immediate term: gamma_j u_i
            advance(trace.b_re_re(j, i), trace.b_re_im(j, i), gu, 0.0);
            // dh_j/dB_im(j,i) immediate term: i gamma_j u_i
            advance(trace.b_im_re(j, i), trace.b_im_im(j, i), 0.0, gu);
        }
    }
}

LayerTrace trace_step(const LayerParams& params, const HiddenState& h_prev, const Vector& u,
                      const LayerTrace& trace_prev) {
    params.validate();
    const Index n = params.state_size();
    const Index m = params.input_size();
    const bool ok = h_prev.re.size() == n && h_prev.im.size() == n && u.size() == m &&
                    trace_prev.nu.size() == n && trace_prev.phase.size() == n && trace_prev.gamma.size() == n &&
                    trace_prev.b_re_re.rows() == n && trace_prev.b_re_re.cols() == m &&
                    trace_prev.b_im_re.rows() == n && trace_prev.b_im_re.cols() == m;
    if (!ok) {
        fail(ErrorKind::Contract, "trace, state or input shape does not match layer (n=" + std::to_string(n) +
                                      ", m=" + std::to_string(m) + ")");
    }
    LayerTrace out = trace_prev;
    trace_step_inplace(params, LayerDynamics::from(params), h_prev, u, out);
    return out;
}

namespace {

/// Local gradient of one layer given dL/dy for that layer. When `g_below` is
/// non-null it receives dL/du through the instantaneous map gamma*B and D.
void layer_gradient(const LayerParams& params, const LayerDynamics& dyn, const LayerTrace& trace,
                    const HiddenState& h, const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& g,
                    Vector& delta_re, Vector& delta_im, LayerParams& out, Vector* g_below) {
    // delta = C^H g = dL/dh_re + i dL/dh_im
    delta_re.noalias() = params.c_re.transpose() * g;
    delta_im.noalias() = params.c_im.transpose() * g;
    delta_im = -delta_im;

    const Index n = params.state_size();
    const Index m = params.input_size();
    // Re[conj(delta) * J] = delta_re J_re + delta_im J_im
    for (Index j = 0; j < n; ++j) {
        const double dr = delta_re[j];
        const double di = delta_im[j];
        out.nu[j] = dr * trace.nu.re[j] + di * trace.nu.im[j];
        out.theta_phase[j] = dr * trace.phase.re[j] + di * trace.phase.im[j];
        out.gamma_log[j] = dr * trace.gamma.re[j] + di * trace.gamma.im[j];
        for (Index i = 0; i < m; ++i) {
            out.b_re(j, i) = dr * trace.b_re_re(j, i) + di * trace.b_re_im(j, i);
            out.b_im(j, i) = dr * trace.b_im_re(j, i) + di * trace.b_im_im(j, i);
        }
    }
    // y = C_re h_re - C_im h_im + D u
    out.c_re.noalias() = g * h.re.transpose();
    out.c_im.noalias() = g * h.im.transpose();
    out.c_im = -out.c_im;
    out.d.noalias() = g * u.transpose();

    if (g_below != nullptr) {
        g_below->noalias() = params.d.transpose() * g;
        for (Index j = 0; j < n; ++j) {
            const double wr = dyn.gamma[j] * delta_re[j];
            const double wi = dyn.gamma[j] * delta_im[j];
            g_below->noalias() += wr * params.b_re.row(j).transpose();
            g_below->noalias() += wi * params.b_im.row(j).transpose();
        }
    }
}

}  // namespace

StepGradient online_gradient(const Network& net, const EligibilityTrace& traces, const NetworkState& states,
                             const Vector& u, const Vector& dl_dy) {
    net.validate();
    if (traces.layers.size() != net.layers.size()) {
        fail(ErrorKind::Contract, "eligibility traces missing for " +
                                      std::to_string(net.layers.size() - traces.layers.size()) + " layer(s)");
    }
    if (states.size() != net.layers.size()) {
        fail(ErrorKind::Contract, "one hidden state per layer is required");
    }
    if (dl_dy.size() != net.output_size() || u.size() != net.input_size()) {
        fail(ErrorKind::Contract, "input or loss-gradient width does not match the network");
    }
    const std::size_t depth = net.layers.size();

    // Reconstruct each layer's input from the post-step states.
    std::vector<Vector> inputs(depth);
    inputs[0] = u;
    for (std::size_t k = 0; k + 1 < depth; ++k) {
        const auto& p = net.layers[k];
        inputs[k + 1] = p.c_re * states[k].re - p.c_im * states[k].im + p.d * inputs[k];
    }

    StepGradient out = StepGradient::zeros_like(net);
    Vector g = dl_dy;
    for (std::size_t kk = depth; kk-- > 0;) {
        const auto& params = net.layers[kk];
        const LayerDynamics dyn = LayerDynamics::from(params);
        Vector dre(params.state_size());
        Vector dim(params.state_size());
        Vector below(params.input_size());
        layer_gradient(params, dyn, traces.layers[kk], states[kk], inputs[kk], g, dre, dim, out.layers[kk],
                       kk > 0 ? &below : nullptr);
        if (kk > 0) g = below;
    }
    return out;
}

RtrlStepper::RtrlStepper(const Network& net) : states_(zero_state(net)), traces_(reset_trace(net)) {
    net.validate();
    for (const auto& layer : net.layers) {
        dynamics_.push_back(LayerDynamics::from(layer));
        inputs_.push_back(Vector::Zero(layer.input_size()));
        outputs_.push_back(Vector::Zero(layer.output_size()));
        upstream_.push_back(Vector::Zero(layer.output_size()));
        delta_re_.push_back(Vector::Zero(layer.state_size()));
        delta_im_.push_back(Vector::Zero(layer.state_size()));
    }
}

void RtrlStepper::reset() {
    for (auto& s : states_) {
        s.re.setZero();
        s.im.setZero();
    }
    for (auto& t : traces_.layers) {
        for (Vector* v : {&t.nu.re, &t.nu.im, &t.phase.re, &t.phase.im, &t.gamma.re, &t.gamma.im}) v->setZero();
        for (Matrix* mtx : {&t.b_re_re, &t.b_re_im, &t.b_im_re, &t.b_im_im}) mtx->setZero();
    }
}

void RtrlStepper::refresh(const Network& net) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) refresh_dynamics(net.layers[k], dynamics_[k]);
}

const Vector& RtrlStepper::forward(const Network& net, const Eigen::Ref<const Vector>& u) {
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        if (k == 0) {
            inputs_[0] = u;
        } else {
            inputs_[k] = outputs_[k - 1];
        }
        // trace first: its immediate Jacobian is evaluated at h_{t-1}
        trace_step_inplace(net.layers[k], dynamics_[k], states_[k], inputs_[k], traces_.layers[k]);
        layer_step_inplace(net.layers[k], dynamics_[k], states_[k], inputs_[k], outputs_[k]);
    }
    return outputs_.back();
}

void RtrlStepper::gradient(const Network& net, const Eigen::Ref<const Vector>& dl_dy, StepGradient& out) {
    const std::size_t depth = net.layers.size();
    upstream_[depth - 1] = dl_dy;
    for (std::size_t kk = depth; kk-- > 0;) {
        layer_gradient(net.layers[kk], dynamics_[kk], traces_.layers[kk], states_[kk], inputs_[kk], upstream_[kk],
                       delta_re_[kk], delta_im_[kk], out.layers[kk], kk > 0 ? &upstream_[kk - 1] : nullptr);
    }
}

}  // namespace lru
