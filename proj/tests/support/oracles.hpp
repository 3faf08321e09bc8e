#pragma once

// Reference implementations used only by tests. They deliberately share no
// code with the library's forward/backward paths: plain std::complex
// arithmetic, naive loops, and numerical differentiation.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "lru/network.hpp"

namespace lru::oracle {

using cd = std::complex<double>;

inline std::vector<cd> eigenvalues(const LayerParams& p) {
    std::vector<cd> out;
    for (Index j = 0; j < p.state_size(); ++j) {
        out.push_back(std::polar(std::exp(-std::exp(p.nu[j])), std::exp(p.theta_phase[j])));
    }
    return out;
}

struct ReferenceTrace {
    // states[k][t][j], outputs[k][t][i]
    std::vector<std::vector<std::vector<cd>>> states;
    std::vector<std::vector<std::vector<double>>> outputs;
};

/// Sequential stacked evaluation from zero state.
inline ReferenceTrace reference_forward(const Network& net, const SeqMatrix& inputs) {
    ReferenceTrace tr;
    const Index T = inputs.rows();
    std::vector<std::vector<double>> u(static_cast<std::size_t>(T));
    for (Index t = 0; t < T; ++t) {
        for (Index i = 0; i < inputs.cols(); ++i) u[t].push_back(inputs(t, i));
    }
    for (const auto& p : net.layers) {
        const auto lam = eigenvalues(p);
        std::vector<cd> h(static_cast<std::size_t>(p.state_size()), cd{0.0, 0.0});
        std::vector<std::vector<cd>> hs;
        std::vector<std::vector<double>> ys;
        for (Index t = 0; t < T; ++t) {
            for (Index j = 0; j < p.state_size(); ++j) {
                cd bu{0.0, 0.0};
                for (Index i = 0; i < p.input_size(); ++i) bu += cd{p.b_re(j, i), p.b_im(j, i)} * u[t][i];
                h[j] = lam[j] * h[j] + std::exp(p.gamma_log[j]) * bu;
            }
            std::vector<double> y(static_cast<std::size_t>(p.output_size()), 0.0);
            for (Index k = 0; k < p.output_size(); ++k) {
                cd acc{0.0, 0.0};
                for (Index j = 0; j < p.state_size(); ++j) acc += cd{p.c_re(k, j), p.c_im(k, j)} * h[j];
                double yk = acc.real();
                for (Index i = 0; i < p.input_size(); ++i) yk += p.d(k, i) * u[t][i];
                y[k] = yk;
            }
            hs.push_back(h);
            ys.push_back(y);
        }
        tr.states.push_back(hs);
        tr.outputs.push_back(ys);
        u = ys;
    }
    return tr;
}

inline double ref_huber(double r, double delta) {
    const double a = std::abs(r);
    return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

/// sum_t mean_k huber(y_hat - y).
inline double reference_loss(const Network& net, const SeqMatrix& inputs, const SeqMatrix& targets,
                             double delta = 1.0) {
    const auto tr = reference_forward(net, inputs);
    const auto& y = tr.outputs.back();
    double total = 0.0;
    for (Index t = 0; t < inputs.rows(); ++t) {
        double step = 0.0;
        for (Index k = 0; k < targets.cols(); ++k) step += ref_huber(y[t][k] - targets(t, k), delta);
        total += step / static_cast<double>(targets.cols());
    }
    return total;
}

/// Central differences of a scalar function of the flat parameter vector.
inline Vector central_difference(const Network& net, const std::function<double(const Network&)>& f,
                                 double eps = 1e-5) {
    Vector theta = flatten(net);
    Vector grad(theta.size());
    Network probe = net;
    for (Index i = 0; i < theta.size(); ++i) {
        Vector tp = theta;
        tp[i] += eps;
        unflatten(probe.layers, tp);
        const double fp = f(probe);
        tp[i] -= 2.0 * eps;
        unflatten(probe.layers, tp);
        const double fm = f(probe);
        grad[i] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

/// h_T = sum_k lambda^(T-k) gamma (B u_k), evaluated term by term.
inline std::vector<cd> convolution_state(const LayerParams& p, const SeqMatrix& inputs) {
    const auto lam = eigenvalues(p);
    const Index T = inputs.rows();
    std::vector<cd> h(static_cast<std::size_t>(p.state_size()), cd{0.0, 0.0});
    for (Index j = 0; j < p.state_size(); ++j) {
        for (Index k = 0; k < T; ++k) {
            cd bu{0.0, 0.0};
            for (Index i = 0; i < p.input_size(); ++i) bu += cd{p.b_re(j, i), p.b_im(j, i)} * inputs(k, i);
            h[j] += std::pow(lam[j], static_cast<double>(T - 1 - k)) * std::exp(p.gamma_log[j]) * bu;
        }
    }
    return h;
}

inline SeqMatrix random_sequence(Index T, Index width, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> nd(0.0, scale);
    SeqMatrix out(T, width);
    for (Index t = 0; t < T; ++t) {
        for (Index i = 0; i < width; ++i) out(t, i) = nd(rng);
    }
    return out;
}

/// ||a - b|| / max(||b||, floor)
inline double relative_error(const Vector& a, const Vector& b, double floor = 1e-12) {
    return (a - b).norm() / std::max(b.norm(), floor);
}

}  // namespace lru::oracle
