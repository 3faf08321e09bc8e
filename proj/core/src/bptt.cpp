#include "lru/bptt.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "lru/error.hpp"

namespace lru {

WindowSampler::WindowSampler(const Dataset& data, Index window) : data_(&data), window_(window) {
    if (window < 1) {
        fail(ErrorKind::Config, "window length must be at least 1");
    }
    if (data.sessions.empty()) {
        fail(ErrorKind::Config, "cannot sample windows from an empty dataset");
    }
    cumulative_.reserve(data.sessions.size());
    Index total = 0;
    for (const auto& s : data.sessions) {
        if (s.length() < window) {
            fail(ErrorKind::Config, "window length " + std::to_string(window) + " exceeds session " +
                                        std::to_string(s.id) + " (" + std::to_string(s.length()) + " steps)");
        }
        total += s.length() - window + 1;
        cumulative_.push_back(total);
    }
}

WindowSampler::Location WindowSampler::draw(std::mt19937_64& rng) const {
    std::uniform_int_distribution<Index> pick(0, cumulative_.back() - 1);
    const Index flat = pick(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), flat);
    const auto session = static_cast<std::size_t>(it - cumulative_.begin());
    const Index before = session == 0 ? 0 : cumulative_[session - 1];
    return {session, flat - before};
}

WindowBatch WindowSampler::draw_batch(std::mt19937_64& rng, Index batch) const {
    if (batch < 1) {
        fail(ErrorKind::Config, "batch size must be at least 1");
    }
    WindowBatch out;
    out.window = window_;
    out.inputs.reserve(static_cast<std::size_t>(batch));
    out.targets.reserve(static_cast<std::size_t>(batch));
    for (Index b = 0; b < batch; ++b) {
        const Location loc = draw(rng);
        const SessionData& s = data_->sessions[loc.session];
        out.inputs.emplace_back(s.inputs.middleRows(loc.offset, window_));
        out.targets.emplace_back(s.targets.middleRows(loc.offset, window_));
        out.session_ids.push_back(s.id);
        out.offsets.push_back(loc.offset);
    }
    return out;
}

WindowBatch sample_windows(const Dataset& data, Index window, Index batch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return WindowSampler(data, window).draw_batch(rng, batch);
}

namespace {

struct LayerForward {
    SeqMatrix inputs;
    SequenceOutput out;
};

std::vector<LayerForward> forward_all(const Network& net, const SeqMatrix& inputs) {
    std::vector<LayerForward> fw;
    fw.reserve(net.layers.size());
    const SeqMatrix* u = &inputs;
    for (const auto& layer : net.layers) {
        LayerForward lf;
        lf.inputs = *u;
        lf.out = scan_forward(layer, HiddenState::zeros(layer.state_size()), lf.inputs, ScanOptions{1, false});
        fw.push_back(std::move(lf));
        u = &fw.back().out.y;
    }
    return fw;
}

}  // namespace

double sequence_gradient(const Network& net, const SeqMatrix& inputs, const SeqMatrix& targets,
                         const HuberLoss& loss, double weight, StepGradient& grads) {
    net.validate();
    if (inputs.cols() != net.input_size() || targets.cols() != net.output_size() || inputs.rows() != targets.rows()) {
        fail(ErrorKind::Contract, "window shape does not match the network");
    }
    if (grads.layers.size() != net.layers.size()) {
        fail(ErrorKind::Contract, "gradient accumulator has the wrong depth");
    }
    const Index T = inputs.rows();
    const Index p = net.output_size();

    std::vector<LayerForward> fw = forward_all(net, inputs);

    const SeqMatrix& pred = fw.back().out.y;
    SeqMatrix g(T, p);
    double total = 0.0;
    const double inv_p = 1.0 / static_cast<double>(p);
    for (Index t = 0; t < T; ++t) {
        for (Index k = 0; k < p; ++k) {
            const double r = pred(t, k) - targets(t, k);
            total += huber(r, loss.delta) * inv_p;
            g(t, k) = huber_derivative(r, loss.delta) * inv_p * weight;
        }
    }
    if (!std::isfinite(total)) {
        throw TrainingError("non-finite loss in sequence", -1);
    }

    for (std::size_t kk = net.layers.size(); kk-- > 0;) {
        const LayerParams& params = net.layers[kk];
        const LayerDynamics dyn = LayerDynamics::from(params);
        const SeqMatrix& u = fw[kk].inputs;
        const SeqMatrix& h_re = fw[kk].out.h_re;
        const SeqMatrix& h_im = fw[kk].out.h_im;
        const Index n = params.state_size();
        LayerParams& out = grads.layers[kk];

        // adjoint of h_t: A_t = C^H g_t + conj(lambda) A_{t+1}
        SeqMatrix a_re = g * params.c_re;
        SeqMatrix a_im = -(g * params.c_im);
        for (Index j = 0; j < n; ++j) {
            const double lr = dyn.lambda_re[j];
            const double li = dyn.lambda_im[j];
            double nr = 0.0;
            double ni = 0.0;
            for (Index t = T; t-- > 0;) {
                const double ar = a_re(t, j) + lr * nr + li * ni;
                const double ai = a_im(t, j) + lr * ni - li * nr;
                a_re(t, j) = ar;
                a_im(t, j) = ai;
                nr = ar;
                ni = ai;
            }
        }

        SeqMatrix bu_re = u * params.b_re.transpose();
        SeqMatrix bu_im = u * params.b_im.transpose();
        for (Index j = 0; j < n; ++j) {
            // P = sum_t conj(A_t) h_{t-1}
            double p_re = 0.0;
            double p_im = 0.0;
            double drive = 0.0;
            for (Index t = 0; t < T; ++t) {
                if (t > 0) {
                    const double hr = h_re(t - 1, j);
                    const double hi = h_im(t - 1, j);
                    p_re += a_re(t, j) * hr + a_im(t, j) * hi;
                    p_im += a_re(t, j) * hi - a_im(t, j) * hr;
                }
                drive += a_re(t, j) * bu_re(t, j) + a_im(t, j) * bu_im(t, j);
            }
            const double s_nu = -std::exp(params.nu[j]);
            const double cnu_re = s_nu * dyn.lambda_re[j];
            const double cnu_im = s_nu * dyn.lambda_im[j];
            const double s_ph = std::exp(params.theta_phase[j]);
            const double cph_re = -s_ph * dyn.lambda_im[j];
            const double cph_im = s_ph * dyn.lambda_re[j];
            out.nu[j] += cnu_re * p_re - cnu_im * p_im;
            out.theta_phase[j] += cph_re * p_re - cph_im * p_im;
            out.gamma_log[j] += dyn.gamma[j] * drive;
        }

        SeqMatrix ga_re = a_re.array().rowwise() * dyn.gamma.transpose().array();
        SeqMatrix ga_im = a_im.array().rowwise() * dyn.gamma.transpose().array();
        out.b_re.noalias() += ga_re.transpose() * u;
        out.b_im.noalias() += ga_im.transpose() * u;
        out.c_re.noalias() += g.transpose() * h_re;
        out.c_im.noalias() -= g.transpose() * h_im;
        out.d.noalias() += g.transpose() * u;

        if (kk > 0) {
            SeqMatrix below = g * params.d;
            below.noalias() += ga_re * params.b_re;
            below.noalias() += ga_im * params.b_im;
            g = std::move(below);
        }
    }
    return total;
}

BatchGradient bptt_gradient(const Network& net, const WindowBatch& batch, const HuberLoss& loss, int threads) {
    if (batch.size() == 0) {
        fail(ErrorKind::Contract, "empty window batch");
    }
    const Index T = batch.inputs.front().rows();
    const double weight = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(T));
    const auto blocks = static_cast<std::size_t>(std::clamp<int>(threads, 1, static_cast<int>(batch.size())));

    std::vector<StepGradient> partial(blocks, StepGradient::zeros_like(net));
    std::vector<double> partial_loss(blocks, 0.0);
    std::vector<long> bad(blocks, -1);

    auto work = [&](std::size_t blk) {
        const std::size_t begin = blk * batch.size() / blocks;
        const std::size_t end = (blk + 1) * batch.size() / blocks;
        for (std::size_t b = begin; b < end; ++b) {
            try {
                partial_loss[blk] += sequence_gradient(net, batch.inputs[b], batch.targets[b], loss, weight, partial[blk]);
            } catch (const TrainingError&) {
                bad[blk] = static_cast<long>(b);
                return;
            }
        }
    };
    if (blocks == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t blk = 0; blk < blocks; ++blk) pool.emplace_back(work, blk);
    }

    BatchGradient out{0.0, std::move(partial[0])};
    double total = partial_loss[0];
    for (std::size_t blk = 1; blk < blocks; ++blk) {
        out.grads += partial[blk];
        total += partial_loss[blk];
    }
    for (long idx : bad) {
        if (idx >= 0) {
            throw TrainingError("non-finite loss in window " + std::to_string(idx), idx);
        }
    }
    out.loss = total * weight;
    return out;
}

SeqMatrix predict_sequence(const Network& net, const SeqMatrix& inputs) {
    net.validate();
    if (inputs.cols() != net.input_size()) {
        fail(ErrorKind::Contract, "input width does not match the network");
    }
    SeqMatrix u = inputs;
    for (const auto& layer : net.layers) {
        SequenceOutput o = scan_forward(layer, HiddenState::zeros(layer.state_size()), u);
        u = std::move(o.y);
    }
    return u;
}

LossTotals evaluate_loss(const Network& net, const Dataset& data, const HuberLoss& loss) {
    LossTotals totals;
    for (const auto& s : data.sessions) {
        const SeqMatrix pred = predict_sequence(net, s.inputs);
        for (Index t = 0; t < pred.rows(); ++t) {
            totals.sum += loss.value(pred.row(t).transpose(), s.targets.row(t).transpose());
        }
        totals.steps += pred.rows();
    }
    return totals;
}

}  // namespace lru
