#include "lru/layer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lru/error.hpp"

namespace lru {

void LayerParams::validate() const {
    const Index n = state_size();
    const Index m = input_size();
    const Index p = output_size();
    const bool ok = theta_phase.size() == n && gamma_log.size() == n && b_re.rows() == n &&
                    b_im.rows() == n && b_im.cols() == m && c_re.cols() == n && c_im.rows() == p &&
                    c_im.cols() == n && d.rows() == p && d.cols() == m;
    if (!ok) {
        fail(ErrorKind::Contract, "inconsistent LRU layer dimensions (m=" + std::to_string(m) +
                                      ", n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
    }
}

LayerParams LayerParams::zeros(Index m, Index n, Index p) {
    LayerParams out;
    out.nu = Vector::Zero(n);
    out.theta_phase = Vector::Zero(n);
    out.gamma_log = Vector::Zero(n);
    out.b_re = Matrix::Zero(n, m);
    out.b_im = Matrix::Zero(n, m);
    out.c_re = Matrix::Zero(p, n);
    out.c_im = Matrix::Zero(p, n);
    out.d = Matrix::Zero(p, m);
    return out;
}

Index parameter_count(const LayerParams& p) {
    Index total = 0;
    for_each_block(p, [&](std::string_view, const auto& block) { total += block.size(); });
    return total;
}

namespace {

inline double magnitude(double nu) { return std::min(std::exp(-std::exp(nu)), kMaxMagnitude); }

}  // namespace

ComplexVector derive_lambda(const LayerParams& params) {
    const Index n = params.state_size();
    ComplexVector out = ComplexVector::zeros(n);
    for (Index j = 0; j < n; ++j) {
        const double r = magnitude(params.nu[j]);
        const double phase = std::exp(params.theta_phase[j]);
        out.re[j] = r * std::cos(phase);
        out.im[j] = r * std::sin(phase);
    }
    return out;
}

LayerDynamics LayerDynamics::from(const LayerParams& params) {
    LayerDynamics dyn;
    refresh_dynamics(params, dyn);
    return dyn;
}

void refresh_dynamics(const LayerParams& params, LayerDynamics& dyn) {
    const Index n = params.state_size();
    dyn.lambda_re.resize(n);
    dyn.lambda_im.resize(n);
    dyn.gamma.resize(n);
    for (Index j = 0; j < n; ++j) {
        const double r = magnitude(params.nu[j]);
        const double phase = std::exp(params.theta_phase[j]);
        dyn.lambda_re[j] = r * std::cos(phase);
        dyn.lambda_im[j] = r * std::sin(phase);
        dyn.gamma[j] = std::exp(params.gamma_log[j]);
    }
}

LayerParams init_layer(const LayerInit& init) {
    if (!(init.r_min > 0.0 && init.r_min <= init.r_max && init.r_max < 1.0)) {
        fail(ErrorKind::Config, "eigenvalue ring must satisfy 0 < r_min <= r_max < 1 (got [" +
                                    std::to_string(init.r_min) + ", " + std::to_string(init.r_max) +
                                    "])");
    }
    if (init.input_size < 1 || init.state_size < 1 || init.output_size < 1) {
        fail(ErrorKind::Config, "layer dimensions must be positive");
    }
    if (!(init.max_phase > 0.0)) {
        fail(ErrorKind::Config, "max_phase must be positive");
    }
    const Index m = init.input_size;
    const Index n = init.state_size;
    const Index p = init.output_size;

    std::mt19937_64 rng(init.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    LayerParams out = LayerParams::zeros(m, n, p);
    const double r2_lo = init.r_min * init.r_min;
    const double r2_hi = init.r_max * init.r_max;
    for (Index j = 0; j < n; ++j) {
        const double r2 = unit(rng) * (r2_hi - r2_lo) + r2_lo;
        // |lambda| = exp(-exp(nu))  =>  nu = log(-log|lambda|) = log(-0.5 log|lambda|^2)
        out.nu[j] = std::log(-0.5 * std::log(r2));
        // (0, max_phase] so that the log is finite
        const double phase = init.max_phase * (1.0 - unit(rng));
        out.theta_phase[j] = std::log(phase);
        out.gamma_log[j] = 0.5 * std::log(1.0 - r2);
    }
    const double b_scale = 1.0 / std::sqrt(static_cast<double>(m));
    const double c_scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < m; ++i) {
            out.b_re(j, i) = normal(rng) * b_scale;
            out.b_im(j, i) = normal(rng) * b_scale;
        }
    }
    for (Index k = 0; k < p; ++k) {
        for (Index j = 0; j < n; ++j) {
            out.c_re(k, j) = normal(rng) * c_scale;
            out.c_im(k, j) = normal(rng) * c_scale;
        }
    }
    return out;
}

LayerParams init_layer(Index m, Index n, Index p, double r_min, double r_max, std::uint64_t seed) {
    LayerInit init;
    init.input_size = m;
    init.state_size = n;
    init.output_size = p;
    init.r_min = r_min;
    init.r_max = r_max;
    init.seed = seed;
    return init_layer(init);
}

void layer_step_inplace(const LayerParams& params, const LayerDynamics& dyn, HiddenState& h,
                        const Eigen::Ref<const Vector>& u, Eigen::Ref<Vector> y) {
    const Index n = params.state_size();
    for (Index j = 0; j < n; ++j) {
        const double bu_re = params.b_re.row(j).dot(u);
        const double bu_im = params.b_im.row(j).dot(u);
        const double lr = dyn.lambda_re[j];
        const double li = dyn.lambda_im[j];
        const double hr = h.re[j];
        const double hi = h.im[j];
        h.re[j] = lr * hr - li * hi + dyn.gamma[j] * bu_re;
        h.im[j] = lr * hi + li * hr + dyn.gamma[j] * bu_im;
    }
    y.noalias() = params.c_re * h.re;
    y.noalias() -= params.c_im * h.im;
    y.noalias() += params.d * u;
}

StepOutput layer_step(const LayerParams& params, const HiddenState& h_prev, const Vector& u) {
    params.validate();
    if (h_prev.re.size() != params.state_size() || h_prev.im.size() != params.state_size()) {
        fail(ErrorKind::Contract, "hidden state has " + std::to_string(h_prev.re.size()) +
                                      " entries, layer expects " + std::to_string(params.state_size()));
    }
    if (u.size() != params.input_size()) {
        fail(ErrorKind::Contract, "input has " + std::to_string(u.size()) + " entries, layer expects " +
                                      std::to_string(params.input_size()));
    }
    const LayerDynamics dyn = LayerDynamics::from(params);
    StepOutput out{h_prev, Vector::Zero(params.output_size())};
    layer_step_inplace(params, dyn, out.h, u, out.y);
    return out;
}

namespace {

/// Element of the linear-recurrence scan for one node: x -> a x + b.
struct ScanElement {
    double a_re, a_im;
    double b_re, b_im;
};

/// (second o first): apply `first`, then `second`.
inline ScanElement compose(const ScanElement& second, const ScanElement& first) {
    return {
        first.a_re * second.a_re - first.a_im * second.a_im,
        first.a_re * second.a_im + first.a_im * second.a_re,
        second.a_re * first.b_re - second.a_im * first.b_im + second.b_re,
        second.a_re * first.b_im + second.a_im * first.b_re + second.b_im,
    };
}

struct Chunk {
    Index begin;
    Index end;
};

template <class Fn>
void run_chunks(const std::vector<Chunk>& chunks, bool parallel, Fn&& fn) {
    if (!parallel || chunks.size() < 2) {
        for (std::size_t c = 0; c < chunks.size(); ++c) fn(c);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(chunks.size());
    for (std::size_t c = 0; c < chunks.size(); ++c) {
        workers.emplace_back([&fn, c] { fn(c); });
    }
}

}  // namespace

SequenceOutput scan_forward(const LayerParams& params, const HiddenState& h0, const SeqMatrix& u_seq,
                            const ScanOptions& options) {
    params.validate();
    const Index T = u_seq.rows();
    const Index n = params.state_size();
    const Index m = params.input_size();
    const Index p = params.output_size();
    if (T < 1) {
        fail(ErrorKind::Contract, "scan_forward requires a non-empty sequence");
    }
    if (u_seq.cols() != m) {
        fail(ErrorKind::Contract, "sequence has " + std::to_string(u_seq.cols()) +
                                      " input columns, layer expects " + std::to_string(m));
    }
    if (h0.re.size() != n || h0.im.size() != n) {
        fail(ErrorKind::Contract, "initial state has wrong width");
    }
    const LayerDynamics dyn = LayerDynamics::from(params);

    SequenceOutput out{SeqMatrix(T, n), SeqMatrix(T, n), SeqMatrix(T, p)};

    // Element t is (lambda, gamma * B u_t); the drive term is shared by all
    // chunk phases so compute it once.
    SeqMatrix drive_re = (u_seq * params.b_re.transpose()).array().rowwise() * dyn.gamma.transpose().array();
    SeqMatrix drive_im = (u_seq * params.b_im.transpose()).array().rowwise() * dyn.gamma.transpose().array();

    const Index chunk_count = std::clamp<Index>(options.chunks, 1, T);
    std::vector<Chunk> chunks;
    chunks.reserve(static_cast<std::size_t>(chunk_count));
    for (Index c = 0; c < chunk_count; ++c) {
        chunks.push_back({c * T / chunk_count, (c + 1) * T / chunk_count});
    }
    const bool parallel = options.parallel && T >= 4096;

    // Phase 1: inclusive scan inside each chunk from a zero carry. The
    // running aggregate of every node is stored so chunk totals are known.
    std::vector<std::vector<ScanElement>> totals(chunks.size(), std::vector<ScanElement>(static_cast<std::size_t>(n)));
    run_chunks(chunks, parallel, [&](std::size_t c) {
        const Chunk ch = chunks[c];
        for (Index j = 0; j < n; ++j) {
            ScanElement acc{1.0, 0.0, 0.0, 0.0};
            for (Index t = ch.begin; t < ch.end; ++t) {
                const ScanElement e{dyn.lambda_re[j], dyn.lambda_im[j], drive_re(t, j), drive_im(t, j)};
                acc = compose(e, acc);
                out.h_re(t, j) = acc.b_re;
                out.h_im(t, j) = acc.b_im;
            }
            totals[c][static_cast<std::size_t>(j)] = acc;
        }
    });

    // Phase 2: exclusive scan of chunk totals seeded with h0.
    std::vector<std::vector<ScanElement>> carries(chunks.size(), std::vector<ScanElement>(static_cast<std::size_t>(n)));
    for (Index j = 0; j < n; ++j) {
        ScanElement carry{0.0, 0.0, h0.re[j], h0.im[j]};
        for (std::size_t c = 0; c < chunks.size(); ++c) {
            carries[c][static_cast<std::size_t>(j)] = carry;
            carry = compose(totals[c][static_cast<std::size_t>(j)], carry);
        }
    }

    // Phase 3: fold each chunk's carry into its local states, then read out.
    run_chunks(chunks, parallel, [&](std::size_t c) {
        const Chunk ch = chunks[c];
        for (Index j = 0; j < n; ++j) {
            const ScanElement carry = carries[c][static_cast<std::size_t>(j)];
            double pw_re = 1.0;
            double pw_im = 0.0;
            for (Index t = ch.begin; t < ch.end; ++t) {
                const double nr = pw_re * dyn.lambda_re[j] - pw_im * dyn.lambda_im[j];
                const double ni = pw_re * dyn.lambda_im[j] + pw_im * dyn.lambda_re[j];
                pw_re = nr;
                pw_im = ni;
                out.h_re(t, j) += pw_re * carry.b_re - pw_im * carry.b_im;
                out.h_im(t, j) += pw_re * carry.b_im + pw_im * carry.b_re;
            }
        }
        const Index len = ch.end - ch.begin;
        out.y.middleRows(ch.begin, len).noalias() = out.h_re.middleRows(ch.begin, len) * params.c_re.transpose();
        out.y.middleRows(ch.begin, len).noalias() -= out.h_im.middleRows(ch.begin, len) * params.c_im.transpose();
        out.y.middleRows(ch.begin, len).noalias() += u_seq.middleRows(ch.begin, len) * params.d.transpose();
    });
    return out;
}

}  // namespace lru
