#include "lru/harness/evaluate.hpp"

#include "lru/bptt.hpp"
#include "lru/error.hpp"
#include "lru/optim.hpp"

namespace lru::harness {

Evaluation evaluate(const Network& net, const Dataset& data, double huber_delta, const PredictionSink& sink) {
    if (data.input_size() != net.input_size() || data.target_size() != net.output_size()) {
        fail(ErrorKind::Compatibility, "data widths do not match the checkpoint network");
    }
    const HuberLoss loss(huber_delta);
    Evaluation out;
    Vector sq = Vector::Zero(net.output_size());
    Vector pred(net.output_size());
    for (const auto& s : data.sessions) {
        const SeqMatrix p = predict_sequence(net, s.inputs);
        for (Index t = 0; t < p.rows(); ++t) {
            out.huber_total += loss.value(p.row(t).transpose(), s.targets.row(t).transpose());
            sq += (p.row(t) - s.targets.row(t)).array().square().matrix().transpose();
            ++out.steps;
            if (sink) {
                pred = p.row(t).transpose();
                sink(out.steps, s, t, pred);
            }
        }
    }
    if (out.steps > 0) {
        out.huber_mean = out.huber_total / static_cast<double>(out.steps);
        sq /= static_cast<double>(out.steps);
    }
    out.mse.assign(sq.data(), sq.data() + sq.size());
    return out;
}

}  // namespace lru::harness
