#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace lru {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// Time-major sequence storage: one row per step.
using SeqMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Parameters of one linear recurrent unit.
///
/// The recurrence is diagonal and complex; complex quantities are stored as
/// split real/imaginary arrays. Eigenvalues are parameterized so that
/// |lambda_j| = exp(-exp(nu_j)) < 1 for every finite nu_j, and the phase is
/// exp(theta_phase_j) radians. gamma_log holds the log of the per-node input
/// normalization.
struct LayerParams {
    Vector nu;           // n
    Vector theta_phase;  // n
    Vector gamma_log;    // n
    Matrix b_re, b_im;   // n x m
    Matrix c_re, c_im;   // p x n
    Matrix d;            // p x m

    Index state_size() const { return nu.size(); }
    Index input_size() const { return b_re.cols(); }
    Index output_size() const { return c_re.rows(); }

    /// Throws ErrorKind::Contract if the blocks disagree on m, n or p.
    void validate() const;

    static LayerParams zeros(Index m, Index n, Index p);
};

/// Number of parameter blocks in a layer, and their canonical order.
inline constexpr int kLayerBlockCount = 8;
inline constexpr std::string_view kLayerBlockNames[kLayerBlockCount] = {
    "nu", "theta_phase", "gamma_log", "b_re", "b_im", "c_re", "c_im", "d"};

/// Visits every block as an Eigen matrix-like object in canonical order.
template <class Params, class Fn>
void for_each_block(Params& p, Fn&& fn) {
    fn(kLayerBlockNames[0], p.nu);
    fn(kLayerBlockNames[1], p.theta_phase);
    fn(kLayerBlockNames[2], p.gamma_log);
    fn(kLayerBlockNames[3], p.b_re);
    fn(kLayerBlockNames[4], p.b_im);
    fn(kLayerBlockNames[5], p.c_re);
    fn(kLayerBlockNames[6], p.c_im);
    fn(kLayerBlockNames[7], p.d);
}

Index parameter_count(const LayerParams& p);

/// Split complex vector.
struct ComplexVector {
    Vector re;
    Vector im;

    Index size() const { return re.size(); }
    static ComplexVector zeros(Index n) { return {Vector::Zero(n), Vector::Zero(n)}; }
};

/// Complex hidden state h_t of one layer.
using HiddenState = ComplexVector;

/// Largest eigenvalue magnitude the parameterization can produce. For nu below
/// about -27 the double exponential rounds to 1; the clamp keeps |lambda| < 1.
inline constexpr double kMaxMagnitude = 1.0 - 1e-12;

/// lambda_j = exp(-exp(nu_j)) * (cos(exp(theta_j)) + i sin(exp(theta_j))).
ComplexVector derive_lambda(const LayerParams& params);

/// Eigenvalues and input gains derived from the parameters; recompute after
/// every parameter update.
struct LayerDynamics {
    Vector lambda_re;
    Vector lambda_im;
    Vector gamma;  // exp(gamma_log)

    static LayerDynamics from(const LayerParams& params);
};

/// Recomputes `dyn` in place (no allocation when sizes already match).
void refresh_dynamics(const LayerParams& params, LayerDynamics& dyn);

struct LayerInit {
    Index input_size = 1;
    Index state_size = 16;
    Index output_size = 1;
    double r_min = 0.9;
    double r_max = 0.999;
    double max_phase = 3.14159265358979323846 / 10.0;
    std::uint64_t seed = 0;
};

/// Ring initialization: |lambda|^2 uniform on [r_min^2, r_max^2], phase uniform
/// on (0, max_phase], gamma = sqrt(1 - |lambda|^2), B ~ N(0, 1/m), C ~ N(0, 1/n),
/// D = 0. Deterministic in the seed.
LayerParams init_layer(const LayerInit& init);
LayerParams init_layer(Index m, Index n, Index p, double r_min, double r_max, std::uint64_t seed);

struct StepOutput {
    HiddenState h;
    Vector y;
};

/// h_t = lambda * h_prev + gamma * (B u_t);  y_t = Re[C h_t] + D u_t.
StepOutput layer_step(const LayerParams& params, const HiddenState& h_prev, const Vector& u);

/// Allocation-free form: advances `h` in place and writes y.
void layer_step_inplace(const LayerParams& params, const LayerDynamics& dyn, HiddenState& h,
                        const Eigen::Ref<const Vector>& u, Eigen::Ref<Vector> y);

struct SequenceOutput {
    SeqMatrix h_re;  // T x n
    SeqMatrix h_im;  // T x n
    SeqMatrix y;     // T x p
};

struct ScanOptions {
    /// Fixed chunk count keeps results independent of thread scheduling.
    int chunks = 8;
    /// Evaluate chunks on worker threads.
    bool parallel = true;
};

/// Whole-sequence forward pass using the associative composition
/// (a2, b2) o (a1, b1) = (a1 a2, a2 b1 + b2) over per-step elements
/// (lambda, gamma * B u_t). Chunks are scanned independently and stitched with
/// their prefix carries.
SequenceOutput scan_forward(const LayerParams& params, const HiddenState& h0, const SeqMatrix& u_seq,
                            const ScanOptions& options = {});

}  // namespace lru
