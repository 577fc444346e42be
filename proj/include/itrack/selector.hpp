#pragma once

// Stochastic asset selection for cardinality-constrained index tracking.
//
// K "bags" each pick one of N assets. Bag i picks asset j with probability
// π[i][j] = softmax(S[i] / τ)[j]; the picks are drawn with the Gumbel-Max
// trick and summed into a mask z. Capital is allocated as
//
//     w = exp(w̃) ⊙ z / Σ(exp(w̃) ⊙ z)
//
// so w is always on the simplex with at most K non-zeros. The loss ‖Xw − y‖²
// is minimised over the unconstrained (S, w̃) by Adam. The hard one-hot picks
// are used in the forward pass; gradients for S flow through the
// Gumbel-Softmax relaxation instead (straight-through estimator). τ is annealed
// as c / ln(e + t).

#include "itrack/market_data.hpp"
#include "itrack/portfolio.hpp"
#include "itrack/rng.hpp"
#include "itrack/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <numbers>
#include <vector>

namespace itrack::selector {

/// Floor applied to probabilities before taking logarithms.
inline constexpr double kProbFloor = 1e-30;

struct SelectorParams {
    Matrix S;        // K × N selection logits
    Vector w_tilde;  // N allocation logits

    Index bags() const { return S.rows(); }
    Index assets() const { return S.cols(); }
    bool all_finite() const { return S.allFinite() && w_tilde.allFinite(); }
};

struct TempSchedule {
    double c = 0.1;
    double offset = std::numbers::e;

    double operator()(double t) const;
};

/// 0.1 / ln(e + t).
double temperature(double t);

/// Row-wise softmax of S / τ, stabilised by subtracting the row maximum.
Matrix softmax_with_temperature(const Matrix& S, double tau);

/// −ln(−ln u), with u clamped into (0, 1).
double gumbel_from_uniform(double u);
Matrix sample_gumbel(Index rows, Index cols, Engine& rng);

/// Per row, argmax of g + ln π (lowest index on ties).
std::vector<Index> hard_sample(const Matrix& pi, const Matrix& g);
/// Per row, softmax((g + ln π) / tau). tau = 1 is the plain relaxation.
Matrix soft_sample(const Matrix& pi, const Matrix& g, double tau = 1.0);

/// exp(w̃) ⊙ mask, normalised. The mask may hold multiplicities.
Vector allocate(const Vector& w_tilde, const Vector& mask);

/// ‖Xw − y‖², computed from the residual.
double loss(const Matrix& X, const Vector& w, const Vector& y);

/// ‖Xw − y‖² and its gradient through a cached Gram matrix, so that a sparse
/// w costs O(N·nnz) instead of O(D·N).
class TrackingObjective {
public:
    TrackingObjective(Matrix X, Vector y);

    double value(const Vector& w) const;
    /// Returns the loss and writes 2(XᵀXw − Xᵀy) into grad.
    double value_and_gradient(const Vector& w, Vector& grad) const;

    const Matrix& X() const { return x_; }
    const Vector& y() const { return y_; }
    Index assets() const { return x_.cols(); }

private:
    Matrix x_;
    Vector y_;
    Matrix gram_;
    Vector xty_;
    double yty_;
};

enum class MaskMode {
    Counts,  // z = Σ z_i; an asset picked by two bags counts twice
    Binary,  // z = min(Σ z_i, 1)
};

struct SampleOptions {
    MaskMode mask = MaskMode::Counts;
    /// Divide the Gumbel-Softmax logits by τ as well. Off by default: the
    /// straight-through forward pass is one-hot at any temperature.
    bool gumbel_temperature = false;
};

struct ForwardSample {
    double tau = 1.0;
    Matrix pi;                 // K × N, row-stochastic
    Matrix g;                  // K × N Gumbel noise
    std::vector<Index> picks;  // the hot index of each z_i
    Matrix soft;               // K × N relaxed samples (backward pass only)
    Vector z_mask;             // N
    Vector w_hat;              // exp(w̃)
    Vector w;                  // N, on the simplex
    double loss = 0.0;

    Matrix z_rows() const;
};

struct Gradients {
    Matrix dS;
    Vector dw_tilde;
};

ForwardSample forward(const SelectorParams& params, const TrackingObjective& objective, const Matrix& g,
                      double tau, const SampleOptions& options = {});

/// Straight-through gradients of a hard forward sample. Throws when a block
/// turns non-finite, naming the block.
Gradients backward(const ForwardSample& sample, const TrackingObjective& objective,
                   const SelectorParams& params, const SampleOptions& options = {});

/// Fully relaxed surrogate: the soft samples replace the hard picks in the
/// forward pass too. Smooth in (S, w̃); used to validate the S-gradient path.
double relaxed_loss(const SelectorParams& params, const TrackingObjective& objective, const Matrix& g,
                    double tau, const SampleOptions& options = {});
Gradients relaxed_gradients(const SelectorParams& params, const TrackingObjective& objective,
                            const Matrix& g, double tau, const SampleOptions& options = {});

/// Throws unless the sample satisfies its structural invariants: row-stochastic
/// π, one-hot picks, mask total K, and w ≥ 0, Σw = 1, ‖w‖₀ ≤ K, w = 0 off-mask.
void check_sample(const ForwardSample& sample, double tol = 1e-9);

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainConfig {
    int iters = 2000;
    double learning_rate = 0.01;
    AdamSettings adam;
    std::uint64_t seed = 0;
    bool postprocess = true;
    bool anneal_logits = false;  // temperature inside the Gumbel-Softmax as well
    MaskMode mask = MaskMode::Counts;
    double init_scale = 0.01;  // std of the initial S entries
    TempSchedule schedule;

    void validate() const;
    SampleOptions sample_options() const { return {mask, anneal_logits}; }
};

nlohmann::json to_json(const TrainConfig& c);
/// Missing keys keep their defaults.
TrainConfig train_config_from_json(const nlohmann::json& j);

SelectorParams initial_params(Index bags, Index assets, const TrainConfig& config);

/// Supplies the Gumbel noise for iteration t; replaces the seeded stream.
using NoiseSource = std::function<void(int t, Matrix& g)>;

struct TrainResult {
    SelectorParams params;
    std::vector<double> losses;  // one per iteration
};

TrainResult train_run(const TrackingObjective& objective, int k, const TrainConfig& config,
                      const SelectorParams* init = nullptr, const NoiseSource& noise = {});

SelectorParams train(const ReturnsMatrix& data, int k, const TrainConfig& config);

/// Row-wise argmax of S (lowest index on ties), de-duplicated in first-seen order.
std::vector<Index> extract_assets(const Matrix& S);

/// train → extract_assets → refit on the selected columns. Without
/// post-processing the weights are exp(w̃) on the selected assets, weighted by
/// how many rows of S picked each one, then renormalised. `losses`, when
/// given, receives the per-iteration training loss.
FittedPortfolio fit_portfolio(const ReturnsMatrix& data, int k, const TrainConfig& config,
                              std::vector<double>* losses = nullptr);

}  // namespace itrack::selector
