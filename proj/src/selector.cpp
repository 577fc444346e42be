#include "itrack/selector.hpp"

#include "itrack/kernels.hpp"
#include "itrack/qp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <string>

namespace itrack::selector {

namespace {

Index row_argmax(const Matrix& m, Index row) {
    Index best = 0;
    double v = m(row, 0);
    for (Index j = 1; j < m.cols(); ++j) {
        if (m(row, j) > v) {
            v = m(row, j);
            best = j;
        }
    }
    return best;
}

void softmax_row_inplace(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    const double mx = row.maxCoeff();
    row = (row.array() - mx).exp().matrix();
    row /= row.sum();
}

Matrix perturbed_logits(const Matrix& pi, const Matrix& g, double tau) {
    if (pi.rows() != g.rows() || pi.cols() != g.cols()) throw Error("selector: pi and g shapes differ");
    return ((g.array() + pi.array().max(kProbFloor).log()) / tau).matrix();
}

Vector mask_from(const Matrix& soft_or_hard, MaskMode mode) {
    Vector m = soft_or_hard.colwise().sum().transpose();
    if (mode == MaskMode::Binary) m = m.cwiseMin(1.0);
    return m;
}

Vector exp_logits(const Vector& w_tilde) { return w_tilde.array().exp().matrix(); }

// Shared chain rule from dL/dw back to (S, w̃), given the mask used in the
// forward pass. The mask gradient is routed into S through the relaxed
// samples (exactly for the surrogate, straight-through for hard samples).
Gradients chain(const Matrix& pi, const Matrix& soft, const Vector& w_hat, const Vector& mask,
                const Vector& w, const Vector& grad_w, double tau, const SampleOptions& options) {
    Gradients out;
    const double a = w.dot(grad_w);
    out.dw_tilde = (w.array() * (grad_w.array() - a)).matrix();

    const double s = w_hat.dot(mask);
    const Vector dmask = ((w_hat.array() / s) * (grad_w.array() - a)).matrix();

    const double logit_scale = options.gumbel_temperature ? 1.0 / tau : 1.0;
    const Index k = pi.rows();
    const Index n = pi.cols();
    out.dS.resize(k, n);
    for (Index i = 0; i < k; ++i) {
        const double inner = soft.row(i).dot(dmask);
        double total = 0.0;
        for (Index j = 0; j < n; ++j) {
            double dlog = soft(i, j) * (dmask[j] - inner) * logit_scale;
            if (pi(i, j) <= kProbFloor) dlog = 0.0;
            out.dS(i, j) = dlog;
            total += dlog;
        }
        for (Index j = 0; j < n; ++j) out.dS(i, j) = (out.dS(i, j) - pi(i, j) * total) / tau;
    }
    return out;
}

void require_finite(const Gradients& g) {
    if (!g.dw_tilde.allFinite()) throw Error("selector: non-finite gradient in allocation logits (w_tilde)");
    if (!g.dS.allFinite()) throw Error("selector: non-finite gradient in selection logits (S)");
}

}  // namespace

// --- temperature and sampling ------------------------------------------------------

double TempSchedule::operator()(double t) const {
    if (t < 0.0) throw Error("temperature: iteration index must be >= 0");
    return c / std::log(offset + t);
}

double temperature(double t) { return TempSchedule{}(t); }

Matrix softmax_with_temperature(const Matrix& S, double tau) {
    if (!(tau > 0.0)) throw Error("softmax: temperature must be > 0");
    if (!S.allFinite()) throw Error("softmax: non-finite logits");
    Matrix pi = S / tau;
    for (Index i = 0; i < pi.rows(); ++i) softmax_row_inplace(pi.row(i));
    return pi;
}

double gumbel_from_uniform(double u) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    u = std::clamp(u, eps, 1.0 - eps);
    return -std::log(-std::log(u));
}

Matrix sample_gumbel(Index rows, Index cols, Engine& rng) {
    Matrix g(rows, cols);
    // Row-major fill so that a row's draws are contiguous in the stream.
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) g(i, j) = gumbel_from_uniform(uniform_open(rng));
    }
    return g;
}

std::vector<Index> hard_sample(const Matrix& pi, const Matrix& g) {
    const Matrix logits = perturbed_logits(pi, g, 1.0);
    std::vector<Index> picks(static_cast<std::size_t>(logits.rows()));
    for (Index i = 0; i < logits.rows(); ++i) picks[static_cast<std::size_t>(i)] = row_argmax(logits, i);
    return picks;
}

Matrix soft_sample(const Matrix& pi, const Matrix& g, double tau) {
    if (!(tau > 0.0)) throw Error("soft_sample: temperature must be > 0");
    Matrix logits = perturbed_logits(pi, g, tau);
    for (Index i = 0; i < logits.rows(); ++i) softmax_row_inplace(logits.row(i));
    return logits;
}

Vector allocate(const Vector& w_tilde, const Vector& mask) {
    if (w_tilde.size() != mask.size()) throw Error("allocate: length mismatch");
    const Vector w_bar = (exp_logits(w_tilde).array() * mask.array()).matrix();
    const double s = w_bar.sum();
    if (!(s > 0.0)) throw Error("allocate: mask selects no asset");
    return w_bar / s;
}

double loss(const Matrix& X, const Vector& w, const Vector& y) {
    if (X.cols() != w.size() || X.rows() != y.size()) throw Error("loss: shape mismatch");
    return (kernels::mul(X, w) - y).squaredNorm();
}

// --- objective ----------------------------------------------------------------------

TrackingObjective::TrackingObjective(Matrix X, Vector y) : x_(std::move(X)), y_(std::move(y)) {
    if (x_.rows() < 1 || x_.cols() < 1) throw Error("objective: empty matrix");
    if (x_.rows() != y_.size()) throw Error("objective: X and y row counts differ");
    gram_ = kernels::gram(x_);
    xty_ = kernels::tmul(x_, y_);
    yty_ = y_.squaredNorm();
}

double TrackingObjective::value(const Vector& w) const {
    Vector grad;
    return value_and_gradient(w, grad);
}

double TrackingObjective::value_and_gradient(const Vector& w, Vector& grad) const {
    if (w.size() != x_.cols()) throw Error("objective: weight length mismatch");
    std::vector<Index> ids;
    std::vector<double> vals;
    for (Index j = 0; j < w.size(); ++j) {
        if (w[j] != 0.0) {
            ids.push_back(j);
            vals.push_back(w[j]);
        }
    }
    Vector gw;
    if (2 * static_cast<Index>(ids.size()) < w.size()) {
        gw = kernels::sparse_symv(gram_, ids, vals);
    } else {
        gw = kernels::symv(gram_, w);
    }
    grad = 2.0 * (gw - xty_);
    // Cancellation can leave a tiny negative value; NaN must still propagate.
    const double v = w.dot(gw) - 2.0 * xty_.dot(w) + yty_;
    return v < 0.0 ? 0.0 : v;
}

// --- forward / backward --------------------------------------------------------------

Matrix ForwardSample::z_rows() const {
    Matrix z = Matrix::Zero(static_cast<Index>(picks.size()), pi.cols());
    for (std::size_t i = 0; i < picks.size(); ++i) z(static_cast<Index>(i), picks[i]) = 1.0;
    return z;
}

ForwardSample forward(const SelectorParams& params, const TrackingObjective& objective, const Matrix& g,
                      double tau, const SampleOptions& options) {
    if (params.assets() != objective.assets() || params.w_tilde.size() != params.assets()) {
        throw Error("selector: parameter shapes do not match the data");
    }
    ForwardSample fs;
    fs.tau = tau;
    fs.pi = softmax_with_temperature(params.S, tau);
    fs.g = g;
    fs.picks = hard_sample(fs.pi, g);
    fs.soft = soft_sample(fs.pi, g, options.gumbel_temperature ? tau : 1.0);
    fs.z_mask = Vector::Zero(params.assets());
    for (Index p : fs.picks) fs.z_mask[p] += 1.0;
    if (options.mask == MaskMode::Binary) fs.z_mask = fs.z_mask.cwiseMin(1.0);
    fs.w_hat = exp_logits(params.w_tilde);
    fs.w = allocate(params.w_tilde, fs.z_mask);
    fs.loss = objective.value(fs.w);
    return fs;
}

Gradients backward(const ForwardSample& sample, const TrackingObjective& objective,
                   const SelectorParams& params, const SampleOptions& options) {
    (void)params;
    Vector grad_w;
    objective.value_and_gradient(sample.w, grad_w);
    Gradients g = chain(sample.pi, sample.soft, sample.w_hat, sample.z_mask, sample.w, grad_w, sample.tau, options);
    require_finite(g);
    return g;
}

namespace {

struct RelaxedForward {
    Matrix pi, soft;
    Vector w_hat, mask, w;
};

RelaxedForward relaxed_forward(const SelectorParams& params, const Matrix& g, double tau,
                               const SampleOptions& options) {
    RelaxedForward r;
    r.pi = softmax_with_temperature(params.S, tau);
    r.soft = soft_sample(r.pi, g, options.gumbel_temperature ? tau : 1.0);
    r.mask = mask_from(r.soft, MaskMode::Counts);
    r.w_hat = exp_logits(params.w_tilde);
    r.w = allocate(params.w_tilde, r.mask);
    return r;
}

}  // namespace

double relaxed_loss(const SelectorParams& params, const TrackingObjective& objective, const Matrix& g,
                    double tau, const SampleOptions& options) {
    return objective.value(relaxed_forward(params, g, tau, options).w);
}

Gradients relaxed_gradients(const SelectorParams& params, const TrackingObjective& objective,
                            const Matrix& g, double tau, const SampleOptions& options) {
    const RelaxedForward r = relaxed_forward(params, g, tau, options);
    Vector grad_w;
    objective.value_and_gradient(r.w, grad_w);
    Gradients out = chain(r.pi, r.soft, r.w_hat, r.mask, r.w, grad_w, tau, options);
    require_finite(out);
    return out;
}

void check_sample(const ForwardSample& s, double tol) {
    const Index k = s.pi.rows();
    for (Index i = 0; i < k; ++i) {
        if (std::abs(s.pi.row(i).sum() - 1.0) > tol) throw Error("sample: pi row does not sum to one");
        if (s.pi.row(i).minCoeff() < 0.0 || s.pi.row(i).maxCoeff() > 1.0) throw Error("sample: pi outside [0,1]");
    }
    if (static_cast<Index>(s.picks.size()) != k) throw Error("sample: one pick per bag expected");
    const Matrix z = s.z_rows();
    for (Index i = 0; i < k; ++i) {
        if (z.row(i).sum() != 1.0) throw Error("sample: z row is not one-hot");
    }
    const Index nnz = (s.z_mask.array() != 0.0).count();
    if (nnz > k) throw Error("sample: more than K assets in mask");
    if (s.w.minCoeff() < 0.0) throw Error("sample: negative weight");
    if (std::abs(s.w.sum() - 1.0) > tol) throw Error("sample: weights do not sum to one");
    if ((s.w.array() != 0.0).count() > k) throw Error("sample: more than K non-zero weights");
    for (Index j = 0; j < s.w.size(); ++j) {
        if (s.z_mask[j] == 0.0 && s.w[j] != 0.0) throw Error("sample: weight outside mask");
    }
}

// --- training -------------------------------------------------------------------------

void TrainConfig::validate() const {
    if (iters < 1) throw Error("train: iters must be >= 1");
    if (!(learning_rate > 0.0)) throw Error("train: learning_rate must be > 0");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0 && adam.eps > 0.0)) {
        throw Error("train: invalid Adam settings");
    }
    if (!(init_scale >= 0.0)) throw Error("train: init_scale must be >= 0");
    if (!(schedule.c > 0.0) || !(schedule.offset > 1.0)) throw Error("train: invalid temperature schedule");
}

nlohmann::json to_json(const TrainConfig& c) {
    return {
        {"iters", c.iters},
        {"learning_rate", c.learning_rate},
        {"adam", {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}}},
        {"seed", c.seed},
        {"postprocess", c.postprocess},
        {"anneal_logits", c.anneal_logits},
        {"mask", c.mask == MaskMode::Counts ? "counts" : "binary"},
        {"init_scale", c.init_scale},
        {"temperature_c", c.schedule.c},
    };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    c.iters = j.value("iters", c.iters);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    if (j.contains("adam")) {
        const auto& a = j.at("adam");
        c.adam.beta1 = a.value("beta1", c.adam.beta1);
        c.adam.beta2 = a.value("beta2", c.adam.beta2);
        c.adam.eps = a.value("eps", c.adam.eps);
    }
    c.seed = j.value("seed", c.seed);
    c.postprocess = j.value("postprocess", c.postprocess);
    c.anneal_logits = j.value("anneal_logits", c.anneal_logits);
    const std::string mask = j.value("mask", std::string("counts"));
    if (mask == "counts") {
        c.mask = MaskMode::Counts;
    } else if (mask == "binary") {
        c.mask = MaskMode::Binary;
    } else {
        throw Error("train: mask must be 'counts' or 'binary'");
    }
    c.init_scale = j.value("init_scale", c.init_scale);
    c.schedule.c = j.value("temperature_c", c.schedule.c);
    c.validate();
    return c;
}

SelectorParams initial_params(Index bags, Index assets, const TrainConfig& config) {
    Engine rng = make_engine(config.seed, Stream::SelectorInit);
    std::normal_distribution<double> normal(0.0, 1.0);
    SelectorParams p;
    p.S.resize(bags, assets);
    for (Index i = 0; i < bags; ++i) {
        for (Index j = 0; j < assets; ++j) p.S(i, j) = config.init_scale * normal(rng);
    }
    p.w_tilde = Vector::Zero(assets);
    return p;
}

namespace {

struct Adam {
    AdamSettings cfg;
    double lr;
    Matrix mS, vS;
    Vector mw, vw;
    int step = 0;

    Adam(const AdamSettings& c, double learning_rate, Index k, Index n)
        : cfg(c), lr(learning_rate), mS(Matrix::Zero(k, n)), vS(Matrix::Zero(k, n)),
          mw(Vector::Zero(n)), vw(Vector::Zero(n)) {}

    template <class P, class G, class M>
    void update(P& param, const G& grad, M& m, M& v, double c1, double c2) const {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.eps);
    }

    void apply(SelectorParams& p, const Gradients& g) {
        ++step;
        const double c1 = 1.0 - std::pow(cfg.beta1, step);
        const double c2 = 1.0 - std::pow(cfg.beta2, step);
        update(p.S, g.dS, mS, vS, c1, c2);
        update(p.w_tilde, g.dw_tilde, mw, vw, c1, c2);
    }
};

}  // namespace

TrainResult train_run(const TrackingObjective& objective, int k, const TrainConfig& config,
                      const SelectorParams* init, const NoiseSource& noise) {
    config.validate();
    const Index n = objective.assets();
    if (k < 1) throw Error("train: K must be >= 1");
    if (k > n) throw Error("train: K must not exceed the number of assets");

    TrainResult out;
    out.params = init ? *init : initial_params(k, n, config);
    if (out.params.bags() != k || out.params.assets() != n || out.params.w_tilde.size() != n) {
        throw Error("train: initial parameters have the wrong shape");
    }
    out.losses.reserve(static_cast<std::size_t>(config.iters));

    Engine rng = make_engine(config.seed, Stream::Gumbel);
    Adam adam(config.adam, config.learning_rate, k, n);
    const SampleOptions options = config.sample_options();
    Matrix g(k, n);
    for (int t = 0; t < config.iters; ++t) {
        const double tau = config.schedule(static_cast<double>(t));
        if (noise) {
            noise(t, g);
        } else {
            g = sample_gumbel(k, n, rng);
        }
        const ForwardSample fs = forward(out.params, objective, g, tau, options);
        if (!std::isfinite(fs.loss)) throw Error("train: loss diverged at iteration " + std::to_string(t));
#ifndef NDEBUG
        check_sample(fs);
#endif
        Gradients grads;
        try {
            grads = backward(fs, objective, out.params, options);
        } catch (const Error& e) {
            throw Error(std::string(e.what()) + " at iteration " + std::to_string(t));
        }
        adam.apply(out.params, grads);
        if (!out.params.all_finite()) throw Error("train: parameters diverged at iteration " + std::to_string(t));
        out.losses.push_back(fs.loss);
    }
    return out;
}

SelectorParams train(const ReturnsMatrix& data, int k, const TrainConfig& config) {
    data.validate();
    const TrackingObjective objective(data.X, data.y);
    return train_run(objective, k, config).params;
}

std::vector<Index> extract_assets(const Matrix& S) {
    std::vector<Index> ids;
    for (Index i = 0; i < S.rows(); ++i) {
        const Index j = row_argmax(S, i);
        if (std::find(ids.begin(), ids.end(), j) == ids.end()) ids.push_back(j);
    }
    return ids;
}

FittedPortfolio fit_portfolio(const ReturnsMatrix& data, int k, const TrainConfig& config,
                              std::vector<double>* losses) {
    data.validate();
    const TrackingObjective objective(data.X, data.y);
    TrainResult run = train_run(objective, k, config);
    if (losses) *losses = std::move(run.losses);
    const SelectorParams& params = run.params;
    const std::vector<Index> ids = extract_assets(params.S);

    Vector weights(static_cast<Index>(ids.size()));
    if (config.postprocess) {
        const auto problem = qp::build_problem(data, ids);
        weights = qp::solve(problem).w;
    } else {
        Vector mask = Vector::Zero(data.num_assets());
        for (Index i = 0; i < params.S.rows(); ++i) mask[row_argmax(params.S, i)] += 1.0;
        if (config.mask == MaskMode::Binary) mask = mask.cwiseMin(1.0);
        const Vector w = allocate(params.w_tilde, mask);
        for (std::size_t q = 0; q < ids.size(); ++q) weights[static_cast<Index>(q)] = w[ids[q]];
        weights /= weights.sum();
    }
    FittedPortfolio p = make_portfolio("ours", data, ids, std::move(weights), k);
    p.seed = config.seed;
    p.config = to_json(config);
    return p;
}

}  // namespace itrack::selector
