#include "sttf/neuralnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sttf/rng.hpp"

namespace sttf::nn {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_finite(std::span<const double> v, const char* layer) {
    for (double x : v)
        if (!std::isfinite(x))
            throw std::runtime_error(std::string("non-finite value in layer: ") + layer);
}

Vec gate_preactivation(const Matrix& w, const Vec& b, std::span<const double> z) {
    Vec a = matvec(w, z);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

void glorot_fill(Matrix& m, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : m.data()) v = rng.uniform(-limit, limit);
}

void glorot_fill(Vec& v, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& x : v) x = rng.uniform(-limit, limit);
}

LstmCellParams make_lstm(std::size_t hidden, std::size_t input) {
    LstmCellParams p;
    const std::size_t cols = hidden + input;
    p.w_f = Matrix(hidden, cols);
    p.w_i = Matrix(hidden, cols);
    p.w_c = Matrix(hidden, cols);
    p.w_o = Matrix(hidden, cols);
    p.b_f.assign(hidden, 0.0);
    p.b_i.assign(hidden, 0.0);
    p.b_c.assign(hidden, 0.0);
    p.b_o.assign(hidden, 0.0);
    return p;
}

AttentionParams make_attention(std::size_t score, std::size_t hidden) {
    AttentionParams p;
    p.w_a = Matrix(score, hidden);
    p.v_a.assign(score, 0.0);
    p.b_a.assign(score, 0.0);
    return p;
}

void append(Vec& flat, const Matrix& m) {
    flat.insert(flat.end(), m.data().begin(), m.data().end());
}
void append(Vec& flat, const Vec& v) { flat.insert(flat.end(), v.begin(), v.end()); }

void take(std::span<const double>& flat, Matrix& m) {
    std::copy_n(flat.begin(), m.data().size(), m.data().begin());
    flat = flat.subspan(m.data().size());
}
void take(std::span<const double>& flat, Vec& v) {
    std::copy_n(flat.begin(), v.size(), v.begin());
    flat = flat.subspan(v.size());
}

}  // namespace

LstmCellState lstm_cell_forward(const LstmCellParams& params, std::span<const double> x,
                                const LstmCellState& prev, LstmStepCache* cache) {
    const std::size_t hidden = params.hidden_size();
    const std::size_t input = params.input_size();
    if (x.size() != input || prev.h.size() != hidden || prev.c.size() != hidden)
        throw std::invalid_argument("lstm_cell_forward: shape mismatch");
    for (double v : x)
        if (!std::isfinite(v)) throw std::invalid_argument("lstm_cell_forward: non-finite input");

    Vec z(hidden + input);
    std::copy(prev.h.begin(), prev.h.end(), z.begin());
    std::copy(x.begin(), x.end(), z.begin() + hidden);

    Vec f = gate_preactivation(params.w_f, params.b_f, z);
    Vec i = gate_preactivation(params.w_i, params.b_i, z);
    Vec g = gate_preactivation(params.w_c, params.b_c, z);
    Vec o = gate_preactivation(params.w_o, params.b_o, z);
    for (std::size_t j = 0; j < hidden; ++j) {
        f[j] = sigmoid(f[j]);
        i[j] = sigmoid(i[j]);
        g[j] = std::tanh(g[j]);
        o[j] = sigmoid(o[j]);
    }

    LstmCellState next;
    next.c.resize(hidden);
    next.h.resize(hidden);
    Vec tanh_c(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
        next.c[j] = f[j] * prev.c[j] + i[j] * g[j];
        tanh_c[j] = std::tanh(next.c[j]);
        next.h[j] = o[j] * tanh_c[j];
    }

    if (cache) {
        cache->z = std::move(z);
        cache->f = std::move(f);
        cache->i = std::move(i);
        cache->g = std::move(g);
        cache->o = std::move(o);
        cache->c_prev = prev.c;
        cache->c = next.c;
        cache->tanh_c = std::move(tanh_c);
    }
    return next;
}

Matrix attention_forward(const AttentionParams& params, const Matrix& hidden_seq,
                         AttentionCache* cache) {
    const std::size_t steps = hidden_seq.rows();
    const std::size_t hidden = hidden_seq.cols();
    if (steps == 0) throw std::invalid_argument("attention_forward: empty sequence");
    if (params.w_a.cols() != hidden)
        throw std::invalid_argument("attention_forward: shape mismatch");

    const std::size_t score = params.score_size();
    Matrix u(steps, score);
    Vec scores(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        Vec pre = matvec(params.w_a, hidden_seq.row(t));
        for (std::size_t s = 0; s < score; ++s) u(t, s) = std::tanh(pre[s] + params.b_a[s]);
        scores[t] = dot(params.v_a, u.row(t));
    }

    // Stable softmax over the time axis.
    const double peak = *std::max_element(scores.begin(), scores.end());
    Vec alpha(steps);
    double norm = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
        alpha[t] = std::exp(scores[t] - peak);
        norm += alpha[t];
    }
    for (double& a : alpha) a /= norm;

    Matrix out(steps, hidden);
    for (std::size_t t = 0; t < steps; ++t)
        for (std::size_t j = 0; j < hidden; ++j) out(t, j) = alpha[t] * hidden_seq(t, j);

    if (cache) {
        cache->u = std::move(u);
        cache->scores = std::move(scores);
        cache->alpha = std::move(alpha);
    }
    return out;
}

ModelDims ModelParams::dims() const {
    return {lstm1.input_size(), lstm1.hidden_size(), attn1.score_size(), dense_b.size()};
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto* cell : {&lstm1, &lstm2})
        n += 4 * cell->w_f.data().size() + 4 * cell->b_f.size();
    for (const auto* attn : {&attn1, &attn2})
        n += attn->w_a.data().size() + attn->v_a.size() + attn->b_a.size();
    n += dense_w.data().size() + dense_b.size() + out_w.size() + 1;
    return n;
}

Vec ModelParams::flatten() const {
    Vec flat;
    flat.reserve(parameter_count());
    for (const auto* cell : {&lstm1, &lstm2}) {
        append(flat, cell->w_f);
        append(flat, cell->w_i);
        append(flat, cell->w_c);
        append(flat, cell->w_o);
        append(flat, cell->b_f);
        append(flat, cell->b_i);
        append(flat, cell->b_c);
        append(flat, cell->b_o);
    }
    for (const auto* attn : {&attn1, &attn2}) {
        append(flat, attn->w_a);
        append(flat, attn->v_a);
        append(flat, attn->b_a);
    }
    append(flat, dense_w);
    append(flat, dense_b);
    append(flat, out_w);
    flat.push_back(out_b);
    return flat;
}

void ModelParams::unflatten(std::span<const double> flat) {
    if (flat.size() != parameter_count())
        throw std::invalid_argument("unflatten: size mismatch");
    for (auto* cell : {&lstm1, &lstm2}) {
        take(flat, cell->w_f);
        take(flat, cell->w_i);
        take(flat, cell->w_c);
        take(flat, cell->w_o);
        take(flat, cell->b_f);
        take(flat, cell->b_i);
        take(flat, cell->b_c);
        take(flat, cell->b_o);
    }
    for (auto* attn : {&attn1, &attn2}) {
        take(flat, attn->w_a);
        take(flat, attn->v_a);
        take(flat, attn->b_a);
    }
    take(flat, dense_w);
    take(flat, dense_b);
    take(flat, out_w);
    out_b = flat[0];
}

ModelParams ModelParams::zeros(const ModelDims& dims) {
    ModelParams p;
    p.lstm1 = make_lstm(dims.hidden, dims.input);
    p.lstm2 = make_lstm(dims.hidden, dims.hidden);
    p.attn1 = make_attention(dims.score, dims.hidden);
    p.attn2 = make_attention(dims.score, dims.hidden);
    p.dense_w = Matrix(dims.dense, dims.hidden);
    p.dense_b.assign(dims.dense, 0.0);
    p.out_w.assign(dims.dense, 0.0);
    p.out_b = 0.0;
    return p;
}

ModelParams ModelParams::glorot(const ModelDims& dims, std::uint64_t seed) {
    ModelParams p = zeros(dims);
    p.rng_seed = seed;
    Rng rng(seed);
    for (auto* cell : {&p.lstm1, &p.lstm2}) {
        const std::size_t fan_in = cell->w_f.cols();
        for (auto* w : {&cell->w_f, &cell->w_i, &cell->w_c, &cell->w_o})
            glorot_fill(*w, fan_in, dims.hidden, rng);
    }
    for (auto* attn : {&p.attn1, &p.attn2}) {
        glorot_fill(attn->w_a, dims.hidden, dims.score, rng);
        glorot_fill(attn->v_a, dims.score, 1, rng);
    }
    glorot_fill(p.dense_w, dims.hidden, dims.dense, rng);
    glorot_fill(p.out_w, dims.dense, 1, rng);
    return p;
}

double model_forward(const ModelParams& params, const Matrix& window, ForwardCache* cache) {
    const ModelDims dims = params.dims();
    const std::size_t steps = window.rows();
    if (steps == 0 || window.cols() != dims.input)
        throw std::invalid_argument("model_forward: window shape mismatch");

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc.window = window;
    cc.lstm1_steps.assign(steps, {});
    cc.lstm2_steps.assign(steps, {});

    cc.h1 = Matrix(steps, dims.hidden);
    LstmCellState state = LstmCellState::zeros(dims.hidden);
    for (std::size_t t = 0; t < steps; ++t) {
        state = lstm_cell_forward(params.lstm1, window.row(t), state, &cc.lstm1_steps[t]);
        std::copy(state.h.begin(), state.h.end(), cc.h1.row(t).begin());
    }
    check_finite(cc.h1.data(), "lstm1");

    cc.a1 = attention_forward(params.attn1, cc.h1, &cc.attn1);
    check_finite(cc.a1.data(), "attention1");

    cc.h2 = Matrix(steps, dims.hidden);
    state = LstmCellState::zeros(dims.hidden);
    for (std::size_t t = 0; t < steps; ++t) {
        state = lstm_cell_forward(params.lstm2, cc.a1.row(t), state, &cc.lstm2_steps[t]);
        std::copy(state.h.begin(), state.h.end(), cc.h2.row(t).begin());
    }
    check_finite(cc.h2.data(), "lstm2");

    cc.a2 = attention_forward(params.attn2, cc.h2, &cc.attn2);
    check_finite(cc.a2.data(), "attention2");

    cc.pooled.assign(dims.hidden, 0.0);
    for (std::size_t t = 0; t < steps; ++t) axpy(1.0, cc.a2.row(t), cc.pooled);

    cc.dense_pre = matvec(params.dense_w, cc.pooled);
    cc.dense_out.resize(dims.dense);
    for (std::size_t j = 0; j < dims.dense; ++j) {
        cc.dense_pre[j] += params.dense_b[j];
        cc.dense_out[j] = std::tanh(cc.dense_pre[j]);
    }
    check_finite(cc.dense_out, "dense");

    cc.prediction = dot(params.out_w, cc.dense_out) + params.out_b;
    if (!std::isfinite(cc.prediction))
        throw std::runtime_error("non-finite value in layer: output");
    return cc.prediction;
}

namespace {

/// Backward through one attention layer. d_out is the gradient w.r.t. the
/// reweighted sequence; returns the gradient w.r.t. the incoming hidden
/// sequence and accumulates parameter gradients.
Matrix attention_backward(const AttentionParams& params, const Matrix& hidden_seq,
                          const AttentionCache& cache, const Matrix& d_out,
                          AttentionParams& grads) {
    const std::size_t steps = hidden_seq.rows();
    const std::size_t hidden = hidden_seq.cols();
    const std::size_t score = params.score_size();

    Vec d_alpha(steps, 0.0);
    Matrix d_hidden(steps, hidden);
    for (std::size_t t = 0; t < steps; ++t) {
        d_alpha[t] = dot(d_out.row(t), hidden_seq.row(t));
        for (std::size_t j = 0; j < hidden; ++j)
            d_hidden(t, j) = cache.alpha[t] * d_out(t, j);
    }

    // Softmax Jacobian: de_t = alpha_t (d_alpha_t - sum_s alpha_s d_alpha_s).
    double mixed = 0.0;
    for (std::size_t t = 0; t < steps; ++t) mixed += cache.alpha[t] * d_alpha[t];
    Vec d_score(steps);
    for (std::size_t t = 0; t < steps; ++t)
        d_score[t] = cache.alpha[t] * (d_alpha[t] - mixed);

    for (std::size_t t = 0; t < steps; ++t) {
        Vec d_pre(score);
        for (std::size_t s = 0; s < score; ++s) {
            const double u = cache.u(t, s);
            grads.v_a[s] += d_score[t] * u;
            d_pre[s] = d_score[t] * params.v_a[s] * (1.0 - u * u);
        }
        add_outer(grads.w_a, d_pre, hidden_seq.row(t));
        axpy(1.0, d_pre, grads.b_a);
        Vec back = matvec_transposed(params.w_a, d_pre);
        axpy(1.0, back, d_hidden.row(t));
    }
    return d_hidden;
}

/// BPTT through one LSTM layer. d_h_seq is the gradient w.r.t. every
/// emitted hidden state; returns the gradient w.r.t. the layer inputs.
Matrix lstm_backward(const LstmCellParams& params,
                     const std::vector<LstmStepCache>& steps_cache, const Matrix& d_h_seq,
                     LstmCellParams& grads) {
    const std::size_t steps = d_h_seq.rows();
    const std::size_t hidden = params.hidden_size();
    const std::size_t input = params.input_size();

    Matrix d_x(steps, input);
    Vec dh_carry(hidden, 0.0);
    Vec dc_carry(hidden, 0.0);

    for (std::size_t t = steps; t-- > 0;) {
        const LstmStepCache& sc = steps_cache[t];
        Vec dh(hidden), dc(hidden), dzf(hidden), dzi(hidden), dzg(hidden), dzo(hidden);
        for (std::size_t j = 0; j < hidden; ++j) {
            dh[j] = d_h_seq(t, j) + dh_carry[j];
            const double d_o = dh[j] * sc.tanh_c[j];
            dc[j] = dc_carry[j] + dh[j] * sc.o[j] * (1.0 - sc.tanh_c[j] * sc.tanh_c[j]);
            const double d_f = dc[j] * sc.c_prev[j];
            const double d_i = dc[j] * sc.g[j];
            const double d_g = dc[j] * sc.i[j];
            dzf[j] = d_f * sc.f[j] * (1.0 - sc.f[j]);
            dzi[j] = d_i * sc.i[j] * (1.0 - sc.i[j]);
            dzg[j] = d_g * (1.0 - sc.g[j] * sc.g[j]);
            dzo[j] = d_o * sc.o[j] * (1.0 - sc.o[j]);
        }

        add_outer(grads.w_f, dzf, sc.z);
        add_outer(grads.w_i, dzi, sc.z);
        add_outer(grads.w_c, dzg, sc.z);
        add_outer(grads.w_o, dzo, sc.z);
        axpy(1.0, dzf, grads.b_f);
        axpy(1.0, dzi, grads.b_i);
        axpy(1.0, dzg, grads.b_c);
        axpy(1.0, dzo, grads.b_o);

        Vec dz = matvec_transposed(params.w_f, dzf);
        {
            Vec tmp = matvec_transposed(params.w_i, dzi);
            axpy(1.0, tmp, dz);
            tmp = matvec_transposed(params.w_c, dzg);
            axpy(1.0, tmp, dz);
            tmp = matvec_transposed(params.w_o, dzo);
            axpy(1.0, tmp, dz);
        }
        for (std::size_t j = 0; j < hidden; ++j) {
            dh_carry[j] = dz[j];
            dc_carry[j] = dc[j] * sc.f[j];
        }
        for (std::size_t j = 0; j < input; ++j) d_x(t, j) = dz[hidden + j];
    }
    return d_x;
}

}  // namespace

ModelParams model_backward(const ModelParams& params, const ForwardCache& cache,
                           double label) {
    const ModelDims dims = params.dims();
    ModelParams grads = ModelParams::zeros(dims);

    // Loss = (pred - label)^2.
    const double d_pred = 2.0 * (cache.prediction - label);

    grads.out_b = d_pred;
    Vec d_dense_out(dims.dense);
    for (std::size_t j = 0; j < dims.dense; ++j) {
        grads.out_w[j] = d_pred * cache.dense_out[j];
        d_dense_out[j] = d_pred * params.out_w[j];
    }

    Vec d_dense_pre(dims.dense);
    for (std::size_t j = 0; j < dims.dense; ++j)
        d_dense_pre[j] = d_dense_out[j] * (1.0 - cache.dense_out[j] * cache.dense_out[j]);
    add_outer(grads.dense_w, d_dense_pre, cache.pooled);
    axpy(1.0, d_dense_pre, grads.dense_b);

    Vec d_pooled = matvec_transposed(params.dense_w, d_dense_pre);

    const std::size_t steps = cache.window.rows();
    Matrix d_a2(steps, dims.hidden);
    for (std::size_t t = 0; t < steps; ++t)
        std::copy(d_pooled.begin(), d_pooled.end(), d_a2.row(t).begin());

    Matrix d_h2 = attention_backward(params.attn2, cache.h2, cache.attn2, d_a2, grads.attn2);
    Matrix d_a1 = lstm_backward(params.lstm2, cache.lstm2_steps, d_h2, grads.lstm2);
    Matrix d_h1 = attention_backward(params.attn1, cache.h1, cache.attn1, d_a1, grads.attn1);
    lstm_backward(params.lstm1, cache.lstm1_steps, d_h1, grads.lstm1);

    for (double g : grads.flatten())
        if (!std::isfinite(g)) throw std::runtime_error("model_backward: non-finite gradient");
    return grads;
}

void adam_step(Vec& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config, int t) {
    if (t < 1) throw std::invalid_argument("adam_step: t must be >= 1");
    if (params.size() != grads.size() || state.m.size() != params.size() ||
        state.v.size() != params.size())
        throw std::invalid_argument("adam_step: size mismatch");

    const double bc1 = 1.0 - std::pow(config.beta1, t);
    const double bc2 = 1.0 - std::pow(config.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
        state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        const double update = config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
        if (!std::isfinite(update)) throw std::runtime_error("adam_step: non-finite update");
        params[i] -= update;
    }
}

namespace {

double dataset_mse(const ModelParams& params, const WindowDataset& dataset,
                   std::size_t begin, std::size_t end) {
    if (begin >= end) return 0.0;
    double acc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const double err = model_forward(params, dataset.features[i]) - dataset.labels[i];
        acc += err * err;
    }
    return acc / static_cast<double>(end - begin);
}

}  // namespace

TrainResult train(const WindowDataset& dataset, const TrainConfig& config) {
    if (dataset.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (config.epochs < 1 || config.batch_size < 1)
        throw std::invalid_argument("train: epochs and batch_size must be positive");
    if (config.validation_fraction < 0.0 || config.validation_fraction >= 1.0)
        throw std::invalid_argument("train: validation_fraction must be in [0,1)");

    const std::size_t n = dataset.size();
    const auto n_val = static_cast<std::size_t>(
        std::floor(config.validation_fraction * static_cast<double>(n)));
    const std::size_t n_train = n - n_val;
    if (n_train == 0) throw std::invalid_argument("train: no training samples left");

    ModelDims dims = config.dims;
    dims.input = dataset.channel_count;

    ModelParams params = ModelParams::glorot(dims, config.seed);
    Vec flat = params.flatten();
    AdamState adam = AdamState::zeros(flat.size());
    Rng rng(config.seed);

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result;
    Vec best_flat = flat;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    int adam_t = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < n_train;
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(n_train, start + static_cast<std::size_t>(config.batch_size));
            Vec batch_flat(flat.size(), 0.0);
            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t idx = order[b];
                ForwardCache cache;
                model_forward(params, dataset.features[idx], &cache);
                const ModelParams g = model_backward(params, cache, dataset.labels[idx]);
                const Vec gf = g.flatten();
                axpy(1.0, gf, batch_flat);
            }
            const double inv = 1.0 / static_cast<double>(stop - start);
            for (double& g : batch_flat) g *= inv;
            adam_step(flat, batch_flat, adam, config.adam, ++adam_t);
            params.unflatten(flat);
        }

        const double train_mse = dataset_mse(params, dataset, 0, n_train);
        const double val_mse =
            n_val > 0 ? dataset_mse(params, dataset, n_train, n) : train_mse;
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse))
            throw std::runtime_error("train: loss diverged at epoch " + std::to_string(epoch));
        result.train_loss.push_back(train_mse);
        result.val_loss.push_back(val_mse);

        if (val_mse < best_val) {
            best_val = val_mse;
            best_flat = flat;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience) {
            result.stopped_early = true;
            break;
        }
    }

    params.unflatten(best_flat);
    params.rng_seed = config.seed;
    result.params = std::move(params);
    return result;
}

}  // namespace sttf::nn
