#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sttf/matrix.hpp"
#include "sttf/timeseries.hpp"

namespace sttf::nn {

/// Gate weights stacked as hidden x (hidden + input); the input to every gate
/// is the concatenation [h_prev, x].
struct LstmCellParams {
    Matrix w_f, w_i, w_c, w_o;
    Vec b_f, b_i, b_c, b_o;

    std::size_t hidden_size() const { return b_f.size(); }
    std::size_t input_size() const { return w_f.cols() - b_f.size(); }
};

struct LstmCellState {
    Vec h;
    Vec c;

    static LstmCellState zeros(std::size_t hidden) { return {Vec(hidden, 0.0), Vec(hidden, 0.0)}; }
};

/// Everything the backward pass needs from one forward step.
struct LstmStepCache {
    Vec z;       // [h_prev, x]
    Vec f, i, g, o;  // gate activations; g is the tanh candidate
    Vec c_prev, c, tanh_c;
};

/// One LSTM step:
///   f,i,o = sigmoid(W [h_prev, x] + b),  g = tanh(W_c [h_prev, x] + b_c)
///   c = f*c_prev + i*g,  h = o*tanh(c)   (all products element-wise)
LstmCellState lstm_cell_forward(const LstmCellParams& params, std::span<const double> x,
                                const LstmCellState& prev, LstmStepCache* cache = nullptr);

/// Additive scoring: e_t = v_a . tanh(W_a h_t + b_a), alpha = softmax(e),
/// output_t = alpha_t * h_t. Sequence shape is preserved so a second LSTM
/// can consume the result.
struct AttentionParams {
    Matrix w_a;  // score x hidden
    Vec v_a;     // score
    Vec b_a;     // score

    std::size_t score_size() const { return v_a.size(); }
};

struct AttentionCache {
    Matrix u;    // L x score, tanh-activated
    Vec scores;  // L
    Vec alpha;   // L, sums to 1
};

Matrix attention_forward(const AttentionParams& params, const Matrix& hidden_seq,
                         AttentionCache* cache = nullptr);

struct ModelDims {
    std::size_t input = 1;
    std::size_t hidden = 10;
    std::size_t score = 10;
    std::size_t dense = 10;
};

/// Two LSTM layers with an attention layer after each, then temporal sum
/// pooling, a tanh dense layer and a scalar linear output.
struct ModelParams {
    LstmCellParams lstm1, lstm2;
    AttentionParams attn1, attn2;
    Matrix dense_w;  // dense x hidden
    Vec dense_b;     // dense
    Vec out_w;       // dense
    double out_b = 0.0;
    std::uint64_t rng_seed = 0;

    ModelDims dims() const;
    std::size_t parameter_count() const;

    /// All tensors in one fixed-order flat vector (rng_seed excluded).
    Vec flatten() const;
    void unflatten(std::span<const double> flat);

    static ModelParams zeros(const ModelDims& dims);
    /// Glorot-uniform weights, zero biases, deterministic in the seed.
    static ModelParams glorot(const ModelDims& dims, std::uint64_t seed);
};

struct ForwardCache {
    Matrix window;
    std::vector<LstmStepCache> lstm1_steps, lstm2_steps;
    Matrix h1, a1, h2, a2;  // per-layer sequences, each L x hidden
    AttentionCache attn1, attn2;
    Vec pooled;       // hidden
    Vec dense_pre;    // dense, pre-tanh
    Vec dense_out;    // dense, tanh-activated
    double prediction = 0.0;
};

/// Scalar prediction for one L x K window. Throws on shape mismatch or
/// non-finite intermediates (the offending layer is named).
double model_forward(const ModelParams& params, const Matrix& window,
                     ForwardCache* cache = nullptr);

/// Exact gradients of (prediction - label)^2 w.r.t. every parameter, via
/// backpropagation through time over both LSTM layers and both attention
/// layers. Returns a ModelParams-shaped container of gradients.
ModelParams model_backward(const ModelParams& params, const ForwardCache& cache,
                           double label);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Vec m;
    Vec v;

    static AdamState zeros(std::size_t n) { return {Vec(n, 0.0), Vec(n, 0.0)}; }
};

/// Standard Adam update with bias correction; t is the 1-based step count.
void adam_step(Vec& params, std::span<const double> grads, AdamState& state,
               const AdamConfig& config, int t);

struct TrainConfig {
    int epochs = 200;
    int batch_size = 32;
    AdamConfig adam;
    std::uint64_t seed = 0;
    double validation_fraction = 0.15;
    int patience = 20;
    ModelDims dims;  // dims.input is overwritten from the dataset
};

struct TrainResult {
    ModelParams params;  // best-validation snapshot
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = 0;       // 0-based index into the loss history
    bool stopped_early = false;
};

/// Mini-batch MSE training. The chronological tail of the dataset is held
/// out for validation; batches are shuffled with the seeded RNG inside the
/// training portion only. Two runs with the same seed and config produce
/// bit-identical loss histories.
TrainResult train(const WindowDataset& dataset, const TrainConfig& config);

}  // namespace sttf::nn
