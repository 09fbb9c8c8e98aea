#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sttf::cli {

/// Everything a command needs, loadable from a JSON file; command-line flags
/// override file values. Round-trips losslessly through its file form.
struct RunConfig {
    // data
    std::string data_path;
    std::string value_column = "value";
    int interval_minutes = 30;

    // pipeline
    double train_fraction = 2.0 / 3.0;
    std::size_t lookback = 3;

    // emd
    int emd_max_sift_iters = 100;
    double emd_zero_mean_tol = 0.05;
    int emd_max_imfs = 12;
    std::string emd_boundary = "mirror";  // mirror | clamp
    std::string emd_scope = "full";       // full | causal
    bool include_residual_channel = true;

    // network
    std::size_t hidden = 10;
    std::size_t score = 10;
    std::size_t dense = 10;
    int epochs = 200;
    int batch_size = 32;
    double learning_rate = 1e-3;
    double validation_fraction = 0.15;
    int patience = 20;

    std::uint64_t seed = 42;
    std::string zero_policy = "skip";  // skip | epsilon

    // baselines
    std::size_t ar_p = 2;
    std::size_t arma_p = 2;
    std::size_t arma_q = 2;
    std::size_t arima_p = 2;
    std::size_t arima_d = 1;
    std::size_t arima_q = 2;
    bool grid_search = false;
    bool recursive = false;
    std::vector<std::string> models = {"naive", "ar", "arma", "arima", "lstm"};

    // io
    std::string out_dir = "out";
    std::string checkpoint_path;

    void validate() const;
};

std::string config_to_json_string(const RunConfig& config);
RunConfig config_from_json_string(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// FNV-1a over the canonical JSON form; stable across runs.
std::string config_hash(const RunConfig& config);

}  // namespace sttf::cli
