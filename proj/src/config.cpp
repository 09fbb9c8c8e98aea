#include "sttf/config.hpp"

#include <cstdio>
#include <stdexcept>

#include <json.hpp>

#include "sttf/io.hpp"

namespace sttf::cli {

using nlohmann::json;

void RunConfig::validate() const {
    if (interval_minutes <= 0) throw std::invalid_argument("interval_minutes must be > 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train_fraction must be in (0,1)");
    if (lookback < 1) throw std::invalid_argument("lookback must be >= 1");
    if (emd_max_sift_iters < 1) throw std::invalid_argument("emd_max_sift_iters must be >= 1");
    if (emd_zero_mean_tol <= 0.0) throw std::invalid_argument("emd_zero_mean_tol must be > 0");
    if (emd_max_imfs < 1) throw std::invalid_argument("emd_max_imfs must be >= 1");
    if (emd_boundary != "mirror" && emd_boundary != "clamp")
        throw std::invalid_argument("emd_boundary must be mirror or clamp");
    if (emd_scope != "full" && emd_scope != "causal")
        throw std::invalid_argument("emd_scope must be full or causal");
    if (hidden < 1 || score < 1 || dense < 1)
        throw std::invalid_argument("network sizes must be >= 1");
    if (epochs < 1 || batch_size < 1) throw std::invalid_argument("epochs/batch_size must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be > 0");
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw std::invalid_argument("validation_fraction must be in [0,1)");
    if (patience < 1) throw std::invalid_argument("patience must be >= 1");
    if (zero_policy != "skip" && zero_policy != "epsilon")
        throw std::invalid_argument("zero_policy must be skip or epsilon");
    if (ar_p < 1 || arma_p < 1 || arima_p < 1)
        throw std::invalid_argument("autoregressive orders must be >= 1");
    if (arima_d > 2) throw std::invalid_argument("arima_d must be in {0,1,2}");
    for (const auto& m : models)
        if (m != "naive" && m != "ar" && m != "arma" && m != "arima" && m != "lstm")
            throw std::invalid_argument("unknown baseline model: " + m);
}

std::string config_to_json_string(const RunConfig& c) {
    json j{{"data_path", c.data_path},
           {"value_column", c.value_column},
           {"interval_minutes", c.interval_minutes},
           {"train_fraction", c.train_fraction},
           {"lookback", c.lookback},
           {"emd_max_sift_iters", c.emd_max_sift_iters},
           {"emd_zero_mean_tol", c.emd_zero_mean_tol},
           {"emd_max_imfs", c.emd_max_imfs},
           {"emd_boundary", c.emd_boundary},
           {"emd_scope", c.emd_scope},
           {"include_residual_channel", c.include_residual_channel},
           {"hidden", c.hidden},
           {"score", c.score},
           {"dense", c.dense},
           {"epochs", c.epochs},
           {"batch_size", c.batch_size},
           {"learning_rate", c.learning_rate},
           {"validation_fraction", c.validation_fraction},
           {"patience", c.patience},
           {"seed", c.seed},
           {"zero_policy", c.zero_policy},
           {"ar_p", c.ar_p},
           {"arma_p", c.arma_p},
           {"arma_q", c.arma_q},
           {"arima_p", c.arima_p},
           {"arima_d", c.arima_d},
           {"arima_q", c.arima_q},
           {"grid_search", c.grid_search},
           {"recursive", c.recursive},
           {"models", c.models},
           {"out_dir", c.out_dir},
           {"checkpoint_path", c.checkpoint_path}};
    return j.dump(2) + "\n";
}

namespace {

template <class T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig config_from_json_string(const std::string& text) {
    const json j = json::parse(text);
    RunConfig c;
    maybe(j, "data_path", c.data_path);
    maybe(j, "value_column", c.value_column);
    maybe(j, "interval_minutes", c.interval_minutes);
    maybe(j, "train_fraction", c.train_fraction);
    maybe(j, "lookback", c.lookback);
    maybe(j, "emd_max_sift_iters", c.emd_max_sift_iters);
    maybe(j, "emd_zero_mean_tol", c.emd_zero_mean_tol);
    maybe(j, "emd_max_imfs", c.emd_max_imfs);
    maybe(j, "emd_boundary", c.emd_boundary);
    maybe(j, "emd_scope", c.emd_scope);
    maybe(j, "include_residual_channel", c.include_residual_channel);
    maybe(j, "hidden", c.hidden);
    maybe(j, "score", c.score);
    maybe(j, "dense", c.dense);
    maybe(j, "epochs", c.epochs);
    maybe(j, "batch_size", c.batch_size);
    maybe(j, "learning_rate", c.learning_rate);
    maybe(j, "validation_fraction", c.validation_fraction);
    maybe(j, "patience", c.patience);
    maybe(j, "seed", c.seed);
    maybe(j, "zero_policy", c.zero_policy);
    maybe(j, "ar_p", c.ar_p);
    maybe(j, "arma_p", c.arma_p);
    maybe(j, "arma_q", c.arma_q);
    maybe(j, "arima_p", c.arima_p);
    maybe(j, "arima_d", c.arima_d);
    maybe(j, "arima_q", c.arima_q);
    maybe(j, "grid_search", c.grid_search);
    maybe(j, "recursive", c.recursive);
    maybe(j, "models", c.models);
    maybe(j, "out_dir", c.out_dir);
    maybe(j, "checkpoint_path", c.checkpoint_path);
    return c;
}

RunConfig load_config_file(const std::string& path) {
    return config_from_json_string(read_file(path));
}

std::string config_hash(const RunConfig& config) {
    const std::string canonical = config_to_json_string(config);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sttf::cli
