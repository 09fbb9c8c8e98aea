#include <functional>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sttf/commands.hpp"
#include "sttf/config.hpp"

namespace {

using sttf::cli::RunConfig;

/// Option values parsed for one subcommand, plus the recipe for folding the
/// flags the user actually passed over a config-file baseline (flags win).
struct SubcommandContext {
    RunConfig parsed;
    std::string config_file;
    bool causal = false;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bindings;

    RunConfig resolve() const {
        RunConfig config =
            config_file.empty() ? RunConfig{} : sttf::cli::load_config_file(config_file);
        for (const auto& [option, apply] : bindings)
            if (option->count() > 0) apply(config);
        return config;
    }
};

std::shared_ptr<SubcommandContext> add_common_options(CLI::App* cmd) {
    auto ctx = std::make_shared<SubcommandContext>();
    RunConfig& v = ctx->parsed;

    cmd->add_option("--config", ctx->config_file,
                    "JSON config file; command-line flags override its values");

    auto bind = [&](CLI::Option* option, auto field) {
        ctx->bindings.emplace_back(
            option, [&v, field](RunConfig& c) { c.*field = v.*field; });
    };

    bind(cmd->add_option("--data", v.data_path, "input CSV path"), &RunConfig::data_path);
    bind(cmd->add_option("--column", v.value_column, "value column name"),
         &RunConfig::value_column);
    bind(cmd->add_option("--interval-minutes", v.interval_minutes, "sampling interval"),
         &RunConfig::interval_minutes);
    bind(cmd->add_option("--train-fraction", v.train_fraction,
                         "chronological train share"),
         &RunConfig::train_fraction);
    bind(cmd->add_option("--lookback", v.lookback, "window length L"),
         &RunConfig::lookback);
    bind(cmd->add_option("--emd-max-sift-iters", v.emd_max_sift_iters,
                         "sift iteration cap per component"),
         &RunConfig::emd_max_sift_iters);
    bind(cmd->add_option("--emd-zero-mean-tol", v.emd_zero_mean_tol,
                         "relative envelope-mean tolerance"),
         &RunConfig::emd_zero_mean_tol);
    bind(cmd->add_option("--emd-max-imfs", v.emd_max_imfs, "component cap"),
         &RunConfig::emd_max_imfs);
    bind(cmd->add_option("--emd-boundary", v.emd_boundary, "mirror | clamp"),
         &RunConfig::emd_boundary);
    bind(cmd->add_option("--emd-scope", v.emd_scope, "full | causal"),
         &RunConfig::emd_scope);
    bind(cmd->add_flag("--no-residual-channel{false}", v.include_residual_channel,
                       "drop the residual feature channel (ablation)"),
         &RunConfig::include_residual_channel);
    bind(cmd->add_option("--hidden", v.hidden, "LSTM neurons per layer"),
         &RunConfig::hidden);
    bind(cmd->add_option("--score", v.score, "attention score size"), &RunConfig::score);
    bind(cmd->add_option("--dense", v.dense, "dense layer size"), &RunConfig::dense);
    bind(cmd->add_option("--epochs", v.epochs, "training epoch cap"), &RunConfig::epochs);
    bind(cmd->add_option("--batch-size", v.batch_size, "mini-batch size"),
         &RunConfig::batch_size);
    bind(cmd->add_option("--lr", v.learning_rate, "Adam learning rate"),
         &RunConfig::learning_rate);
    bind(cmd->add_option("--validation-fraction", v.validation_fraction,
                         "chronological tail held out for early stopping"),
         &RunConfig::validation_fraction);
    bind(cmd->add_option("--patience", v.patience, "early-stop patience (epochs)"),
         &RunConfig::patience);
    bind(cmd->add_option("--seed", v.seed, "RNG seed"), &RunConfig::seed);
    bind(cmd->add_option("--zero-policy", v.zero_policy, "MAPE zero handling: skip | epsilon"),
         &RunConfig::zero_policy);
    bind(cmd->add_option("--ar-p", v.ar_p, "AR baseline order"), &RunConfig::ar_p);
    bind(cmd->add_option("--arma-p", v.arma_p, "ARMA AR order"), &RunConfig::arma_p);
    bind(cmd->add_option("--arma-q", v.arma_q, "ARMA MA order"), &RunConfig::arma_q);
    bind(cmd->add_option("--arima-p", v.arima_p, "ARIMA AR order"), &RunConfig::arima_p);
    bind(cmd->add_option("--arima-d", v.arima_d, "ARIMA differencing order"),
         &RunConfig::arima_d);
    bind(cmd->add_option("--arima-q", v.arima_q, "ARIMA MA order"), &RunConfig::arima_q);
    bind(cmd->add_flag("--grid-search", v.grid_search,
                       "search ARMA/ARIMA orders over p,q in 1..4"),
         &RunConfig::grid_search);
    bind(cmd->add_flag("--recursive", v.recursive,
                       "recursive multi-step baselines instead of one-step"),
         &RunConfig::recursive);
    bind(cmd->add_option("--models", v.models,
                         "baselines to run (naive, ar, arma, arima, lstm)")
             ->delimiter(','),
         &RunConfig::models);
    bind(cmd->add_option("--out-dir", v.out_dir, "output directory"), &RunConfig::out_dir);
    bind(cmd->add_option("--checkpoint", v.checkpoint_path, "model checkpoint path"),
         &RunConfig::checkpoint_path);

    // Shorthand; equivalent to --emd-scope causal.
    auto* causal = cmd->add_flag("--causal", ctx->causal,
                                 "decompose only past data (same as --emd-scope causal)");
    ctx->bindings.emplace_back(causal, [](RunConfig& c) { c.emd_scope = "causal"; });

    return ctx;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"STTF: traffic-flow forecasting via signal decomposition + LSTM"};
    app.require_subcommand(1);

    int exit_code = 0;
    struct Entry {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Entry entries[] = {
        {"decompose", "write the component decomposition of a series", sttf::cli::cmd_decompose},
        {"train", "fit the forecaster and write a checkpoint", sttf::cli::cmd_train},
        {"predict", "predict the next interval from a checkpoint", sttf::cli::cmd_predict},
        {"evaluate", "evaluate a checkpoint on the test span", sttf::cli::cmd_evaluate},
        {"baseline", "fit and evaluate the comparison models", sttf::cli::cmd_baseline},
        {"compare", "merged comparison of the forecaster and baselines", sttf::cli::cmd_compare},
    };
    for (const auto& entry : entries) {
        CLI::App* sub = app.add_subcommand(entry.name, entry.help);
        auto ctx = add_common_options(sub);
        auto run = entry.run;
        sub->callback([ctx, run, &exit_code]() {
            try {
                exit_code = run(ctx->resolve());
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << "\n";
                exit_code = 1;
            }
        });
    }

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}
