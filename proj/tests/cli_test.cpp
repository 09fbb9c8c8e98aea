#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "sttf/commands.hpp"
#include "sttf/config.hpp"
#include "sttf/forecaster.hpp"
#include "sttf/io.hpp"
#include "sttf/rng.hpp"

using namespace sttf;
using namespace sttf::cli;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_series_csv(const fs::path& dir, const Vec& values) {
    std::string csv = "timestamp,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i, values[i]);
        csv += buf;
    }
    const fs::path path = dir / "series.csv";
    atomic_write_file(path.string(), csv);
    return path.string();
}

Vec two_tone(std::size_t n) {
    Vec v(n);
    for (std::size_t k = 0; k < n; ++k)
        v[k] = 431.0 + 200.0 * std::sin(2 * kPi * static_cast<double>(k) / 48.0) +
               40.0 * std::sin(2 * kPi * static_cast<double>(k) / 12.0);
    return v;
}

RunConfig tiny_train_config(const fs::path& dir, const std::string& data) {
    RunConfig cfg;
    cfg.data_path = data;
    cfg.out_dir = dir.string();
    cfg.train_fraction = 0.75;
    cfg.epochs = 3;
    cfg.patience = 3;
    cfg.hidden = 5;
    cfg.score = 4;
    cfg.dense = 5;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("RunConfig round-trips through its JSON form") {
    RunConfig cfg;
    cfg.data_path = "somewhere.csv";
    cfg.train_fraction = 0.8;
    cfg.models = {"naive", "lstm"};
    cfg.seed = 123456789;
    cfg.emd_scope = "causal";

    const std::string text = config_to_json_string(cfg);
    const RunConfig back = config_from_json_string(text);
    CHECK(config_to_json_string(back) == text);
    CHECK(back.models == cfg.models);
    CHECK(back.seed == cfg.seed);

    // Partial files keep defaults for missing keys.
    const RunConfig partial = config_from_json_string(R"({"lookback": 5})");
    CHECK(partial.lookback == 5);
    CHECK(partial.train_fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("config_hash is stable and sensitive") {
    RunConfig a, b;
    CHECK(config_hash(a) == config_hash(b));
    b.seed = a.seed + 1;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("RunConfig validation rejects bad values") {
    RunConfig cfg;
    cfg.train_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = RunConfig{};
    cfg.zero_policy = "ignore";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = RunConfig{};
    cfg.models = {"prophet"};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("cmd_decompose on a monotonic series emits zero IMFs") {
    const fs::path dir = fresh_dir("sttf_cli_mono");
    Vec ramp(64);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    RunConfig cfg;
    cfg.data_path = write_series_csv(dir, ramp);
    cfg.out_dir = dir.string();
    REQUIRE(cmd_decompose(cfg) == 0);

    const auto sidecar = nlohmann::json::parse(read_file((dir / "decompose.json").string()));
    CHECK(sidecar.at("imf_count").get<std::size_t>() == 0);
    CHECK(sidecar.at("max_reconstruction_error").get<double>() == 0.0);

    // Residual column equals the centered input.
    const std::string csv = read_file((dir / "imfs.csv").string());
    CHECK(csv.rfind("residual,", 0) == 0);
}

TEST_CASE("cmd_decompose on a two-tone series reconstructs and reruns identically") {
    const fs::path dir = fresh_dir("sttf_cli_two");
    RunConfig cfg;
    cfg.data_path = write_series_csv(dir, two_tone(720));
    cfg.out_dir = dir.string();
    REQUIRE(cmd_decompose(cfg) == 0);

    const auto sidecar = nlohmann::json::parse(read_file((dir / "decompose.json").string()));
    CHECK(sidecar.at("imf_count").get<std::size_t>() >= 2);
    // 1e-8 relative to the centered amplitude (~240).
    CHECK(sidecar.at("max_reconstruction_error").get<double>() < 1e-8 * 240.0);

    const std::string first = read_file((dir / "imfs.csv").string());
    REQUIRE(cmd_decompose(cfg) == 0);
    CHECK(read_file((dir / "imfs.csv").string()) == first);
}

TEST_CASE("cmd_train writes a reloadable checkpoint and deterministic history") {
    const fs::path dir = fresh_dir("sttf_cli_train");
    const RunConfig cfg = tiny_train_config(dir, write_series_csv(dir, two_tone(480)));
    REQUIRE(cmd_train(cfg) == 0);

    CHECK(fs::exists(dir / "checkpoint.json"));
    CHECK(fs::exists(dir / "loss_history.csv"));
    CHECK(fs::exists(dir / "eval_report.json"));
    CHECK(fs::exists(dir / "manifest_train.json"));

    const forecast::SttfModel model =
        forecast::load_checkpoint((dir / "checkpoint.json").string());
    CHECK(model.lookback == cfg.lookback);

    const std::string history = read_file((dir / "loss_history.csv").string());
    REQUIRE(cmd_train(cfg) == 0);
    CHECK(read_file((dir / "loss_history.csv").string()) == history);
    CHECK(forecast::load_checkpoint((dir / "checkpoint.json").string()).net.flatten() ==
          model.net.flatten());
}

TEST_CASE("cmd_predict and cmd_evaluate run from a saved checkpoint") {
    const fs::path dir = fresh_dir("sttf_cli_predict");
    RunConfig cfg = tiny_train_config(dir, write_series_csv(dir, two_tone(480)));
    REQUIRE(cmd_train(cfg) == 0);
    const auto train_report =
        nlohmann::json::parse(read_file((dir / "eval_report.json").string()));
    cfg.checkpoint_path = (dir / "checkpoint.json").string();

    REQUIRE(cmd_predict(cfg) == 0);
    const auto pred = nlohmann::json::parse(read_file((dir / "prediction.json").string()));
    CHECK(std::isfinite(pred.at("prediction").get<double>()));

    REQUIRE(cmd_evaluate(cfg) == 0);
    const auto report = nlohmann::json::parse(read_file((dir / "eval_report.json").string()));
    CHECK(report.at("model_name").get<std::string>() == "STTF");
    CHECK(report.at("n").get<std::size_t>() == 120);
    CHECK(fs::exists(dir / "overlay.csv"));
    CHECK(fs::exists(dir / "overlay.svg"));

    // The train-time report and the evaluate-time report agree.
    CHECK(train_report.at("rmse").get<double>() == report.at("rmse").get<double>());
}

TEST_CASE("cmd_baseline renders a comparison table matching module recomputation") {
    const fs::path dir = fresh_dir("sttf_cli_baseline");
    RunConfig cfg;
    cfg.data_path = write_series_csv(dir, two_tone(600));
    cfg.out_dir = dir.string();
    cfg.models = {"naive", "ar"};
    REQUIRE(cmd_baseline(cfg) == 0);

    const auto reports =
        nlohmann::json::parse(read_file((dir / "baseline_reports.json").string()));
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].at("model_name").get<std::string>() == "naive");

    // Recompute the naive row from scratch.
    const TimeSeries series = load_csv(cfg.data_path, "value", 30);
    const auto [train, test] = split_train_test(series, cfg.train_fraction);
    Vec preds;
    for (std::size_t t = train.size(); t < series.size(); ++t)
        preds.push_back(series.values[t - 1]);
    const double want = metrics::rmse({test.values, preds});
    CHECK(reports[0].at("rmse").get<double>() == doctest::Approx(want).epsilon(1e-12));

    const std::string table = read_file((dir / "comparison.txt").string());
    CHECK(table.find("naive") != std::string::npos);
    CHECK(table.find("AR(2)") != std::string::npos);
    CHECK(table.find("Model") != std::string::npos);
}

TEST_CASE("cmd_compare produces a merged table with the forecaster first") {
    const fs::path dir = fresh_dir("sttf_cli_compare");
    RunConfig cfg = tiny_train_config(dir, write_series_csv(dir, two_tone(480)));
    REQUIRE(cmd_train(cfg) == 0);
    cfg.checkpoint_path = (dir / "checkpoint.json").string();
    cfg.models = {"naive"};
    REQUIRE(cmd_compare(cfg) == 0);

    const std::string table = read_file((dir / "comparison.txt").string());
    const auto sttf_pos = table.find("STTF");
    const auto naive_pos = table.find("naive");
    REQUIRE(sttf_pos != std::string::npos);
    REQUIRE(naive_pos != std::string::npos);
    CHECK(sttf_pos < naive_pos);

    const std::string overlay = read_file((dir / "overlay.csv").string());
    CHECK(overlay.rfind("interval,actual,STTF,naive", 0) == 0);
}

TEST_CASE("perfect predictions render as 0.00 rows") {
    // A constant series: the degenerate forecaster and naive both hit every
    // label exactly.
    const fs::path dir = fresh_dir("sttf_cli_perfect");
    RunConfig cfg = tiny_train_config(dir, write_series_csv(dir, Vec(240, 431.0)));
    cfg.epochs = 2;
    REQUIRE(cmd_train(cfg) == 0);
    cfg.checkpoint_path = (dir / "checkpoint.json").string();
    cfg.models = {"naive"};
    REQUIRE(cmd_compare(cfg) == 0);
    const std::string table = read_file((dir / "comparison.txt").string());
    CHECK(table.find("0.00") != std::string::npos);
}

TEST_CASE("failed commands leave no partial output files") {
    const fs::path dir = fresh_dir("sttf_cli_fail");
    RunConfig cfg;
    cfg.data_path = (dir / "missing.csv").string();
    cfg.out_dir = dir.string();
    CHECK_THROWS(cmd_decompose(cfg));
    CHECK_FALSE(fs::exists(dir / "imfs.csv"));
    CHECK_FALSE(fs::exists(dir / "imfs.csv.tmp"));
    CHECK_FALSE(fs::exists(dir / "decompose.json"));

    cfg.checkpoint_path = (dir / "missing_checkpoint.json").string();
    CHECK_THROWS(cmd_evaluate(cfg));
    CHECK_FALSE(fs::exists(dir / "eval_report.json"));
}

TEST_CASE("manifest records the config hash and seed") {
    const fs::path dir = fresh_dir("sttf_cli_manifest");
    RunConfig cfg;
    cfg.data_path = write_series_csv(dir, two_tone(240));
    cfg.out_dir = dir.string();
    REQUIRE(cmd_decompose(cfg) == 0);
    const auto manifest =
        nlohmann::json::parse(read_file((dir / "manifest_decompose.json").string()));
    CHECK(manifest.at("config_hash").get<std::string>() == config_hash(cfg));
    CHECK(manifest.at("seed").get<std::uint64_t>() == cfg.seed);
    CHECK(manifest.at("command").get<std::string>() == "decompose");
}
