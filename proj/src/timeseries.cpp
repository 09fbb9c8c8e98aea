#include "sttf/timeseries.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sttf {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    std::string out = s.substr(b, e - b + 1);
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"')
        out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && !s.empty();
}

}  // namespace

TimeSeries load_csv(const std::string& path, const std::string& value_column,
                    int interval_minutes) {
    if (interval_minutes <= 0)
        throw std::invalid_argument("load_csv: interval_minutes must be positive");

    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv: cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line))
        throw std::runtime_error("load_csv: empty file: " + path);

    const auto header = split_csv_line(line);
    std::size_t col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == value_column) {
            col = i;
            break;
        }
    }
    if (col == header.size())
        throw std::runtime_error("load_csv: column '" + value_column + "' not found in " + path);

    TimeSeries series;
    series.interval_minutes = interval_minutes;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv_line(line);
        if (col >= cells.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row) +
                                     ": missing column '" + value_column + "'");
        double v = 0.0;
        if (!parse_double(cells[col], v))
            throw std::runtime_error("load_csv: row " + std::to_string(row) +
                                     ": cannot parse '" + cells[col] + "' as a number");
        if (!std::isfinite(v))
            throw std::runtime_error("load_csv: row " + std::to_string(row) +
                                     ": non-finite value");
        series.values.push_back(v);
    }

    if (series.values.size() < 4)
        throw std::runtime_error("load_csv: fewer than 4 data rows in " + path);
    return series;
}

SeriesSummary summarize(const TimeSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("summarize: empty series");
    SeriesSummary s;
    s.count = series.values.size();
    Vec sorted = series.values;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const std::size_t n = sorted.size();
    s.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    long double acc = 0.0L;
    for (double v : series.values) acc += v;
    s.mean = static_cast<double>(acc / static_cast<long double>(n));
    return s;
}

std::string summary_report(const SeriesSummary& s) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "min=%.6g max=%.6g median=%.6g mean=%.6g count=%zu",
                  s.min, s.max, s.median, s.mean, s.count);
    return buf;
}

CenteredSeries center(const Vec& values) {
    if (values.empty()) throw std::invalid_argument("center: empty series");
    long double acc = 0.0L;
    for (double v : values) acc += v;
    const double mean = static_cast<double>(acc / static_cast<long double>(values.size()));
    CenteredSeries out;
    out.removed_mean = mean;
    out.values.reserve(values.size());
    for (double v : values) out.values.push_back(v - mean);
    return out;
}

CenteredSeries center(const TimeSeries& series) { return center(series.values); }

Vec restore_mean(const CenteredSeries& series) {
    Vec out;
    out.reserve(series.values.size());
    for (double v : series.values) out.push_back(v + series.removed_mean);
    return out;
}

std::pair<TimeSeries, TimeSeries> split_train_test(const TimeSeries& series,
                                                   double train_fraction,
                                                   std::size_t min_part_length) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_train_test: train_fraction must be in (0,1)");
    const std::size_t n = series.values.size();
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(n)));
    if (n_train < min_part_length || n - n_train < min_part_length)
        throw std::runtime_error(
            "split_train_test: fraction leaves a part shorter than " +
            std::to_string(min_part_length) + " samples (train " + std::to_string(n_train) +
            ", test " + std::to_string(n - n_train) + ")");

    TimeSeries train{Vec(series.values.begin(), series.values.begin() + n_train),
                     series.interval_minutes, series.start_label};
    TimeSeries test{Vec(series.values.begin() + n_train, series.values.end()),
                    series.interval_minutes, ""};
    return {std::move(train), std::move(test)};
}

WindowDataset build_windows(const std::vector<Vec>& channels,
                            const CenteredSeries& labels_source, std::size_t lookback) {
    if (channels.empty()) throw std::invalid_argument("build_windows: no channels");
    const std::size_t n = labels_source.values.size();
    for (const auto& ch : channels)
        if (ch.size() != n)
            throw std::invalid_argument("build_windows: channel length mismatch");
    if (lookback < 1 || lookback >= n)
        throw std::invalid_argument("build_windows: lookback must be in [1, N)");

    const std::size_t k = channels.size();
    WindowDataset ds;
    ds.lookback = lookback;
    ds.channel_count = k;
    ds.features.reserve(n - lookback);
    ds.labels.reserve(n - lookback);
    for (std::size_t i = 0; i + lookback < n; ++i) {
        Matrix f(lookback, k);
        for (std::size_t l = 0; l < lookback; ++l)
            for (std::size_t c = 0; c < k; ++c) f(l, c) = channels[c][i + l];
        ds.features.push_back(std::move(f));
        ds.labels.push_back(labels_source.values[i + lookback]);
    }
    return ds;
}

}  // namespace sttf
