#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace maclab {

// Line-oriented "key = value" config with [section] headers. '#' starts a
// comment. Values keep internal spaces; keys are case-sensitive.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text);
    static KeyValueConfig from_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    long long get_int(const std::string& section, const std::string& key) const;
    long long get_int_or(const std::string& section, const std::string& key,
                         long long fallback) const;
    double get_double(const std::string& section, const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const;

    // comma lists and "a..b" integer ranges
    std::vector<std::string> get_list(const std::string& section, const std::string& key) const;
    std::vector<long long> get_int_list(const std::string& section, const std::string& key) const;
    std::vector<double> get_double_list(const std::string& section, const std::string& key) const;

    const std::map<std::string, std::map<std::string, std::string>>& sections() const {
        return sections_;
    }

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

// Thread cap for the seed-parallel worker pool (MACLAB_THREADS, default
// hardware concurrency).
int worker_pool_threads();

// Runs fn(seed_index) for every index, in a pool of at most `threads`
// workers; each index is executed exactly once.
void parallel_for_seeds(int count, int threads, const std::function<void(int)>& fn);

struct SeriesPoint {
    double x = 0.0;
    double y = 0.0;
};

struct PlotSeries {
    std::string label;
    std::vector<SeriesPoint> points;
};

struct PlotSpec {
    std::string title;
    std::string x_label = "x";
    std::string y_label = "y";
    bool log_x = false;
    bool log_y = false;
    int width = 640;
    int height = 420;
};

// Deterministic standalone SVG: one polyline per series, legend entries in
// input order. Throws on empty series or log axes with non-positive values.
std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec);

// Seed-wise mean/std (n-1 convention) per checkpoint across trace CSVs with
// identical checkpoint columns. Uses the last numeric column of each row as
// the value. Returns CSV text "x,mean,std,count".
std::string aggregate_traces(const std::vector<std::string>& csv_texts);
std::string aggregate_trace_files(const std::vector<std::string>& paths);

struct ExperimentOutcome {
    std::string out_dir;
    std::vector<std::string> variant_labels;
    std::vector<std::string> trace_files;
};

// Config-driven experiment runner: expands list-valued fields into variants,
// runs every (variant, seed) pair in the worker pool, writes per-seed trace
// CSVs, a per-variant aggregate CSV, metadata.json, and an optional SVG.
ExperimentOutcome run_experiment(const KeyValueConfig& config);

}  // namespace maclab
