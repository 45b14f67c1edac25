// Command line front end: run experiments from a config file, aggregate trace
// CSVs, and render SVG plots.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "maclab/errors.hpp"
#include "maclab/harness.hpp"

namespace fs = std::filesystem;

namespace {

int do_run(const std::string& config_path) {
    auto cfg = maclab::KeyValueConfig::from_file(config_path);
    auto outcome = maclab::run_experiment(cfg);
    std::cout << "wrote " << outcome.trace_files.size() << " trace files under "
              << outcome.out_dir << "\n";
    for (const auto& label : outcome.variant_labels) std::cout << "  variant " << label << "\n";
    return 0;
}

int do_aggregate(const std::string& dir, const std::string& out_path) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv" &&
            entry.path().filename().string().rfind("seed", 0) == 0)
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw maclab::config_error(dir, "no seed*.csv trace files found");
    std::string agg = maclab::aggregate_trace_files(files);
    if (out_path.empty()) {
        std::cout << agg;
    } else {
        std::ofstream out(out_path);
        out << agg;
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int do_plot(const std::string& csv_path, const std::string& spec_path,
            const std::string& out_path) {
    auto spec_cfg = maclab::KeyValueConfig::from_file(spec_path);
    maclab::PlotSpec spec;
    spec.title = spec_cfg.get_or("plot", "title", "");
    spec.x_label = spec_cfg.get_or("plot", "x_label", "x");
    spec.y_label = spec_cfg.get_or("plot", "y_label", "y");
    spec.log_x = spec_cfg.get_bool_or("plot", "log_x", false);
    spec.log_y = spec_cfg.get_bool_or("plot", "log_y", false);
    spec.width = static_cast<int>(spec_cfg.get_int_or("plot", "width", 640));
    spec.height = static_cast<int>(spec_cfg.get_int_or("plot", "height", 420));

    std::ifstream in(csv_path);
    if (!in) throw maclab::config_error(csv_path, "cannot open csv");
    std::string line;
    std::vector<std::string> headers;
    std::vector<std::vector<double>> columns;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (first) {
            first = false;
            bool header = false;
            try {
                std::stod(fields.back());
            } catch (const std::exception&) {
                header = true;
            }
            if (header) {
                headers = fields;
                columns.resize(fields.size());
                continue;
            }
            for (std::size_t i = 0; i < fields.size(); ++i)
                headers.push_back("col" + std::to_string(i));
            columns.resize(fields.size());
        }
        for (std::size_t i = 0; i < fields.size() && i < columns.size(); ++i)
            columns[i].push_back(std::stod(fields[i]));
    }
    if (columns.empty() || columns[0].empty())
        throw maclab::config_error(csv_path, "csv has no data rows");

    std::vector<std::string> series_names;
    if (spec_cfg.has("plot", "series"))
        series_names = spec_cfg.get_list("plot", "series");
    else
        series_names.push_back(headers.size() > 1 ? headers[1] : headers[0]);

    std::vector<maclab::PlotSeries> series;
    for (const auto& name : series_names) {
        auto it = std::find(headers.begin(), headers.end(), name);
        if (it == headers.end()) throw maclab::config_error("plot.series", "no column '" + name + "'");
        std::size_t col = static_cast<std::size_t>(it - headers.begin());
        maclab::PlotSeries s;
        s.label = name;
        for (std::size_t r = 0; r < columns[0].size(); ++r)
            s.points.push_back({columns[0][r], columns[col][r]});
        series.push_back(std::move(s));
    }
    std::string svg = maclab::render_svg(series, spec);
    std::ofstream out(out_path);
    out << svg;
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-agent regret-minimization simulation toolkit"};
    app.require_subcommand(1);

    std::string config_path, agg_dir, agg_out, plot_csv, plot_spec, plot_out = "plot.svg";

    auto* run_cmd = app.add_subcommand("run", "run an experiment from a config file");
    run_cmd->add_option("config", config_path, "config file")->required();

    auto* agg_cmd = app.add_subcommand("aggregate", "aggregate per-seed trace CSVs");
    agg_cmd->add_option("dir", agg_dir, "directory with seed*.csv files")->required();
    agg_cmd->add_option("-o,--out", agg_out, "output file (stdout when omitted)");

    auto* plot_cmd = app.add_subcommand("plot", "render a CSV as an SVG line plot");
    plot_cmd->add_option("csv", plot_csv, "summary csv")->required();
    plot_cmd->add_option("spec", plot_spec, "plot spec file")->required();
    plot_cmd->add_option("-o,--out", plot_out, "output svg path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return do_run(config_path);
        if (agg_cmd->parsed()) return do_aggregate(agg_dir, agg_out);
        if (plot_cmd->parsed()) return do_plot(plot_csv, plot_spec, plot_out);
    } catch (const maclab::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const maclab::numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
