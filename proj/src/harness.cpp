#include "maclab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "maclab/analysis.hpp"
#include "maclab/coop.hpp"
#include "maclab/env.hpp"
#include "maclab/errors.hpp"
#include "maclab/fedexp3.hpp"
#include "maclab/fedoco.hpp"
#include "maclab/graph.hpp"
#include "maclab/matching.hpp"

namespace maclab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("line " + std::to_string(line_no), "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw config_error("line " + std::to_string(line_no), "empty section name");
            cfg.sections_[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no), "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("line " + std::to_string(line_no), "empty key");
        if (section.empty())
            throw config_error("line " + std::to_string(line_no), "key before any [section]");
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path, "cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool KeyValueConfig::has(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) != 0 && !s->second.at(key).empty();
}

std::string KeyValueConfig::get(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw config_error(section + "." + key, "missing required field");
    return sections_.at(section).at(key);
}

std::string KeyValueConfig::get_or(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t pos = 0;
        long long out = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw config_error(section + "." + key, "expected an integer, got '" + v + "'");
    }
}

long long KeyValueConfig::get_int_or(const std::string& section, const std::string& key,
                                     long long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

double KeyValueConfig::get_double(const std::string& section, const std::string& key) const {
    const std::string v = get(section, key);
    try {
        std::size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw config_error(section + "." + key, "expected a number, got '" + v + "'");
    }
}

double KeyValueConfig::get_double_or(const std::string& section, const std::string& key,
                                     double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

bool KeyValueConfig::get_bool_or(const std::string& section, const std::string& key,
                                 bool fallback) const {
    if (!has(section, key)) return fallback;
    std::string v = get(section, key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(section + "." + key, "expected a boolean, got '" + v + "'");
}

std::vector<std::string> KeyValueConfig::get_list(const std::string& section,
                                                  const std::string& key) const {
    std::vector<std::string> out;
    std::string v = get(section, key);
    std::size_t start = 0;
    while (start <= v.size()) {
        auto comma = v.find(',', start);
        std::string item = trim(comma == std::string::npos ? v.substr(start)
                                                           : v.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw config_error(section + "." + key, "empty list");
    return out;
}

std::vector<long long> KeyValueConfig::get_int_list(const std::string& section,
                                                    const std::string& key) const {
    std::vector<long long> out;
    for (const auto& item : get_list(section, key)) {
        auto dots = item.find("..");
        try {
            if (dots != std::string::npos) {
                long long lo = std::stoll(item.substr(0, dots));
                long long hi = std::stoll(item.substr(dots + 2));
                if (hi < lo) throw std::invalid_argument("range");
                for (long long x = lo; x <= hi; ++x) out.push_back(x);
            } else {
                out.push_back(std::stoll(item));
            }
        } catch (const std::exception&) {
            throw config_error(section + "." + key, "bad integer list item '" + item + "'");
        }
    }
    return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& section,
                                                    const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(section, key)) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw config_error(section + "." + key, "bad number list item '" + item + "'");
        }
    }
    return out;
}

int worker_pool_threads() {
    if (const char* env = std::getenv("MACLAB_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_seeds(int count, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                int i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string render_svg(const std::vector<PlotSeries>& series, const PlotSpec& spec) {
    if (series.empty()) throw std::invalid_argument("render_svg: no series");
    for (const auto& s : series)
        if (s.points.empty()) throw std::invalid_argument("render_svg: empty series");
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    auto tx = [&](double x) {
        if (spec.log_x) {
            if (x <= 0.0) throw std::invalid_argument("render_svg: log x-axis needs x > 0");
            return std::log10(x);
        }
        return x;
    };
    auto ty = [&](double y) {
        if (spec.log_y) {
            if (y <= 0.0) throw std::invalid_argument("render_svg: log y-axis needs y > 0");
            return std::log10(y);
        }
        return y;
    };
    for (const auto& s : series)
        for (const auto& p : s.points) {
            xmin = std::min(xmin, tx(p.x));
            xmax = std::max(xmax, tx(p.x));
            ymin = std::min(ymin, ty(p.y));
            ymax = std::max(ymax, ty(p.y));
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;

    const int margin = 50;
    const double pw = spec.width - 2.0 * margin;
    const double ph = spec.height - 2.0 * margin;
    auto px = [&](double x) { return margin + (tx(x) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return spec.height - margin - (ty(y) - ymin) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\">\n";
    svg << "<rect width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << spec.width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << spec.title
        << "</text>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << spec.height - margin << "\" x2=\""
        << spec.width - margin << "\" y2=\"" << spec.height - margin
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << spec.height - margin << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << spec.width / 2 << "\" y=\"" << spec.height - 12
        << "\" text-anchor=\"middle\">" << spec.x_label << "</text>\n";
    svg << "<text x=\"14\" y=\"" << spec.height / 2 << "\" text-anchor=\"middle\" transform=\""
        << "rotate(-90 14 " << spec.height / 2 << ")\">" << spec.y_label << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = palette[k % 8];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t j = 0; j < series[k].points.size(); ++j) {
            if (j > 0) svg << ' ';
            svg << fmt(px(series[k].points[j].x)) << ',' << fmt(py(series[k].points[j].y));
        }
        svg << "\"/>\n";
        double ly = margin + 16.0 * static_cast<double>(k);
        svg << "<line x1=\"" << spec.width - margin - 90 << "\" y1=\"" << fmt(ly) << "\" x2=\""
            << spec.width - margin - 70 << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << spec.width - margin - 64 << "\" y=\"" << fmt(ly + 4.0)
            << "\" font-size=\"11\">" << series[k].label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

namespace {

struct ParsedTrace {
    std::vector<std::string> keys;   // checkpoint column (first field per row)
    std::vector<double> values;      // last numeric column per row
};

ParsedTrace parse_trace_csv(const std::string& text) {
    ParsedTrace out;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream row(line);
        std::string f;
        while (std::getline(row, f, ',')) fields.push_back(trim(f));
        if (first) {
            first = false;
            // header row: skip if the last field is not numeric
            try {
                std::size_t pos = 0;
                std::stod(fields.back(), &pos);
                if (pos != fields.back().size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                continue;
            }
        }
        out.keys.push_back(fields.front());
        out.values.push_back(std::stod(fields.back()));
    }
    return out;
}

}  // namespace

std::string aggregate_traces(const std::vector<std::string>& csv_texts) {
    if (csv_texts.empty()) throw config_error("aggregate", "no trace files");
    std::vector<ParsedTrace> traces;
    for (const auto& text : csv_texts) traces.push_back(parse_trace_csv(text));
    // collapse duplicate checkpoints (per-agent rows) by keeping the last value
    std::vector<std::vector<std::pair<std::string, double>>> rows(traces.size());
    for (std::size_t f = 0; f < traces.size(); ++f) {
        for (std::size_t r = 0; r < traces[f].keys.size(); ++r) {
            if (!rows[f].empty() && rows[f].back().first == traces[f].keys[r])
                rows[f].back().second = traces[f].values[r];
            else
                rows[f].push_back({traces[f].keys[r], traces[f].values[r]});
        }
    }
    for (std::size_t f = 1; f < rows.size(); ++f) {
        if (rows[f].size() != rows[0].size())
            throw config_error("aggregate", "trace schema mismatch: row counts differ");
        for (std::size_t r = 0; r < rows[f].size(); ++r)
            if (rows[f][r].first != rows[0][r].first)
                throw config_error("aggregate", "trace schema mismatch: checkpoints differ");
    }
    std::ostringstream out;
    out << "x,mean,std,count\n";
    std::size_t count = rows.size();
    for (std::size_t r = 0; r < rows[0].size(); ++r) {
        double mean = 0.0;
        for (std::size_t f = 0; f < count; ++f) mean += rows[f][r].second;
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (std::size_t f = 0; f < count; ++f) {
            double d = rows[f][r].second - mean;
            var += d * d;
        }
        double sd = count > 1 ? std::sqrt(var / static_cast<double>(count - 1)) : 0.0;
        out << rows[0][r].first << ',' << fmt(mean) << ',' << fmt(sd) << ',' << count << '\n';
    }
    return out.str();
}

std::string aggregate_trace_files(const std::vector<std::string>& paths) {
    std::vector<std::string> texts;
    for (const auto& p : paths) {
        std::ifstream in(p);
        if (!in) throw config_error(p, "cannot open trace file");
        std::ostringstream buf;
        buf << in.rdbuf();
        texts.push_back(buf.str());
    }
    return aggregate_traces(texts);
}

// ---------------------------------------------------------------------------
// experiment runner

namespace {

struct Variant {
    std::string label;
    std::map<std::string, std::string> fields;
};

int parse_int_field(const std::string& path, const std::string& value) {
    try {
        std::size_t pos = 0;
        int out = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw config_error(path, "expected an integer, got '" + value + "'");
    }
}

double parse_double_field(const std::string& path, const std::string& value) {
    try {
        std::size_t pos = 0;
        double out = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing");
        return out;
    } catch (const std::exception&) {
        throw config_error(path, "expected a number, got '" + value + "'");
    }
}

void extend_variants(std::vector<Variant>& variants, const std::string& field,
                     const std::vector<std::string>& values) {
    if (values.size() <= 1) {
        for (auto& v : variants)
            if (!values.empty()) v.fields[field] = values[0];
        return;
    }
    std::vector<Variant> out;
    for (const auto& base : variants)
        for (const auto& val : values) {
            Variant v = base;
            v.fields[field] = val;
            std::string short_name = field.substr(field.find('.') + 1);
            v.label += (v.label.empty() ? "" : "_") + short_name + "=" + val;
            out.push_back(std::move(v));
        }
    variants = std::move(out);
}

CommGraph build_variant_graph(const KeyValueConfig& cfg, const Variant& var) {
    auto field = [&](const std::string& key, const std::string& fallback) {
        auto it = var.fields.find("topology." + key);
        if (it != var.fields.end()) return it->second;
        return cfg.get_or("topology", key, fallback);
    };
    std::string kind = cfg.get("topology", "kind");
    int delay = parse_int_field("topology.delay", field("delay", "1"));
    std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int_or("topology", "seed", 7));
    if (kind == "complete") return build_complete(static_cast<int>(cfg.get_int("topology", "n")), delay);
    if (kind == "star") return build_star(static_cast<int>(cfg.get_int("topology", "n")), delay);
    if (kind == "r_regular")
        return build_r_regular(static_cast<int>(cfg.get_int("topology", "n")),
                               parse_int_field("topology.r", field("r", "2")), delay);
    if (kind == "grid")
        return build_grid(static_cast<int>(cfg.get_int("topology", "rows")),
                          static_cast<int>(cfg.get_int("topology", "cols")), delay);
    if (kind == "erdos_renyi")
        return build_erdos_renyi(static_cast<int>(cfg.get_int("topology", "n")), delay, seed,
                                 cfg.get_double_or("topology", "edge_prob", -1.0));
    if (kind == "rgg")
        return build_rgg(static_cast<int>(cfg.get_int("topology", "n")),
                         parse_double_field("topology.radius", field("radius", "0.5")), delay, seed);
    throw config_error("topology.kind", "unknown topology '" + kind + "'");
}

LossTensor build_variant_env(const KeyValueConfig& cfg, const Variant& var, int n_agents,
                             std::uint64_t run_seed) {
    auto field = [&](const std::string& key, const std::string& fallback) {
        auto it = var.fields.find("env." + key);
        if (it != var.fields.end()) return it->second;
        return cfg.get_or("env", key, fallback);
    };
    std::string kind = cfg.get("env", "kind");
    long long horizon = cfg.get_int("env", "horizon");
    std::uint64_t seed = cfg.has("env", "seed")
                             ? static_cast<std::uint64_t>(cfg.get_int("env", "seed"))
                             : counter_hash(run_seed, 0x0e21, 0, 0);
    if (kind == "bernoulli_linear")
        return LossTensor::bernoulli_linear(parse_int_field("env.arms", field("arms", "10")),
                                            horizon, seed, n_agents);
    if (kind == "federated_activation")
        return LossTensor::federated_activation(
            n_agents, parse_int_field("env.arms", field("arms", "10")), horizon, seed);
    if (kind == "ratings")
        return LossTensor::from_ratings_file(cfg.get("env", "file"), n_agents,
                                             parse_int_field("env.arms", field("arms", "10")),
                                             horizon);
    if (kind == "tensor") return LossTensor::from_tensor_file(cfg.get("env", "file"));
    throw config_error("env.kind", "unknown env '" + kind + "'");
}

std::string match_event_name(MatchEvent e) {
    switch (e) {
        case MatchEvent::init: return "init";
        case MatchEvent::swap: return "swap";
        case MatchEvent::merge: return "merge";
        case MatchEvent::remove: return "remove";
        case MatchEvent::terminate: return "terminate";
    }
    return "?";
}

std::vector<std::uint64_t> parse_seeds(const KeyValueConfig& cfg) {
    auto list = cfg.get_int_list("run", "seeds");
    std::vector<std::uint64_t> out;
    for (long long s : list) out.push_back(static_cast<std::uint64_t>(s));
    if (out.empty()) throw config_error("run.seeds", "no seeds");
    return out;
}

}  // namespace

ExperimentOutcome run_experiment(const KeyValueConfig& cfg) {
    std::string kind = cfg.get("experiment", "kind");
    std::string out_dir = cfg.get("run", "outdir");
    long long stride = cfg.get_int_or("run", "stride", 1);
    bool svg = cfg.get_bool_or("run", "svg", false);
    auto seeds = parse_seeds(cfg);
    fs::create_directories(out_dir);

    // variant expansion over the sweepable fields
    std::vector<Variant> variants(1);
    if (kind == "coop") {
        extend_variants(variants, "algorithm.names", cfg.get_list("algorithm", "names"));
        if (cfg.has("env", "arms")) extend_variants(variants, "env.arms", cfg.get_list("env", "arms"));
        if (cfg.has("topology", "r"))
            extend_variants(variants, "topology.r", cfg.get_list("topology", "r"));
        if (cfg.has("topology", "delay"))
            extend_variants(variants, "topology.delay", cfg.get_list("topology", "delay"));
    } else if (kind == "fedexp3") {
        if (cfg.has("env", "arms")) extend_variants(variants, "env.arms", cfg.get_list("env", "arms"));
        if (cfg.has("topology", "radius"))
            extend_variants(variants, "topology.radius", cfg.get_list("topology", "radius"));
    } else if (kind == "fedoco") {
        extend_variants(variants, "algorithm.alpha", cfg.get_list("algorithm", "alpha"));
        if (cfg.has("env", "kind_list"))
            extend_variants(variants, "env.kind_list", cfg.get_list("env", "kind_list"));
    } else if (kind == "matching" || kind == "chain") {
        extend_variants(variants, "env.n", cfg.get_list("env", "n"));
        extend_variants(variants, "env.p", cfg.get_list("env", "p"));
    } else {
        throw config_error("experiment.kind", "unknown experiment '" + kind + "'");
    }
    for (auto& v : variants)
        if (v.label.empty()) v.label = "base";

    ExperimentOutcome outcome;
    outcome.out_dir = out_dir;
    std::vector<PlotSeries> plot_series;

    for (const auto& var : variants) {
        fs::path vdir = fs::path(out_dir) / var.label;
        fs::create_directories(vdir);
        outcome.variant_labels.push_back(var.label);
        json meta;
        meta["variant"] = var.label;
        meta["kind"] = kind;
        meta["seeds"] = seeds;
        std::vector<std::string> seed_files(seeds.size());
        std::mutex meta_mutex;

        auto run_one = [&](int idx) {
            std::uint64_t seed = seeds[static_cast<std::size_t>(idx)];
            std::ostringstream csv;
            if (kind == "coop") {
                CommGraph graph = build_variant_graph(cfg, var);
                LossTensor env = build_variant_env(cfg, var, graph.n_agents(), seed);
                CoopOptions opt;
                opt.horizon = cfg.get_int("env", "horizon");
                opt.seed = seed;
                opt.stride = stride;
                if (cfg.has("algorithm", "eta"))
                    opt.center_eta = cfg.get_double("algorithm", "eta");
                std::string algo_name = var.fields.at("algorithm.names");
                CoopAlgorithm algo;
                if (algo_name == "cftrl") algo = CoopAlgorithm::cftrl;
                else if (algo_name == "dftrl") algo = CoopAlgorithm::dftrl;
                else if (algo_name == "exp3_coop") algo = CoopAlgorithm::exp3_coop;
                else if (algo_name == "center_exp3") algo = CoopAlgorithm::center_exp3;
                else throw config_error("algorithm.names", "unknown algorithm '" + algo_name + "'");
                auto result = run_cooperative(graph, env, algo, opt);
                csv << "t,agent,regret,avg_regret\n";
                for (const auto& row : result.trace)
                    for (std::size_t v = 0; v < row.regret.size(); ++v)
                        csv << row.t << ',' << v << ',' << fmt(row.regret[v]) << ','
                            << fmt(row.avg_regret) << '\n';
                if (idx == 0) {
                    std::lock_guard<std::mutex> lock(meta_mutex);
                    auto summary = spectral_summary(graph);
                    meta["algorithm"] = algo_name;
                    meta["independence_number"] = summary.independence_number;
                    meta["independence_exact"] = summary.independence_exact;
                    meta["algebraic_connectivity"] = summary.algebraic_connectivity;
                    meta["floored_q_count"] = result.floored_q_count;
                    if (result.eta_center > 0) meta["eta_center"] = result.eta_center;
                    if (result.eta_dftrl > 0) meta["eta"] = result.eta_dftrl;
                    if (result.gamma > 0) meta["gamma"] = result.gamma;
                }
            } else if (kind == "fedexp3") {
                CommGraph graph = build_variant_graph(cfg, var);
                LossTensor env = build_variant_env(cfg, var, graph.n_agents(), seed);
                FedExp3Options opt;
                opt.horizon = cfg.get_int("env", "horizon");
                opt.seed = seed;
                opt.stride = stride;
                opt.exploration_scale = cfg.get_double_or("algorithm", "exploration_scale", 1.0);
                auto result = run_fedexp3(graph, env, opt);
                csv << "t,agent,regret,avg_regret\n";
                for (const auto& row : result.trace)
                    for (std::size_t v = 0; v < row.regret.size(); ++v)
                        csv << row.t << ',' << v << ',' << fmt(row.regret[v]) << ','
                            << fmt(row.avg_regret) << '\n';
                if (idx == 0) {
                    std::lock_guard<std::mutex> lock(meta_mutex);
                    meta["sigma2"] = result.schedules.sigma2;
                    meta["c_w"] = result.schedules.c_w;
                    meta["eta"] = result.schedules.eta;
                    meta["gamma_1"] = result.schedules.gamma(1);
                    meta["gamma_T"] = result.schedules.gamma(result.schedules.horizon);
                    meta["exploration_scale"] = result.schedules.exploration_scale;
                }
            } else if (kind == "fedoco") {
                CommGraph graph = build_variant_graph(cfg, var);
                int dim = static_cast<int>(cfg.get_int_or("env", "arms", 5));
                long long horizon = cfg.get_int("env", "horizon");
                std::string env_kind = var.fields.count("env.kind_list")
                                           ? var.fields.at("env.kind_list")
                                           : cfg.get("env", "kind");
                std::uint64_t env_seed = cfg.has("env", "seed")
                                             ? static_cast<std::uint64_t>(cfg.get_int("env", "seed"))
                                             : counter_hash(seed, 0x0e22, 0, 0);
                OcoProblem problem =
                    env_kind == "oco_quadratic"
                        ? OcoProblem::quadratic(dim, graph.n_agents(), horizon, env_seed)
                        : OcoProblem::linear(dim, graph.n_agents(), horizon, env_seed);
                FedOcoOptions opt;
                opt.alpha = parse_double_field("algorithm.alpha", var.fields.at("algorithm.alpha"));
                opt.seed = seed;
                opt.stride = stride;
                auto result = run_fedoco(graph, problem, opt);
                csv << "t,agent,regret,q_running\n";
                for (const auto& row : result.trace)
                    for (std::size_t v = 0; v < row.regret.size(); ++v)
                        csv << row.t << ',' << v << ',' << fmt(row.regret[v]) << ','
                            << row.q_running << '\n';
                if (idx == 0) {
                    std::lock_guard<std::mutex> lock(meta_mutex);
                    meta["alpha"] = opt.alpha;
                    meta["lambda2"] = result.lambda2;
                    meta["eta_coefficient"] = result.eta_coefficient;
                    meta["schedule_fallback"] = result.schedule_fallback;
                }
            } else if (kind == "matching") {
                int n = parse_int_field("env.n", var.fields.at("env.n"));
                double p = parse_double_field("env.p", var.fields.at("env.p"));
                std::string fn = cfg.get_or("env", "fn", "or");
                std::uint64_t pop_seed = cfg.has("env", "population_seed")
                                             ? static_cast<std::uint64_t>(
                                                   cfg.get_int("env", "population_seed"))
                                             : counter_hash(seed, 0x0e23, 0, 0);
                auto pop = NodePopulation::sample(n, p, pop_seed);
                MatchOptions opt;
                opt.run_seed = seed;
                opt.stride = stride;
                auto trace = fn == "and" ? greedy_bayes_and(pop, opt) : greedy_bayes_or(pop, opt);
                csv << "round,reward,regret,num_sets,event\n";
                for (const auto& row : trace.rows)
                    csv << row.round << ',' << row.reward << ',' << fmt(row.regret) << ','
                        << row.num_sets << ',' << match_event_name(row.event) << '\n';
                if (idx == 0) {
                    std::lock_guard<std::mutex> lock(meta_mutex);
                    meta["fn"] = fn;
                    meta["n"] = n;
                    meta["p"] = p;
                    meta["reference_bound"] =
                        fn == "and" ? and_regret_bound(n, p) : or_asymptotic_regret(n, p);
                }
            } else {  // chain
                int n = parse_int_field("env.n", var.fields.at("env.n"));
                double p = parse_double_field("env.p", var.fields.at("env.p"));
                auto states = superepoch_chain(n, p, seed);
                csv << "s,x,y\n";
                for (std::size_t s = 0; s < states.size(); ++s)
                    csv << s << ',' << states[s].x << ',' << states[s].y << '\n';
            }
            fs::path file = vdir / ("seed" + std::to_string(seed) + ".csv");
            std::ofstream out(file);
            out << csv.str();
            seed_files[static_cast<std::size_t>(idx)] = file.string();
        };

        parallel_for_seeds(static_cast<int>(seeds.size()), worker_pool_threads(), run_one);

        for (const auto& f : seed_files) outcome.trace_files.push_back(f);
        if (kind == "coop" || kind == "fedexp3" || kind == "fedoco") {
            std::string agg = aggregate_trace_files(seed_files);
            std::ofstream out(vdir / "aggregate.csv");
            out << agg;
            if (svg) {
                PlotSeries series;
                series.label = var.label;
                std::istringstream in(agg);
                std::string line;
                std::getline(in, line);  // header
                while (std::getline(in, line)) {
                    std::istringstream row(line);
                    std::string x, mean;
                    std::getline(row, x, ',');
                    std::getline(row, mean, ',');
                    series.points.push_back({std::stod(x), std::stod(mean)});
                }
                plot_series.push_back(std::move(series));
            }
        }
        std::ofstream meta_out(vdir / "metadata.json");
        meta_out << meta.dump(2) << '\n';
    }

    if (svg && !plot_series.empty()) {
        PlotSpec spec;
        spec.title = cfg.get_or("experiment", "name", kind);
        spec.x_label = "t";
        spec.y_label = "avg regret";
        std::ofstream out(fs::path(out_dir) / "plot.svg");
        out << render_svg(plot_series, spec);
    }
    return outcome;
}

}  // namespace maclab
