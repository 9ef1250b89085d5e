#include "multirank/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "multirank/error.hpp"
#include "multirank/supra.hpp"

namespace multirank {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw Error(Errc::InvalidConfig, "bad value '" + std::string(value) + "' for " + std::string(key));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size()) bad_value(key, value);
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    bad_value(key, value);
}

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "window_months")
        window_months = parse_number<int>(key, value);
    else if (key == "tail_months")
        tail_months = parse_number<int>(key, value);
    else if (key == "r")
        r = parse_number<double>(key, value);
    else if (key == "stickiness")
        stickiness = parse_number<double>(key, value);
    else if (key == "scenarios") {
        scenarios.clear();
        std::size_t pos = 0;
        while (pos <= value.size()) {
            const auto next = std::min(value.find(',', pos), value.size());
            const auto item = trim(value.substr(pos, next - pos));
            if (!item.empty()) {
                const auto s = parse_scenario(item);
                if (std::find(scenarios.begin(), scenarios.end(), s) == scenarios.end()) scenarios.push_back(s);
            }
            pos = next + 1;
        }
        std::sort(scenarios.begin(), scenarios.end());
    } else if (key == "restart_mode")
        restart_mode = parse_restart_mode(value);
    else if (key == "flat_baseline")
        flat_baseline = parse_bool(key, value);
    else if (key == "tolerance")
        tolerance = parse_number<double>(key, value);
    else if (key == "max_iter")
        max_iter = parse_number<int>(key, value);
    else if (key == "output")
        output = value;
    else if (key == "seed")
        seed = parse_number<std::uint64_t>(key, value);
    else
        throw Error(Errc::InvalidConfig, "unknown config key '" + std::string(key) + "'");
}

void PipelineConfig::validate() const {
    if (!(r >= 0 && r <= 1)) throw Error(Errc::InvalidConfig, "r must lie in [0, 1], got " + number(r));
    if (!(stickiness >= 0 && stickiness < INFINITY))
        throw Error(Errc::InvalidConfig, "stickiness must be finite and >= 0, got " + number(stickiness));
    if (!(tolerance > 0)) throw Error(Errc::InvalidConfig, "tolerance must be positive");
    if (max_iter <= 0) throw Error(Errc::InvalidConfig, "max_iter must be positive");
    WindowSpec{Month{}, window_months, tail_months}.validate();
}

PipelineConfig parse_config(std::istream& in, const std::string& source) {
    PipelineConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        text = trim(text.substr(0, text.find('#')));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::InvalidConfig, source + ":" + std::to_string(line_no) + ": expected key = value");
        try {
            cfg.set(trim(text.substr(0, eq)), text.substr(eq + 1));
        } catch (const Error& e) {
            throw Error(Errc::InvalidConfig, source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.string());
}

std::string format_config(const PipelineConfig& cfg) {
    std::string scen;
    for (auto s : cfg.scenarios) scen += (scen.empty() ? "" : ",") + std::string(to_string(s));
    std::string out;
    out += "window_months = " + std::to_string(cfg.window_months) + "\n";
    out += "tail_months = " + std::to_string(cfg.tail_months) + "\n";
    out += "r = " + number(cfg.r) + "\n";
    out += "stickiness = " + number(cfg.stickiness) + "\n";
    out += "scenarios = " + scen + "\n";
    out += "restart_mode = " + std::string(to_string(cfg.restart_mode)) + "\n";
    out += std::string("flat_baseline = ") + (cfg.flat_baseline ? "true" : "false") + "\n";
    out += "tolerance = " + number(cfg.tolerance) + "\n";
    out += "max_iter = " + std::to_string(cfg.max_iter) + "\n";
    out += "output = " + cfg.output + "\n";
    out += "seed = " + std::to_string(cfg.seed) + "\n";
    return out;
}

std::vector<WindowSpec> rolling_windows(std::span<const LoanRecord> records, int length_months, int tail_months) {
    WindowSpec{Month{}, length_months, tail_months}.validate();
    if (records.empty()) throw Error(Errc::SpanTooShort, "no loan records");
    const auto [lo, hi] = std::minmax_element(records.begin(), records.end(), [](const auto& a, const auto& b) {
        return a.origination < b.origination;
    });
    const Month first = lo->origination, last = hi->origination;
    const int span = last - first + 1;
    if (span < length_months)
        throw Error(Errc::SpanTooShort, "data cover " + std::to_string(span) + " months, window needs " +
                                            std::to_string(length_months));
    std::vector<WindowSpec> out;
    for (Month s = first; s <= last - length_months + 1; s = s + 1) out.push_back({s, length_months, tail_months});
    return out;
}

std::size_t worker_count(std::size_t jobs) {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MULTIRANK_THREADS")) {
        const std::string_view text = env;
        std::size_t v = 0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && end == text.data() + text.size() && v > 0) n = v;
    }
    return std::max<std::size_t>(1, std::min(n, jobs));
}

namespace {

struct WindowOutcome {
    WindowReport report;
    std::vector<FeatureRow> rows;
    std::vector<std::string> log;
};

WindowOutcome process_window(std::span<const LoanRecord> loans, const WindowSpec& w, const PipelineConfig& cfg,
                             const std::unordered_set<std::string>& excluded) {
    WindowOutcome out;
    out.report.window = w;
    const std::string tag = "window " + to_string(w.start) + ": ";

    const auto net = build_window_network(loans, w, cfg.stickiness);
    out.report.nodes = net.num_nodes();
    out.report.edges = net.num_edges();
    const auto sources = defaulter_set(loans, w);
    out.report.defaulters = sources.size();

    std::unordered_map<std::string, bool> label;
    for (const auto& r : loans)
        if (w.in_tail(r.origination) && !excluded.count(r.borrower_id)) label[r.borrower_id] |= r.defaulted;
    std::vector<std::string> tail;
    tail.reserve(label.size());
    for (const auto& [b, _] : label) tail.push_back(b);
    std::sort(tail.begin(), tail.end());
    out.report.rows = tail.size();
    if (tail.empty()) {
        out.log.push_back(tag + "no eligible tail borrowers");
        return out;
    }

    out.report.component_fraction = largest_component_fraction(net);
    if (out.report.component_fraction < 0.995)
        out.log.push_back(tag + "largest component covers " + number(out.report.component_fraction) + " of nodes");

    ScenarioRuns runs;
    std::optional<RankResult<double>> flat;
    RankOptions<double> opt;
    opt.damping = cfg.r;
    opt.tolerance = cfg.tolerance;
    opt.max_iter = cfg.max_iter;
    opt.restart_mode = cfg.restart_mode;
    if (sources.empty()) {
        out.log.push_back(tag + "empty defaulter set, score features left empty");
    } else {
        const auto t = supra_transition(supra_adjacency(net));
        const auto started = std::chrono::steady_clock::now();
        for (auto s : cfg.scenarios) {
            const auto u = build_influence_matrix<double>(net, {sources, s, cfg.restart_mode});
            auto res = personalized_pagerank(t, u, opt);
            out.report.max_iterations = std::max(out.report.max_iterations, res.iterations);
            if (!res.converged) {
                out.report.converged = false;
                out.log.push_back(tag + std::string(to_string(s)) + " rank stopped at max_iter with residual " +
                                  number(res.residual));
            }
            runs[static_cast<std::size_t>(s)] = std::move(res);
        }
        out.report.rank_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        if (cfg.flat_baseline) {
            flat = flat_personalized_pagerank<double>(net, sources, opt);
            if (!flat->converged) out.log.push_back(tag + "flat baseline stopped at max_iter");
        }
    }

    const WindowIndex index(loans, w);
    out.rows.reserve(tail.size());
    for (const auto& b : tail) {
        FeatureRow row;
        row.window_start = w.start;
        row.borrower_id = b;
        row.degrees = index.degrees(b);
        for (std::size_t s = 0; s < 3; ++s) {
            if (!runs[s]) continue;
            const auto sc = scenario_scores(net, *runs[s], b);
            row.scores[s] = sc[0];
            for (std::size_t k = 0; k < 3; ++k) row.scores[3 + 3 * k + s] = sc[k + 1];
        }
        if (flat) row.aggregate = flat->per_node[static_cast<Eigen::Index>(*net.index_of(b))];
        row.label = label.at(b);
        out.rows.push_back(std::move(row));
    }
    return out;
}

}  // namespace

FeatureTable run_rolling(std::span<const LoanRecord> records, const PipelineConfig& cfg) {
    cfg.validate();
    const auto windows = rolling_windows(records, cfg.window_months, cfg.tail_months);

    std::vector<LoanRecord> sorted(records.begin(), records.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const LoanRecord& a, const LoanRecord& b) { return a.origination < b.origination; });
    const Month cutoff = sorted.front().origination + (cfg.window_months - cfg.tail_months);
    std::unordered_set<std::string> excluded;
    for (const auto& r : sorted)
        if (r.origination < cutoff) excluded.insert(r.borrower_id);

    std::vector<WindowOutcome> outcomes(windows.size());
    std::vector<std::exception_ptr> errors(windows.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < windows.size();) {
            try {
                const auto& w = windows[k];
                auto by_month = [](const LoanRecord& r, Month m) { return r.origination < m; };
                const auto lo = std::lower_bound(sorted.begin(), sorted.end(), w.start, by_month);
                const auto hi = std::lower_bound(lo, sorted.end(), w.end(), by_month);
                outcomes[k] = process_window(std::span<const LoanRecord>(lo, hi), w, cfg, excluded);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    const std::size_t workers = worker_count(windows.size());
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    FeatureTable table;
    table.with_aggregate = cfg.flat_baseline;
    for (auto& o : outcomes) {
        table.windows.push_back(o.report);
        std::move(o.rows.begin(), o.rows.end(), std::back_inserter(table.rows));
        std::move(o.log.begin(), o.log.end(), std::back_inserter(table.log));
    }
    return table;
}

FeatureTable window_features(std::span<const LoanRecord> records, const WindowSpec& window, const PipelineConfig& cfg) {
    cfg.validate();
    window.validate();
    std::vector<LoanRecord> inside;
    for (const auto& r : records)
        if (window.contains(r.origination)) inside.push_back(r);
    auto outcome = process_window(inside, window, cfg, {});
    FeatureTable table;
    table.with_aggregate = cfg.flat_baseline;
    table.rows = std::move(outcome.rows);
    table.windows.push_back(outcome.report);
    table.log = std::move(outcome.log);
    return table;
}

void write_feature_table(std::ostream& out, const FeatureTable& table) {
    const auto cols = feature_columns(table.with_aggregate);
    for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
    out << '\n';
    for (const auto& row : table.rows) out << format_row(row, table.with_aggregate) << '\n';
}

std::vector<SweepRow> score_aucs(const FeatureTable& table, double r, double stickiness) {
    std::vector<SweepRow> out;
    const std::size_t features = kNumScoreFeatures + (table.with_aggregate ? 1 : 0);
    for (std::size_t f = 0; f < features; ++f) {
        std::vector<double> scores;
        std::vector<std::uint8_t> labels;
        for (const auto& row : table.rows) {
            const auto& v = f < kNumScoreFeatures ? row.scores[f] : row.aggregate;
            if (!v) continue;
            scores.push_back(*v);
            labels.push_back(row.label);
        }
        SweepRow sr{r, stickiness, std::string(f < kNumScoreFeatures ? kScoreNames[f] : kAggregateName), {},
                    scores.size()};
        const auto pos = std::count(labels.begin(), labels.end(), 1);
        if (pos > 0 && pos < static_cast<std::ptrdiff_t>(labels.size())) sr.auc = univariate_auc(scores, labels);
        out.push_back(std::move(sr));
    }
    return out;
}

std::vector<SweepRow> tune_sweep(std::span<const LoanRecord> records, std::span<const double> r_grid,
                                 std::span<const double> s_grid, const PipelineConfig& cfg) {
    if (r_grid.empty() || s_grid.empty()) throw Error(Errc::InvalidConfig, "sweep grids must be nonempty");
    std::vector<SweepRow> out;
    for (double s : s_grid)
        for (double r : r_grid) {
            PipelineConfig c = cfg;
            c.r = r;
            c.stickiness = s;
            const auto rows = score_aucs(run_rolling(records, c), r, s);
            out.insert(out.end(), rows.begin(), rows.end());
        }
    return out;
}

void write_sweep(std::ostream& out, std::span<const SweepRow> rows) {
    out << "r,stickiness,feature,auc,rows\n";
    for (const auto& row : rows)
        out << number(row.r) << ',' << number(row.stickiness) << ',' << row.feature << ','
            << (row.auc ? number(*row.auc) : std::string()) << ',' << row.rows << '\n';
}

}  // namespace multirank
