#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "multirank/error.hpp"
#include "multirank/features.hpp"
#include "multirank/loans.hpp"
#include "multirank/network.hpp"
#include "multirank/pipeline.hpp"
#include "multirank/propagation.hpp"
#include "multirank/supra.hpp"
#include "multirank/synth.hpp"

namespace multirank::cli {

namespace {

std::string number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return in;
}

void finish_file(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

/// Edge list with header `common,specific[,weight]`.
std::vector<EdgeSpec> read_edges(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::string line;
    std::size_t line_no = 0;
    auto where = [&] { return path.string() + ":" + std::to_string(line_no); };
    if (!std::getline(in, line)) throw Error(Errc::MissingColumn, path.string() + ": empty edge file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "common,specific" && line != "common,specific,weight")
        throw Error(Errc::MissingColumn, where() + ": header must be common,specific[,weight]");
    std::vector<EdgeSpec> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() < 2 || f.size() > 3) throw Error(Errc::BadRecord, where() + ": expected 2 or 3 fields");
        EdgeSpec e{f[0], f[1], 1.0};
        if (f.size() == 3) {
            try {
                std::size_t used = 0;
                e.weight = std::stod(f[2], &used);
                if (used != f[2].size()) throw std::invalid_argument(f[2]);
            } catch (const std::exception&) {
                throw Error(Errc::BadRecord, where() + ": weight '" + f[2] + "' is not a number");
            }
        }
        edges.push_back(std::move(e));
    }
    return edges;
}

void write_edges(const std::filesystem::path& path, const LayerSpec& layer) {
    auto out = open_out(path);
    out << "common,specific,weight\n";
    for (const auto& e : layer.edges) out << e.common << ',' << e.specific << ',' << number(e.weight) << '\n';
    finish_file(out, path);
}

std::vector<std::string> read_ids(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::vector<std::string> ids;
    for (std::string line; std::getline(in, line);) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.erase(0, 1);
        if (!line.empty()) ids.push_back(line);
    }
    return ids;
}

std::vector<LayerSpec> read_layers(const std::vector<std::string>& specs) {
    std::vector<LayerSpec> layers;
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
            throw Error(Errc::InvalidConfig, "--layer expects name=path, got '" + spec + "'");
        layers.push_back(LayerSpec::from_edges(spec.substr(0, eq), read_edges(spec.substr(eq + 1))));
    }
    return layers;
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string cell; std::getline(ss, cell, ',');) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw Error(Errc::InvalidConfig, "bad grid value '" + cell + "'");
        }
    }
    return out;
}

/// Shared option storage; lives as long as the App via the callbacks.
struct State {
    // generate
    SynthConfig synth;
    std::string synth_out;
    // shared inputs
    std::string loans, config, out, window_start, log_path, states_out;
    int window_months = 60;
    int tail_months = 1;
    std::vector<std::string> layers, sources;
    std::string sources_file;
    std::map<std::string, std::string> overrides;  // config key -> text
    // rank
    std::string scenario = "combined";
    std::string restart_mode = "faithful_matrix";
    double r = 0.85, stickiness = 1.0, tolerance = 1e-10;
    int max_iter = 1000;
    // sweep
    std::string r_grid = "0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.85,0.95";
    std::string s_grid = "1";
};

void add_overrides(CLI::App* sub, State& st) {
    sub->add_option("--config", st.config, "Key-value config file; flags below override it");
    sub->add_option("--r", st.overrides["r"], "Damping factor r in [0, 1] (default 0.85)");
    sub->add_option("--stickiness", st.overrides["stickiness"], "Inter-layer stickiness S >= 0 (default 1)");
    sub->add_option("--window-months", st.overrides["window_months"], "Window length in months (default 60)");
    sub->add_option("--tail-months", st.overrides["tail_months"], "Scoring tail in months (default 1)");
    sub->add_option("--scenarios", st.overrides["scenarios"], "Comma list of intra, inter, combined");
    sub->add_option("--restart-mode", st.overrides["restart_mode"], "faithful_matrix or collapsed_vector");
    sub->add_option("--flat-baseline", st.overrides["flat_baseline"], "true/false: emit the Aggregate column");
    sub->add_option("--tolerance", st.overrides["tolerance"], "L1 stopping tolerance (default 1e-10)");
    sub->add_option("--max-iter", st.overrides["max_iter"], "Iteration cap per rank (default 1000)");
}

PipelineConfig resolve_config(const State& st) {
    PipelineConfig cfg = st.config.empty() ? PipelineConfig{} : load_config(st.config);
    for (const auto& [key, value] : st.overrides)
        if (!value.empty()) cfg.set(key, value);
    if (!st.out.empty()) cfg.output = st.out;
    cfg.validate();
    return cfg;
}

WindowSpec resolve_window(const State& st, const std::vector<LoanRecord>& recs, int length, int tail) {
    if (st.window_start.empty()) return rolling_windows(recs, length, tail).back();
    const auto m = parse_month(st.window_start);
    if (!m) throw Error(Errc::BadDate, "--window-start '" + st.window_start + "' is not YYYY-MM");
    WindowSpec w{*m, length, tail};
    w.validate();
    return w;
}

template <typename Fn>
void to_file_or(std::ostream& fallback, const std::string& path, Fn&& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    auto out = open_out(path);
    write(out);
    finish_file(out, path);
}

void emit_log(const std::vector<std::string>& log, const std::string& path, std::ostream& err) {
    if (path.empty()) {
        for (const auto& l : log) err << l << '\n';
        return;
    }
    auto out = open_out(path);
    for (const auto& l : log) out << l << '\n';
    finish_file(out, path);
}

}  // namespace

std::unique_ptr<CLI::App> make_app(Streams io) {
    auto app = std::make_unique<CLI::App>("Multilayer personalized PageRank for credit-risk networks", "multirank");
    app->require_subcommand(1);
    auto st = std::make_shared<State>();

    // generate
    auto* gen = app->add_subcommand("generate", "Write a synthetic loan book with planted default clustering");
    gen->add_option("--out", st->synth_out, "Output loan CSV")->required();
    gen->add_option("--borrowers", st->synth.n_borrowers, "Number of borrowers");
    gen->add_option("--products", st->synth.n_products, "Number of products");
    gen->add_option("--districts", st->synth.n_districts, "Number of districts");
    gen->add_option("--areas-per-district", st->synth.areas_per_district, "Areas nested in each district");
    gen->add_option("--months", st->synth.months, "Months of originations");
    gen->add_option("--base-rate", st->synth.base_default_rate, "Monthly default hazard outside shocks");
    gen->add_option("--area-shock", st->synth.area_shock_strength, "Hazard multiplier minus one in shocked areas");
    gen->add_option("--product-shock", st->synth.product_shock_strength,
                    "Hazard multiplier minus one for shocked products");
    gen->add_option("--seed", st->synth.seed, "Random seed");
    gen->add_option("--loans-per-borrower", st->synth.loans_per_borrower, "Loans per borrower, distinct months");
    gen->add_option("--term", st->synth.term_months, "Months at risk after origination");
    gen->add_option("--shock-rate", st->synth.shock_start_rate, "Chance per entity-month that a shock starts");
    gen->add_option("--shock-duration", st->synth.shock_duration, "Shock episode length in months");
    gen->callback([st, io] {
        const auto recs = synth_generate(st->synth);
        auto out = open_out(st->synth_out);
        write_loans(out, recs);
        finish_file(out, st->synth_out);
        std::size_t defaults = 0;
        for (const auto& r : recs) defaults += r.defaulted;
        io.out << "loans=" << recs.size() << " defaults=" << defaults << " output=" << st->synth_out << '\n';
    });

    // build
    auto* build = app->add_subcommand("build", "Write one window's layer edge lists and defaulter set");
    build->add_option("--loans", st->loans, "Loan CSV")->required();
    build->add_option("--out-dir", st->out, "Directory for product.csv, geography.csv, sources.txt")->required();
    build->add_option("--window-start", st->window_start, "First month YYYY-MM (default: the latest window)");
    build->add_option("--window-months", st->window_months, "Window length in months");
    build->add_option("--tail-months", st->tail_months, "Scoring tail in months");
    build->callback([st, io] {
        const auto recs = read_loans(st->loans);
        const auto w = resolve_window(*st, recs, st->window_months, st->tail_months);
        const auto layers = window_layers(recs, w);
        std::filesystem::create_directories(st->out);
        for (const auto& layer : layers) write_edges(std::filesystem::path(st->out) / (layer.name + ".csv"), layer);
        const auto sources = defaulter_set(recs, w);
        const auto path = std::filesystem::path(st->out) / "sources.txt";
        auto out = open_out(path);
        for (const auto& s : sources) out << s << '\n';
        finish_file(out, path);
        io.out << "window=" << to_string(w.start) << " layers=" << layers.size() << " sources=" << sources.size()
               << '\n';
    });

    // rank
    auto* rank = app->add_subcommand("rank", "Personalized multilayer PageRank over edge-list layers");
    rank->add_option("--layer", st->layers, "Layer as name=path to a common,specific[,weight] CSV; repeatable")
        ->required();
    rank->add_option("--source", st->sources, "Source (defaulter) node id; repeatable");
    rank->add_option("--sources", st->sources_file, "File with one source id per line");
    rank->add_option("--scenario", st->scenario, "intra, inter or combined");
    rank->add_option("--restart-mode", st->restart_mode, "faithful_matrix or collapsed_vector");
    rank->add_option("--r", st->r, "Damping factor r in [0, 1]");
    rank->add_option("--stickiness", st->stickiness, "Inter-layer stickiness S >= 0");
    rank->add_option("--tolerance", st->tolerance, "L1 stopping tolerance");
    rank->add_option("--max-iter", st->max_iter, "Iteration cap");
    rank->add_option("--out", st->out, "node_id,score CSV (default: stdout)");
    rank->add_option("--states-out", st->states_out, "node_id,layer,score CSV of per-state scores");
    rank->callback([st, io] {
        const auto net = build_network(read_layers(st->layers), st->stickiness);
        InfluenceSpec spec{st->sources, parse_scenario(st->scenario), parse_restart_mode(st->restart_mode)};
        if (!st->sources_file.empty())
            for (auto& id : read_ids(st->sources_file)) spec.sources.push_back(std::move(id));
        RankOptions<double> opt;
        opt.damping = st->r;
        opt.tolerance = st->tolerance;
        opt.max_iter = st->max_iter;
        opt.restart_mode = spec.restart_mode;
        const auto t = supra_transition(supra_adjacency(net));
        const auto res = personalized_pagerank(t, build_influence_matrix<double>(net, spec), opt);
        to_file_or(io.out, st->out, [&](std::ostream& out) {
            out << "node_id,score\n";
            for (std::size_t i = 0; i < net.num_nodes(); ++i)
                out << net.node(i).id << ',' << number(res.per_node[static_cast<Eigen::Index>(i)]) << '\n';
        });
        if (!st->states_out.empty()) {
            auto out = open_out(st->states_out);
            out << "node_id,layer,score\n";
            for (std::size_t a = 0; a < net.num_layers(); ++a)
                for (std::size_t i = 0; i < net.num_nodes(); ++i)
                    out << net.node(i).id << ',' << net.layer(a).name << ','
                        << number(res.per_state[static_cast<Eigen::Index>(a * net.num_nodes() + i)]) << '\n';
            finish_file(out, st->states_out);
        }
        io.err << "iterations=" << res.iterations << " residual=" << number(res.residual)
               << " converged=" << (res.converged ? "true" : "false") << '\n';
    });

    // features
    auto* feat = app->add_subcommand("features", "Feature rows for the tail borrowers of one window");
    feat->add_option("--loans", st->loans, "Loan CSV")->required();
    feat->add_option("--out", st->out, "Feature CSV (default: stdout)");
    feat->add_option("--window-start", st->window_start, "First month YYYY-MM (default: the latest window)");
    feat->add_option("--log", st->log_path, "Write log lines here instead of stderr");
    add_overrides(feat, *st);
    feat->callback([st, io] {
        const auto cfg = resolve_config(*st);
        const auto recs = read_loans(st->loans);
        const auto w = resolve_window(*st, recs, cfg.window_months, cfg.tail_months);
        const auto table = window_features(recs, w, cfg);
        to_file_or(io.out, st->out, [&](std::ostream& out) { write_feature_table(out, table); });
        emit_log(table.log, st->log_path, io.err);
    });

    // pipeline
    auto* pipe = app->add_subcommand("pipeline", "Rolling windows over a loan book into one feature table");
    pipe->add_option("--loans", st->loans, "Loan CSV")->required();
    pipe->add_option("--out", st->out, "Feature CSV (overrides the config output key)");
    pipe->add_option("--log", st->log_path, "Write log lines here instead of stderr");
    add_overrides(pipe, *st);
    pipe->callback([st, io] {
        const auto cfg = resolve_config(*st);
        if (cfg.output.empty()) throw Error(Errc::InvalidConfig, "no output path: pass --out or set output in the config");
        const auto recs = read_loans(st->loans);
        const auto table = run_rolling(recs, cfg);
        auto out = open_out(cfg.output);
        write_feature_table(out, table);
        finish_file(out, cfg.output);
        emit_log(table.log, st->log_path, io.err);
        std::size_t unconverged = 0;
        for (const auto& w : table.windows) unconverged += !w.converged;
        io.out << "windows=" << table.windows.size() << " rows=" << table.rows.size()
               << " unconverged_windows=" << unconverged << " output=" << cfg.output << '\n';
    });

    // sweep
    auto* sweep = app->add_subcommand("sweep", "Univariate AUC of each score feature over an r and S grid");
    sweep->add_option("--loans", st->loans, "Loan CSV")->required();
    sweep->add_option("--out", st->out, "Sweep CSV (default: stdout)");
    sweep->add_option("--r-grid", st->r_grid, "Comma list of r values")->capture_default_str();
    sweep->add_option("--s-grid", st->s_grid, "Comma list of stickiness values")->capture_default_str();
    add_overrides(sweep, *st);
    sweep->callback([st, io] {
        auto cfg_state = *st;
        cfg_state.out.clear();
        const auto cfg = resolve_config(cfg_state);
        const auto recs = read_loans(st->loans);
        const auto rows = tune_sweep(recs, parse_grid(st->r_grid), parse_grid(st->s_grid), cfg);
        to_file_or(io.out, st->out, [&](std::ostream& out) { write_sweep(out, rows); });
    });

    // inspect
    auto* inspect = app->add_subcommand("inspect", "Print size and connectivity of a network");
    inspect->add_option("--layer", st->layers, "Layer as name=path; repeatable");
    inspect->add_option("--loans", st->loans, "Loan CSV, inspected as one window");
    inspect->add_option("--window-start", st->window_start, "First month YYYY-MM (default: the latest window)");
    inspect->add_option("--window-months", st->window_months, "Window length in months");
    inspect->add_option("--tail-months", st->tail_months, "Scoring tail in months");
    inspect->add_option("--stickiness", st->stickiness, "Inter-layer stickiness S >= 0");
    inspect->callback([st, io] {
        if (st->layers.empty() == st->loans.empty())
            throw Error(Errc::InvalidConfig, "inspect needs either --layer or --loans");
        MultilayerNetwork net;
        if (!st->layers.empty()) {
            net = build_network(read_layers(st->layers), st->stickiness);
        } else {
            const auto recs = read_loans(st->loans);
            const auto w = resolve_window(*st, recs, st->window_months, st->tail_months);
            net = build_window_network(recs, w, st->stickiness);
            io.out << "window " << to_string(w.start) << '\n';
        }
        io.out << "nodes " << net.num_nodes() << '\n';
        io.out << "common " << net.num_common() << '\n';
        io.out << "layers " << net.num_layers() << '\n';
        for (const auto& layer : net.layers())
            io.out << "layer " << layer.name << " edges " << layer.edges.size() << '\n';
        io.out << "largest_component_fraction " << number(largest_component_fraction(net)) << '\n';
    });
    return app;
}

int run(const std::vector<std::string>& args, Streams io) {
    auto app = make_app(io);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app->parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app->exit(e, io.out, io.err);
        return code == 0 ? kOk : kValidation;
    } catch (const IoError& e) {
        io.err << "error: " << e.what() << '\n';
        return kIo;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        io.err << "error: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}

}  // namespace multirank::cli
