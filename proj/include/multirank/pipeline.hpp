#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "multirank/features.hpp"
#include "multirank/loans.hpp"
#include "multirank/propagation.hpp"

namespace multirank {

struct PipelineConfig {
    int window_months = 60;
    int tail_months = 1;
    double r = 0.85;
    double stickiness = 1.0;
    std::vector<Scenario> scenarios{Scenario::intra, Scenario::inter, Scenario::combined};
    RestartMode restart_mode = RestartMode::faithful_matrix;
    bool flat_baseline = true;
    double tolerance = 1e-10;
    int max_iter = 1000;
    std::string output;
    std::uint64_t seed = 1;

    /// Sets one field from its text form. Throws InvalidConfig on unknown keys
    /// or unparsable values.
    void set(std::string_view key, std::string_view value);

    /// Throws InvalidConfig unless r is in [0, 1], stickiness >= 0 and the window is valid.
    void validate() const;
};

inline constexpr std::array<std::string_view, 11> kConfigKeys = {
    "window_months", "tail_months", "r",        "stickiness", "scenarios", "restart_mode",
    "flat_baseline", "tolerance",   "max_iter", "output",     "seed",
};

/// `key = value` lines; `#` starts a comment.
PipelineConfig parse_config(std::istream& in, const std::string& source = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);
std::string format_config(const PipelineConfig& cfg);

/// Every window start from the earliest origination through last - length + 1.
/// Throws SpanTooShort when the data cover fewer months than one window.
std::vector<WindowSpec> rolling_windows(std::span<const LoanRecord> records, int length_months, int tail_months);

struct WindowReport {
    WindowSpec window;
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t defaulters = 0;
    std::size_t rows = 0;
    double component_fraction = 0.0;
    int max_iterations = 0;
    bool converged = true;
    double rank_seconds = 0.0;  // wall time of the scenario ranks
};

struct FeatureTable {
    bool with_aggregate = false;
    std::vector<FeatureRow> rows;  // ordered by (window_start, borrower_id)
    std::vector<WindowReport> windows;
    std::vector<std::string> log;
};

/// Rolling feature extraction. Borrowers whose first loan falls in the first
/// length - tail months of the data are never emitted. Windows are processed
/// by a worker pool capped by MULTIRANK_THREADS; the output does not depend on
/// the pool size.
FeatureTable run_rolling(std::span<const LoanRecord> records, const PipelineConfig& cfg);

/// Features for the tail borrowers of one window, without the early-borrower
/// exclusion that run_rolling applies.
FeatureTable window_features(std::span<const LoanRecord> records, const WindowSpec& window, const PipelineConfig& cfg);

void write_feature_table(std::ostream& out, const FeatureTable& table);

struct SweepRow {
    double r = 0;
    double stickiness = 0;
    std::string feature;
    std::optional<double> auc;  // empty when a class is missing
    std::size_t rows = 0;
};

/// One run_rolling per (r, S) pair, then the univariate AUC of every score
/// feature and of Aggregate.
std::vector<SweepRow> tune_sweep(std::span<const LoanRecord> records, std::span<const double> r_grid,
                                 std::span<const double> s_grid, const PipelineConfig& cfg);

/// AUC rows for one feature table (the inner step of tune_sweep).
std::vector<SweepRow> score_aucs(const FeatureTable& table, double r, double stickiness);

void write_sweep(std::ostream& out, std::span<const SweepRow> rows);

/// Worker count for `jobs` units: MULTIRANK_THREADS if set and positive,
/// otherwise the hardware concurrency, never more than jobs.
std::size_t worker_count(std::size_t jobs);

}  // namespace multirank
