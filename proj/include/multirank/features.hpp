#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "multirank/loans.hpp"
#include "multirank/propagation.hpp"

namespace multirank {

inline constexpr std::size_t kNumDegreeFeatures = 20;
inline constexpr std::size_t kNumScoreFeatures = 12;

/// Families Prod, Dist, Area, ProdDist, ProdArea; each as 1, 1_DF, 5, 5_DF.
inline constexpr std::array<std::string_view, kNumDegreeFeatures> kDegreeNames = {
    "ProdDegree1",     "ProdDegree1_DF",     "ProdDegree5",     "ProdDegree5_DF",
    "DistDegree1",     "DistDegree1_DF",     "DistDegree5",     "DistDegree5_DF",
    "AreaDegree1",     "AreaDegree1_DF",     "AreaDegree5",     "AreaDegree5_DF",
    "ProdDistDegree1", "ProdDistDegree1_DF", "ProdDistDegree5", "ProdDistDegree5_DF",
    "ProdAreaDegree1", "ProdAreaDegree1_DF", "ProdAreaDegree5", "ProdAreaDegree5_DF",
};

/// Own score per scenario, then the best product, district and area neighbour
/// per scenario.
inline constexpr std::array<std::string_view, kNumScoreFeatures> kScoreNames = {
    "Bipart_intra",
    "Bipart_inter",
    "Bipart_combined",
    "Bipart_product_intra_max",
    "Bipart_product_inter_max",
    "Bipart_product_combined_max",
    "Bipart_district_intra_max",
    "Bipart_district_inter_max",
    "Bipart_district_combined_max",
    "Bipart_area_intra_max",
    "Bipart_area_inter_max",
    "Bipart_area_combined_max",
};

inline constexpr std::string_view kAggregateName = "Aggregate";

using DegreeCounts = std::array<std::int64_t, kNumDegreeFeatures>;

struct FeatureRow {
    Month window_start;
    std::string borrower_id;
    DegreeCounts degrees{};
    std::array<std::optional<double>, kNumScoreFeatures> scores{};
    std::optional<double> aggregate;
    bool label = false;
};

/// Output header: window_start, borrower_id, the 32 features, Aggregate when
/// enabled, label.
std::vector<std::string> feature_columns(bool with_aggregate);

/// Values print with 17 significant digits; a missing score is an empty field.
std::string format_row(const FeatureRow& row, bool with_aggregate);

/// Precomputed lookups for one window so degree counts for many borrowers stay
/// cheap. Neighbours count distinct borrowers other than the focal one; the
/// focal borrower's products, district and area come from all of its loans in
/// the window, neighbours' loans must fall in the last 12 or 60 months before
/// the window end.
class WindowIndex {
public:
    WindowIndex(std::span<const LoanRecord> records, const WindowSpec& window);

    const WindowSpec& window() const { return window_; }
    bool in_tail(const std::string& borrower) const;
    bool is_defaulter(const std::string& borrower) const;
    std::size_t num_defaulters() const;

    /// Throws BorrowerNotInTail unless the borrower originates in the tail.
    DegreeCounts degrees(const std::string& borrower) const;

private:
    struct Tie {
        std::uint32_t borrower;
        Month last;  // latest origination of a loan carrying the value
    };

    WindowSpec window_;
    std::unordered_map<std::string, std::uint32_t> borrower_index_;
    std::vector<bool> defaulter_;
    std::vector<bool> tail_;
    std::array<std::vector<std::vector<Tie>>, 3> ties_;                     // kind -> value -> ties
    std::array<std::vector<std::vector<std::uint32_t>>, 3> values_of_;      // kind -> borrower -> values
    mutable std::vector<std::uint8_t> marks_;
    mutable std::vector<std::uint32_t> touched_;
};

/// Degree counts for one tail borrower. Builds a WindowIndex, so prefer the
/// index when scoring a whole tail.
DegreeCounts degree_features(std::span<const LoanRecord> records, const WindowSpec& window,
                             const std::string& borrower);

/// Ranks indexed by Scenario.
using ScenarioRuns = std::array<std::optional<RankResult<double>>, 3>;

/// Own omega followed by the maximum omega over product, district and area
/// neighbours, for one scenario run.
std::array<double, 4> scenario_scores(const MultilayerNetwork& net, const RankResult<double>& run,
                                      const std::string& borrower);

/// The 12 score features in kScoreNames order. Throws MissingScenarioRun if a
/// scenario has no run or the borrower is not a common node.
std::array<double, kNumScoreFeatures> score_features(const MultilayerNetwork& net, const ScenarioRuns& runs,
                                                     const std::string& borrower);

/// Pearson correlation over rows where both values are present (not NaN). NaN
/// when fewer than two such rows or either side is constant on them.
double pairwise_correlation(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y);

struct PruneResult {
    std::vector<std::string> retained;  // table order, target included
    std::vector<std::string> dropped;
    std::vector<std::string> log;
};

/// Greedy pruning: constant columns go first; then pairs with |corr| above the
/// cutoff are visited by descending |corr| (ties by name) and the member less
/// correlated with the target is dropped (ties drop the larger name). The target
/// column is never dropped.
PruneResult correlation_prune(const Eigen::MatrixXd& table, std::span<const std::string> names,
                              std::string_view target, double cutoff = 0.70);

/// Rank AUC with ties counted one half. NaN scores are skipped. Throws
/// DegenerateLabels when either class is empty.
double univariate_auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

}  // namespace multirank
