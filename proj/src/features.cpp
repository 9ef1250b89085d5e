#include "multirank/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <tuple>

#include "multirank/error.hpp"

namespace multirank {

std::vector<std::string> feature_columns(bool with_aggregate) {
    std::vector<std::string> cols{"window_start", "borrower_id"};
    for (auto n : kDegreeNames) cols.emplace_back(n);
    for (auto n : kScoreNames) cols.emplace_back(n);
    if (with_aggregate) cols.emplace_back(kAggregateName);
    cols.emplace_back("label");
    return cols;
}

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out += buf;
}

}  // namespace

std::string format_row(const FeatureRow& row, bool with_aggregate) {
    std::string out = to_string(row.window_start);
    out += ',';
    out += row.borrower_id;
    for (auto d : row.degrees) {
        out += ',';
        out += std::to_string(d);
    }
    for (const auto& s : row.scores) {
        out += ',';
        if (s) append_number(out, *s);
    }
    if (with_aggregate) {
        out += ',';
        if (row.aggregate) append_number(out, *row.aggregate);
    }
    out += row.label ? ",1" : ",0";
    return out;
}

WindowIndex::WindowIndex(std::span<const LoanRecord> records, const WindowSpec& window) : window_(window) {
    window.validate();
    std::array<std::unordered_map<std::string, std::uint32_t>, 3> value_index;
    std::array<std::vector<std::tuple<std::uint32_t, std::uint32_t, int>>, 3> raw;  // value, borrower, month

    auto intern = [](std::unordered_map<std::string, std::uint32_t>& map, const std::string& key) {
        return map.emplace(key, static_cast<std::uint32_t>(map.size())).first->second;
    };
    for (const auto& r : records) {
        if (!window.contains(r.origination)) continue;
        const auto b = intern(borrower_index_, r.borrower_id);
        if (b == tail_.size()) tail_.push_back(false);
        if (window.in_tail(r.origination)) tail_[b] = true;
        for (const auto& p : r.products) raw[0].emplace_back(intern(value_index[0], p), b, r.origination.value);
        raw[1].emplace_back(intern(value_index[1], r.district), b, r.origination.value);
        raw[2].emplace_back(intern(value_index[2], r.area), b, r.origination.value);
    }

    const std::size_t borrowers = borrower_index_.size();
    defaulter_.assign(borrowers, false);
    for (const auto& id : defaulter_set(records, window)) defaulter_[borrower_index_.at(id)] = true;

    for (std::size_t k = 0; k < 3; ++k) {
        auto& triples = raw[k];
        std::sort(triples.begin(), triples.end());
        ties_[k].assign(value_index[k].size(), {});
        values_of_[k].assign(borrowers, {});
        for (std::size_t i = 0; i < triples.size();) {
            const auto [v, b, m] = triples[i];
            std::size_t j = i;
            while (j + 1 < triples.size() && std::get<0>(triples[j + 1]) == v && std::get<1>(triples[j + 1]) == b) ++j;
            ties_[k][v].push_back({b, Month{std::get<2>(triples[j])}});
            values_of_[k][b].push_back(v);
            i = j + 1;
        }
    }
    marks_.assign(borrowers, 0);
}

bool WindowIndex::in_tail(const std::string& borrower) const {
    auto it = borrower_index_.find(borrower);
    return it != borrower_index_.end() && tail_[it->second];
}

bool WindowIndex::is_defaulter(const std::string& borrower) const {
    auto it = borrower_index_.find(borrower);
    return it != borrower_index_.end() && defaulter_[it->second];
}

std::size_t WindowIndex::num_defaulters() const {
    return static_cast<std::size_t>(std::count(defaulter_.begin(), defaulter_.end(), true));
}

DegreeCounts WindowIndex::degrees(const std::string& borrower) const {
    auto found = borrower_index_.find(borrower);
    if (found == borrower_index_.end() || !tail_[found->second])
        throw Error(Errc::BorrowerNotInTail, "borrower '" + borrower + "' has no loan in the tail of window " +
                                                 to_string(window_.start));
    const std::uint32_t focal = found->second;
    const Month h1 = std::max(window_.start, window_.end() - 12);
    const Month h5 = std::max(window_.start, window_.end() - 60);

    // bit 2k: shares kind k within 1 year; bit 2k+1: within 5 years
    for (std::size_t k = 0; k < 3; ++k)
        for (auto v : values_of_[k][focal])
            for (const auto& t : ties_[k][v]) {
                if (t.borrower == focal) continue;
                std::uint8_t bits = 0;
                if (t.last >= h1) bits |= std::uint8_t(1u << (2 * k));
                if (t.last >= h5) bits |= std::uint8_t(1u << (2 * k + 1));
                if (!bits) continue;
                if (!marks_[t.borrower]) touched_.push_back(t.borrower);
                marks_[t.borrower] |= bits;
            }

    DegreeCounts out{};
    for (auto b : touched_) {
        const std::uint8_t m = marks_[b];
        const bool df = defaulter_[b];
        for (int h = 0; h < 2; ++h) {
            const bool prod = m & (1u << h), dist = m & (1u << (2 + h)), area = m & (1u << (4 + h));
            const bool hit[5] = {prod, dist, area, prod && dist, prod && area};
            for (std::size_t f = 0; f < 5; ++f) {
                if (!hit[f]) continue;
                out[f * 4 + 2 * h] += 1;
                if (df) out[f * 4 + 2 * h + 1] += 1;
            }
        }
        marks_[b] = 0;
    }
    touched_.clear();
    return out;
}

DegreeCounts degree_features(std::span<const LoanRecord> records, const WindowSpec& window,
                             const std::string& borrower) {
    return WindowIndex(records, window).degrees(borrower);
}

std::array<double, 4> scenario_scores(const MultilayerNetwork& net, const RankResult<double>& run,
                                      const std::string& borrower) {
    const auto idx = net.index_of(borrower);
    if (!idx || !net.is_common(*idx))
        throw Error(Errc::MissingScenarioRun, "borrower '" + borrower + "' is not in the ranked network");
    if (run.per_node.size() != static_cast<Eigen::Index>(net.num_nodes()))
        throw Error(Errc::MissingScenarioRun, "rank result does not match the network");
    std::array<double, 4> out{run.per_node[static_cast<Eigen::Index>(*idx)], 0.0, 0.0, 0.0};
    std::array<bool, 3> seen{};
    for (const auto& [nb, w] : net.neighbours(*idx)) {
        const auto kind = entity_of(net.node(nb).id);
        if (!kind) continue;
        const auto k = static_cast<std::size_t>(*kind);
        const double v = run.per_node[static_cast<Eigen::Index>(nb)];
        if (!seen[k] || v > out[k + 1]) out[k + 1] = v;
        seen[k] = true;
    }
    return out;
}

std::array<double, kNumScoreFeatures> score_features(const MultilayerNetwork& net, const ScenarioRuns& runs,
                                                     const std::string& borrower) {
    std::array<double, kNumScoreFeatures> out{};
    for (std::size_t s = 0; s < 3; ++s) {
        if (!runs[s])
            throw Error(Errc::MissingScenarioRun,
                        "no " + std::string(to_string(static_cast<Scenario>(s))) + " run for score features");
        const auto sc = scenario_scores(net, *runs[s], borrower);
        out[s] = sc[0];
        for (std::size_t k = 0; k < 3; ++k) out[3 + 3 * k + s] = sc[k + 1];
    }
    return out;
}

double pairwise_correlation(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& y) {
    double n = 0, mx = 0, my = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isnan(x[i]) && !std::isnan(y[i])) {
            n += 1;
            mx += x[i];
            my += y[i];
        }
    if (n < 2) return std::nan("");
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isnan(x[i]) && !std::isnan(y[i])) {
            sxy += (x[i] - mx) * (y[i] - my);
            sxx += (x[i] - mx) * (x[i] - mx);
            syy += (y[i] - my) * (y[i] - my);
        }
    if (sxx <= 0 || syy <= 0) return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}

PruneResult correlation_prune(const Eigen::MatrixXd& table, std::span<const std::string> names,
                              std::string_view target, double cutoff) {
    if (static_cast<Eigen::Index>(names.size()) != table.cols())
        throw Error(Errc::InvalidConfig, "correlation_prune: name count does not match table columns");
    if (!(cutoff >= 0 && cutoff <= 1)) throw Error(Errc::InvalidConfig, "correlation_prune: cutoff must lie in [0, 1]");
    const auto target_it = std::find(names.begin(), names.end(), target);
    if (target_it == names.end())
        throw Error(Errc::MissingColumn, "correlation_prune: no target column '" + std::string(target) + "'");
    const auto t = static_cast<Eigen::Index>(target_it - names.begin());

    PruneResult res;
    std::vector<bool> alive(names.size(), true);
    std::vector<double> target_corr(names.size(), 0.0);
    std::vector<Eigen::Index> candidates;
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
        if (c == t) continue;
        double lo = INFINITY, hi = -INFINITY;
        for (Eigen::Index i = 0; i < table.rows(); ++i)
            if (!std::isnan(table(i, c))) {
                lo = std::min(lo, table(i, c));
                hi = std::max(hi, table(i, c));
            }
        if (!(hi > lo)) {
            alive[c] = false;
            res.dropped.push_back(names[c]);
            res.log.push_back("dropped constant column " + names[c]);
            continue;
        }
        const double tc = pairwise_correlation(table.col(c), table.col(t));
        target_corr[c] = std::isnan(tc) ? 0.0 : std::abs(tc);
        candidates.push_back(c);
    }

    struct Pair {
        double corr;
        Eigen::Index a, b;  // names[a] < names[b]
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        for (std::size_t j = i + 1; j < candidates.size(); ++j) {
            auto a = candidates[i], b = candidates[j];
            const double c = std::abs(pairwise_correlation(table.col(a), table.col(b)));
            if (!(c > cutoff)) continue;
            if (names[b] < names[a]) std::swap(a, b);
            pairs.push_back({c, a, b});
        }
    std::sort(pairs.begin(), pairs.end(), [&](const Pair& x, const Pair& y) {
        if (x.corr != y.corr) return x.corr > y.corr;
        if (names[x.a] != names[y.a]) return names[x.a] < names[y.a];
        return names[x.b] < names[y.b];
    });
    for (const auto& p : pairs) {
        if (!alive[p.a] || !alive[p.b]) continue;
        // names[a] < names[b], so an exact tie drops b
        const auto drop = target_corr[p.b] <= target_corr[p.a] ? p.b : p.a;
        const auto keep = drop == p.a ? p.b : p.a;
        alive[drop] = false;
        res.dropped.push_back(names[drop]);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6f", p.corr);
        res.log.push_back("dropped " + names[drop] + " (|corr| " + buf + " with " + names[keep] + ")");
    }
    for (std::size_t c = 0; c < names.size(); ++c)
        if (alive[c]) res.retained.push_back(names[c]);
    return res;
}

double univariate_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw Error(Errc::InvalidConfig, "univariate_auc: length mismatch");
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (!std::isnan(scores[i])) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double pos = 0, neg = 0, rank_sum = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (labels[order[k]]) {
                pos += 1;
                rank_sum += avg;
            } else {
                neg += 1;
            }
        }
        i = j + 1;
    }
    if (pos == 0 || neg == 0) throw Error(Errc::DegenerateLabels, "univariate_auc needs both label classes");
    return (rank_sum - pos * (pos + 1) / 2) / (pos * neg);
}

}  // namespace multirank
