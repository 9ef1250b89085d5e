#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "multirank/error.hpp"
#include "multirank/network.hpp"
#include "multirank/supra.hpp"

namespace multirank {

enum class Scenario { intra, inter, combined };
enum class RestartMode { faithful_matrix, collapsed_vector };

std::string_view to_string(Scenario s) noexcept;
std::string_view to_string(RestartMode m) noexcept;
Scenario parse_scenario(std::string_view text);
RestartMode parse_restart_mode(std::string_view text);

/// Source-of-influence set V_I, which blocks of the influence matrix carry it,
/// and how the teleport term enters the walk.
struct InfluenceSpec {
    std::vector<std::string> sources;
    Scenario scenario = Scenario::combined;
    RestartMode restart_mode = RestartMode::faithful_matrix;
};

template <typename Scalar = double>
struct RankOptions {
    Scalar damping = Scalar(0.85);
    Scalar tolerance = Scalar(1e-10);
    int max_iter = 1000;
    RestartMode restart_mode = RestartMode::faithful_matrix;
};

template <typename Scalar = double>
struct RankResult {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector per_state;  // Pi over N*L states
    Vector per_node;   // omega_i = sum over layers of Pi
    int iterations = 0;
    Scalar residual = Scalar(0);
    bool converged = false;
};

/// Influence matrix with ones on the diagonal positions of `node_indices` in the
/// intra (diagonal) blocks, the inter (off-diagonal) blocks, or both. No
/// membership checks; see build_influence_matrix for the validated form.
template <typename Scalar = double>
SupraMatrix<Scalar> influence_pattern(Eigen::Index nodes, Eigen::Index layers,
                                      std::span<const std::size_t> node_indices, Scenario scenario) {
    using Index = Eigen::Index;
    const bool intra = scenario != Scenario::inter;
    const bool inter = scenario != Scenario::intra;
    std::vector<Eigen::Triplet<Scalar>> triplets;
    for (Index a = 0; a < layers; ++a)
        for (Index b = 0; b < layers; ++b) {
            if ((a == b && !intra) || (a != b && !inter)) continue;
            for (std::size_t i : node_indices)
                triplets.emplace_back(a * nodes + static_cast<Index>(i), b * nodes + static_cast<Index>(i), Scalar(1));
        }
    typename SupraMatrix<Scalar>::Sparse u(nodes * layers, nodes * layers);
    // Repeated indices collapse to a single one.
    u.setFromTriplets(triplets.begin(), triplets.end(), [](const Scalar&, const Scalar& b) { return b; });
    return SupraMatrix<Scalar>(nodes, layers, std::move(u));
}

/// Validated influence matrix for a network. Throws EmptySourceSet when V_I is
/// empty (or the scenario leaves no nonzero entry) and SourceNotCommonNode when a
/// source is unknown or not a common node.
template <typename Scalar = double>
SupraMatrix<Scalar> build_influence_matrix(const MultilayerNetwork& net, const InfluenceSpec& spec) {
    if (spec.sources.empty()) throw Error(Errc::EmptySourceSet, "influence source set is empty");
    std::vector<std::size_t> idx;
    idx.reserve(spec.sources.size());
    for (const auto& id : spec.sources) {
        const auto i = net.index_of(id);
        if (!i || !net.is_common(*i)) throw Error(Errc::SourceNotCommonNode, "source '" + id + "' is not a common node");
        idx.push_back(*i);
    }
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    if (spec.scenario == Scenario::inter && net.num_layers() < 2)
        throw Error(Errc::EmptySourceSet, "inter influence needs at least two layers");
    return influence_pattern<Scalar>(static_cast<Eigen::Index>(net.num_nodes()),
                                     static_cast<Eigen::Index>(net.num_layers()), idx, spec.scenario);
}

namespace detail {

template <typename Scalar>
void check_rank_inputs(const SupraMatrix<Scalar>& transition, const SupraMatrix<Scalar>& influence,
                       const RankOptions<Scalar>& opt) {
    if (!(opt.damping >= Scalar(0) && opt.damping <= Scalar(1)))
        throw Error(Errc::InvalidConfig, "damping factor r must lie in [0, 1]");
    if (transition.dim() != influence.dim() || transition.nodes() != influence.nodes())
        throw Error(Errc::InvalidConfig, "transition and influence matrices differ in shape");
    if (transition.dim() == 0) throw Error(Errc::EmptyNetwork, "no states to rank");
    const auto& entries = transition.entries();
    if (entries.nonZeros() > 0 && entries.coeffs().minCoeff() < Scalar(0))
        throw Error(Errc::NotStochastic, "transition matrix has negative entries");
    const auto sums = transition.column_sums();
    for (Eigen::Index c = 0; c < sums.size(); ++c)
        if (!(std::abs(sums[c] - Scalar(1)) <= Scalar(1e-9)))
            throw Error(Errc::NotStochastic, "transition column " + std::to_string(c) + " does not sum to 1");
}

template <typename Scalar>
RankResult<Scalar> finish(Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x, Eigen::Index nodes, Eigen::Index layers,
                          int iterations, Scalar residual, Scalar tol) {
    RankResult<Scalar> r;
    r.per_node = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(nodes);
    for (Eigen::Index a = 0; a < layers; ++a) r.per_node += x.segment(a * nodes, nodes);
    r.per_state = std::move(x);
    r.iterations = iterations;
    r.residual = residual;
    r.converged = residual <= tol;
    return r;
}

/// y = (a T + b U) x as one row-major sparse product plus the constant
/// contribution of filled (implicitly dense) columns. Built once per rank.
template <typename Scalar>
class FusedOperator {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    FusedOperator(const SupraMatrix<Scalar>& t, Scalar a, const SupraMatrix<Scalar>* u = nullptr, Scalar b = Scalar(0)) {
        Eigen::SparseMatrix<Scalar> sum = a * t.entries();
        add_filled(t, a);
        if (u) {
            sum += b * u->entries();
            add_filled(*u, b);
        }
        m_ = sum;
    }

    void apply(const Vector& x, Vector& y) const {
        y.noalias() = m_ * x;
        Scalar extra(0);
        for (const auto& [cols, w] : filled_) {
            Scalar mass(0);
            for (auto c : cols) mass += x[c];
            extra += w * mass;
        }
        if (extra != Scalar(0)) y.array() += extra;
    }

private:
    void add_filled(const SupraMatrix<Scalar>& m, Scalar scale) {
        if (m.num_filled() == 0 || m.fill_value() * scale == Scalar(0)) return;
        std::vector<Eigen::Index> cols;
        cols.reserve(static_cast<std::size_t>(m.num_filled()));
        for (Eigen::Index c = 0; c < m.dim(); ++c)
            if (m.filled(c)) cols.push_back(c);
        filled_.emplace_back(std::move(cols), scale * m.fill_value());
    }

    Eigen::SparseMatrix<Scalar, Eigen::RowMajor> m_;
    std::vector<std::pair<std::vector<Eigen::Index>, Scalar>> filled_;
};

}  // namespace detail

/// Restart vector of the collapsed form: proportional to the row sums of u.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> restart_vector(const SupraMatrix<Scalar>& influence) {
    auto v = influence.row_sums();
    const Scalar total = v.sum();
    if (!(total > Scalar(0))) throw Error(Errc::EmptySourceSet, "influence matrix has no nonzero entry");
    return v / total;
}

/// Classical personalized PageRank fixed point x = r T x + (1 - r) v, iterated
/// from the uniform vector until the L1 change drops to the tolerance.
template <typename Scalar>
RankResult<Scalar> restart_iteration(const SupraMatrix<Scalar>& transition,
                                     const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& restart,
                                     const RankOptions<Scalar>& opt) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const Eigen::Index n = transition.dim();
    const Scalar r = opt.damping;
    Vector x = Vector::Constant(n, Scalar(1) / static_cast<Scalar>(n));
    Vector teleport = (Scalar(1) - r) * restart;
    const detail::FusedOperator<Scalar> step(transition, r);
    Vector y(n);
    Scalar residual = std::numeric_limits<Scalar>::infinity();
    int it = 0;
    while (it < opt.max_iter) {
        step.apply(x, y);
        y += teleport;
        residual = (y - x).cwiseAbs().sum();
        ++it;
        if (residual <= opt.tolerance) break;  // keep x, the confirmed fixed point
        x.swap(y);
    }
    return detail::finish(std::move(x), transition.nodes(), transition.layers(), it, residual, opt.tolerance);
}

/// Personalized multilayer PageRank.
///
/// faithful_matrix: leading (Perron) eigenvector of R = r T + (1 - r) u / s with
/// s = sum(u) / (N*L), the mean column sum of u (s = N*L for the all-ones
/// matrix). Found by power iteration from the uniform vector with L1
/// renormalization after every step. Each step applies R + (rho/4) I, rho being
/// the current eigenvalue estimate: same eigenvector, but an eigenvalue -rho (two
/// layers with inter influence make R periodic) can no longer stall the
/// iteration. A small shift costs less speed when the leading eigenvalues are
/// close.
///
/// collapsed_vector: fixed point of Pi = r T Pi + (1 - r) v where v is the
/// normalized row-sum vector of u.
///
/// On convergence the iterate whose step moved less than the tolerance is
/// returned. Hitting max_iter leaves `converged` false and returns the last
/// iterate.
template <typename Scalar>
RankResult<Scalar> personalized_pagerank(const SupraMatrix<Scalar>& transition, const SupraMatrix<Scalar>& influence,
                                         const RankOptions<Scalar>& opt = {}) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    detail::check_rank_inputs(transition, influence, opt);

    if (opt.restart_mode == RestartMode::collapsed_vector)
        return restart_iteration(transition, restart_vector(influence), opt);

    const Eigen::Index n = transition.dim();
    const Scalar total = influence.sum();
    if (!(total > Scalar(0))) throw Error(Errc::EmptySourceSet, "influence matrix has no nonzero entry");
    const Scalar scale = (Scalar(1) - opt.damping) * static_cast<Scalar>(n) / total;
    const Scalar r = opt.damping;

    const detail::FusedOperator<Scalar> step(transition, r, &influence, scale);
    Vector x = Vector::Constant(n, Scalar(1) / static_cast<Scalar>(n));
    Vector y(n);
    Scalar residual = std::numeric_limits<Scalar>::infinity();
    int it = 0;
    while (it < opt.max_iter) {
        step.apply(x, y);
        const Scalar rho = y.sum();  // x sums to 1
        if (!(rho > Scalar(0))) break;
        y += Scalar(0.25) * rho * x;
        y /= y.sum();
        residual = (y - x).cwiseAbs().sum();
        ++it;
        if (residual <= opt.tolerance) break;
        x.swap(y);
    }
    return detail::finish(std::move(x), transition.nodes(), transition.layers(), it, residual, opt.tolerance);
}

/// Standard multilayer PageRank: personalized_pagerank with the all-ones u.
template <typename Scalar>
RankResult<Scalar> multilayer_pagerank(const SupraMatrix<Scalar>& transition, const RankOptions<Scalar>& opt = {}) {
    return personalized_pagerank(transition, SupraMatrix<Scalar>::ones(transition.nodes(), transition.layers()), opt);
}

/// Ordinary personalized PageRank on the edge-coloured (aggregated) network with
/// restart uniform over the sources. A multilayer input is aggregated first.
template <typename Scalar = double>
RankResult<Scalar> flat_personalized_pagerank(const MultilayerNetwork& net, std::span<const std::string> sources,
                                              const RankOptions<Scalar>& opt = {}) {
    const MultilayerNetwork flat = net.num_layers() > 1 ? aggregate_network(net) : net;
    if (sources.empty()) throw Error(Errc::EmptySourceSet, "influence source set is empty");
    if (!(opt.damping >= Scalar(0) && opt.damping <= Scalar(1)))
        throw Error(Errc::InvalidConfig, "damping factor r must lie in [0, 1]");
    if (flat.num_states() == 0) throw Error(Errc::EmptyNetwork, "no states to rank");

    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(
        static_cast<Eigen::Index>(flat.num_nodes()));
    for (const auto& id : sources) {
        const auto i = flat.index_of(id);
        if (!i || !flat.is_common(*i)) throw Error(Errc::SourceNotCommonNode, "source '" + id + "' is not a common node");
        v[static_cast<Eigen::Index>(*i)] = Scalar(1);
    }
    v /= v.sum();
    return restart_iteration(supra_transition(supra_adjacency<Scalar>(flat)), v, opt);
}

}  // namespace multirank
