#pragma once

// Test-only helpers: fixture networks and dense reference computations that do
// not go through SupraMatrix, supra_transition or the iterative engines.

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "multirank/network.hpp"
#include "multirank/propagation.hpp"

namespace multirank::testing {

using DenseMatrix = Eigen::MatrixXd;
using DenseVector = Eigen::VectorXd;

/// product: b1-p1, b2-p1; geo: b2-a1, b3-a1.
inline MultilayerNetwork toy_chain(double stickiness = 1.0) {
    return build_network({LayerSpec::from_edges("product", {{"b1", "p1"}, {"b2", "p1"}}),
                          LayerSpec::from_edges("geo", {{"b2", "a1"}, {"b3", "a1"}})},
                         stickiness);
}

/// Nine borrowers, three locations in the first layer, three products in the second.
inline MultilayerNetwork nine_borrower_grid(double stickiness = 1.0) {
    std::vector<EdgeSpec> location, product;
    for (int k = 0; k < 9; ++k) {
        const std::string b = "b" + std::to_string(k + 1);
        location.push_back({b, "loc" + std::to_string(k / 3 + 1)});
        product.push_back({b, "prod" + std::to_string(k % 3 + 1)});
    }
    return build_network({LayerSpec::from_edges("location", location), LayerSpec::from_edges("product", product)},
                         stickiness);
}

/// Random bipartite multilayer network. Every common node gets at least one edge
/// per layer when `full_coverage` is set.
inline std::vector<LayerSpec> random_layers(std::mt19937_64& rng, int commons, std::vector<int> specifics_per_layer,
                                            double edge_prob, bool weighted = false, bool full_coverage = true) {
    std::vector<LayerSpec> layers;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t a = 0; a < specifics_per_layer.size(); ++a) {
        LayerSpec layer;
        layer.name = "L" + std::to_string(a);
        for (int s = 0; s < specifics_per_layer[a]; ++s)
            layer.specific_nodes.push_back("s" + std::to_string(a) + "_" + std::to_string(s));
        std::uniform_int_distribution<int> pick(0, specifics_per_layer[a] - 1);
        for (int c = 0; c < commons; ++c) {
            bool any = false;
            for (int s = 0; s < specifics_per_layer[a]; ++s) {
                if (unit(rng) < edge_prob) {
                    layer.edges.push_back({"c" + std::to_string(c), layer.specific_nodes[static_cast<std::size_t>(s)],
                                           weighted ? 0.5 + 2.0 * unit(rng) : 1.0});
                    any = true;
                }
            }
            if (!any && full_coverage)
                layer.edges.push_back({"c" + std::to_string(c), layer.specific_nodes[static_cast<std::size_t>(pick(rng))],
                                       weighted ? 0.5 + 2.0 * unit(rng) : 1.0});
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

/// Dense supra adjacency assembled straight from the merged edge lists.
inline DenseMatrix dense_adjacency(const MultilayerNetwork& net) {
    const Eigen::Index n = static_cast<Eigen::Index>(net.num_nodes());
    const Eigen::Index layers = static_cast<Eigen::Index>(net.num_layers());
    DenseMatrix m = DenseMatrix::Zero(n * layers, n * layers);
    for (Eigen::Index a = 0; a < layers; ++a) {
        for (const auto& e : net.layer(static_cast<std::size_t>(a)).edges) {
            m(a * n + static_cast<Eigen::Index>(e.common), a * n + static_cast<Eigen::Index>(e.specific)) += e.weight;
            m(a * n + static_cast<Eigen::Index>(e.specific), a * n + static_cast<Eigen::Index>(e.common)) += e.weight;
        }
        for (Eigen::Index b = 0; b < layers; ++b)
            if (a != b)
                for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(net.num_common()); ++i)
                    m(a * n + i, b * n + i) += net.stickiness();
    }
    return m;
}

inline DenseMatrix dense_column_stochastic(DenseMatrix m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double s = m.col(c).sum();
        if (s > 0)
            m.col(c) /= s;
        else
            m.col(c).setConstant(1.0 / static_cast<double>(m.rows()));
    }
    return m;
}

inline DenseMatrix dense_influence(const MultilayerNetwork& net, const std::vector<std::size_t>& sources,
                                   Scenario scenario) {
    const Eigen::Index n = static_cast<Eigen::Index>(net.num_nodes());
    const Eigen::Index layers = static_cast<Eigen::Index>(net.num_layers());
    DenseMatrix u = DenseMatrix::Zero(n * layers, n * layers);
    for (Eigen::Index a = 0; a < layers; ++a)
        for (Eigen::Index b = 0; b < layers; ++b) {
            const bool diag_block = a == b;
            if (diag_block && scenario == Scenario::inter) continue;
            if (!diag_block && scenario == Scenario::intra) continue;
            for (std::size_t i : sources) u(a * n + static_cast<Eigen::Index>(i), b * n + static_cast<Eigen::Index>(i)) = 1.0;
        }
    return u;
}

/// Solves (I - r T) x = (1 - r) v by LU factorization.
inline DenseVector linear_system_oracle(const DenseMatrix& t, const DenseVector& v, double r) {
    const Eigen::Index n = t.rows();
    const DenseMatrix a = DenseMatrix::Identity(n, n) - r * t;
    return a.fullPivLu().solve((1.0 - r) * v);
}

/// Dense power iteration on r_matrix + shift * I with renormalization, a fixed
/// number of steps. A positive shift keeps the Perron eigenvector and rules out
/// the 2-cycle a periodic nonnegative matrix produces.
inline DenseVector dense_power_iteration(const DenseMatrix& r_matrix, int steps, double shift = 1.0) {
    const DenseMatrix m = r_matrix + shift * DenseMatrix::Identity(r_matrix.rows(), r_matrix.cols());
    DenseVector x = DenseVector::Constant(r_matrix.rows(), 1.0 / static_cast<double>(r_matrix.rows()));
    for (int k = 0; k < steps; ++k) {
        x = m * x;
        x /= x.sum();
    }
    return x;
}

/// Eigenvector of the eigenvalue with largest real part, scaled to sum 1.
inline DenseVector perron_vector(const DenseMatrix& m) {
    Eigen::EigenSolver<DenseMatrix> es(m);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k)
        if (es.eigenvalues()[k].real() > es.eigenvalues()[best].real()) best = k;
    DenseVector x = es.eigenvectors().col(best).real();
    return x / x.sum();
}

/// Eigenvector of a column-stochastic matrix for the eigenvalue nearest 1, scaled to sum 1.
inline DenseVector stationary_distribution(const DenseMatrix& t) {
    Eigen::EigenSolver<DenseMatrix> es(t);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < es.eigenvalues().size(); ++k)
        if (std::abs(es.eigenvalues()[k] - 1.0) < std::abs(es.eigenvalues()[best] - 1.0)) best = k;
    DenseVector x = es.eigenvectors().col(best).real();
    return x / x.sum();
}

inline DenseVector layer_aggregate(const DenseVector& per_state, Eigen::Index nodes) {
    DenseVector w = DenseVector::Zero(nodes);
    for (Eigen::Index a = 0; a < per_state.size() / nodes; ++a) w += per_state.segment(a * nodes, nodes);
    return w;
}

inline std::vector<double> average_ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(average_ranks(x), average_ranks(y));
}

}  // namespace multirank::testing
