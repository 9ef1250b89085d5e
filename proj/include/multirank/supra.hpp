#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cassert>
#include <cmath>
#include <utility>
#include <vector>

#include "multirank/network.hpp"

namespace multirank {

/// Flattened (N*L) x (N*L) multilayer matrix; state(i, a) = a * N + i.
///
/// Stored as explicit sparse entries plus an optional set of "filled" columns in
/// which every one of the dim() entries equals fill_value(). Filled columns carry
/// no explicit entries. This keeps uniform dangling columns and the all-ones
/// teleport matrix implicit.
template <typename Scalar = double>
class SupraMatrix {
public:
    using Index = Eigen::Index;
    using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    SupraMatrix() = default;

    SupraMatrix(Index nodes, Index layers, Sparse entries, std::vector<bool> filled = {}, Scalar fill = Scalar(0))
        : nodes_(nodes), layers_(layers), entries_(std::move(entries)), filled_(std::move(filled)), fill_(fill) {
        if (filled_.empty()) filled_.assign(static_cast<std::size_t>(dim()), false);
        assert(entries_.rows() == dim() && entries_.cols() == dim());
        assert(static_cast<Index>(filled_.size()) == dim());
        for (bool f : filled_) num_filled_ += f ? 1 : 0;
        if (num_filled_ > 0) {
            entries_.prune([this](Index, Index col, const Scalar&) { return !filled_[static_cast<std::size_t>(col)]; });
        }
        entries_.makeCompressed();
    }

    /// The all-ones matrix over nodes * layers states.
    static SupraMatrix ones(Index nodes, Index layers) {
        const Index n = nodes * layers;
        return SupraMatrix(nodes, layers, Sparse(n, n), std::vector<bool>(static_cast<std::size_t>(n), true),
                           Scalar(1));
    }

    Index nodes() const noexcept { return nodes_; }
    Index layers() const noexcept { return layers_; }
    Index dim() const noexcept { return nodes_ * layers_; }
    Index state(Index node, Index layer) const noexcept { return layer * nodes_ + node; }

    const Sparse& entries() const noexcept { return entries_; }
    bool filled(Index col) const { return filled_[static_cast<std::size_t>(col)]; }
    Index num_filled() const noexcept { return num_filled_; }
    Scalar fill_value() const noexcept { return fill_; }

    Scalar coeff(Index row, Index col) const { return filled(col) ? fill_ : entries_.coeff(row, col); }

    /// Number of structurally nonzero entries, filled columns included.
    Index nonzeros() const {
        Index explicit_nz = 0;
        for (Index c = 0; c < entries_.outerSize(); ++c)
            for (typename Sparse::InnerIterator it(entries_, c); it; ++it)
                if (it.value() != Scalar(0)) ++explicit_nz;
        return explicit_nz + (fill_ != Scalar(0) ? num_filled_ * dim() : 0);
    }

    Vector column_sums() const {
        Vector sums(dim());
        for (Index c = 0; c < dim(); ++c) {
            if (filled(c)) {
                sums[c] = fill_ * static_cast<Scalar>(dim());
            } else {
                Scalar s(0);
                for (typename Sparse::InnerIterator it(entries_, c); it; ++it) s += it.value();
                sums[c] = s;
            }
        }
        return sums;
    }

    Vector row_sums() const {
        Vector sums = Vector::Constant(dim(), fill_ * static_cast<Scalar>(num_filled_));
        for (Index c = 0; c < entries_.outerSize(); ++c)
            for (typename Sparse::InnerIterator it(entries_, c); it; ++it) sums[it.row()] += it.value();
        return sums;
    }

    Scalar sum() const { return column_sums().sum(); }

    /// y = M x. Accumulation order is fixed, so results are reproducible bit for bit.
    template <typename Derived>
    Vector operator*(const Eigen::MatrixBase<Derived>& x) const {
        Vector y = entries_ * x;
        if (num_filled_ > 0) {
            Scalar mass(0);
            for (Index c = 0; c < dim(); ++c)
                if (filled(c)) mass += x[c];
            y.array() += fill_ * mass;
        }
        return y;
    }

    Dense to_dense() const {
        Dense d = Dense(entries_);
        for (Index c = 0; c < dim(); ++c)
            if (filled(c)) d.col(c).setConstant(fill_);
        return d;
    }

    bool is_symmetric() const {
        const Dense d = to_dense();
        return (d - d.transpose()).cwiseAbs().maxCoeff() == Scalar(0);
    }

private:
    Index nodes_ = 0;
    Index layers_ = 0;
    Sparse entries_;
    std::vector<bool> filled_;
    Scalar fill_ = Scalar(0);
    Index num_filled_ = 0;
};

/// Supra adjacency: intra-layer bipartite blocks on the diagonal, stickiness on
/// the diagonal of every off-diagonal block for common nodes. Symmetric.
template <typename Scalar = double>
SupraMatrix<Scalar> supra_adjacency(const MultilayerNetwork& net) {
    using Index = Eigen::Index;
    const Index n = static_cast<Index>(net.num_nodes());
    const Index layers = static_cast<Index>(net.num_layers());
    const Scalar s = static_cast<Scalar>(net.stickiness());

    std::vector<Eigen::Triplet<Scalar>> triplets;
    triplets.reserve(2 * net.num_edges() + (s != Scalar(0) ? net.num_common() * layers * layers : 0));
    for (Index a = 0; a < layers; ++a) {
        for (const auto& e : net.layer(static_cast<std::size_t>(a)).edges) {
            const Index c = a * n + static_cast<Index>(e.common);
            const Index p = a * n + static_cast<Index>(e.specific);
            triplets.emplace_back(c, p, static_cast<Scalar>(e.weight));
            triplets.emplace_back(p, c, static_cast<Scalar>(e.weight));
        }
    }
    if (s != Scalar(0)) {
        for (Index a = 0; a < layers; ++a)
            for (Index b = 0; b < layers; ++b) {
                if (a == b) continue;
                for (Index i = 0; i < static_cast<Index>(net.num_common()); ++i)
                    triplets.emplace_back(a * n + i, b * n + i, s);
            }
    }
    typename SupraMatrix<Scalar>::Sparse m(n * layers, n * layers);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return SupraMatrix<Scalar>(n, layers, std::move(m));
}

/// Column-normalized supra adjacency. Zero columns (dangling states: specific
/// nodes in foreign layers, isolated states) become uniform 1/(N*L) columns.
template <typename Scalar>
SupraMatrix<Scalar> supra_transition(const SupraMatrix<Scalar>& adj) {
    using Index = Eigen::Index;
    const Index dim = adj.dim();
    const auto sums = adj.column_sums();

    typename SupraMatrix<Scalar>::Sparse t = adj.entries();
    std::vector<bool> dangling(static_cast<std::size_t>(dim), false);
    for (Index c = 0; c < dim; ++c) {
        if (sums[c] > Scalar(0) && !adj.filled(c)) {
            for (typename SupraMatrix<Scalar>::Sparse::InnerIterator it(t, c); it; ++it) it.valueRef() /= sums[c];
        } else {
            dangling[static_cast<std::size_t>(c)] = !(sums[c] > Scalar(0));
        }
    }
    // A filled, nonzero column is already uniform; it only needs rescaling.
    if (adj.num_filled() > 0 && adj.fill_value() > Scalar(0)) {
        for (Index c = 0; c < dim; ++c)
            if (adj.filled(c)) dangling[static_cast<std::size_t>(c)] = true;
    }
    return SupraMatrix<Scalar>(adj.nodes(), adj.layers(), std::move(t), std::move(dangling),
                               Scalar(1) / static_cast<Scalar>(dim));
}

}  // namespace multirank
