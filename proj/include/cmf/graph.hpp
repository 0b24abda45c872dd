#pragma once

// k-nearest-neighbour cosine-similarity graph and its Laplacian.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmf/linalg.hpp"

namespace cmf {

struct GraphWeights {
    RealMatrix T; // symmetric, zero diagonal, nonnegative
    RealMatrix L; // D - T
    int k = 0;

    RealVector degrees() const { return T.rowwise().sum(); }
};

template <typename A, typename B>
double cosine_similarity(const Eigen::MatrixBase<A> &u, const Eigen::MatrixBase<B> &v) {
    if (u.size() != v.size())
        throw DimensionError("cosine_similarity: length mismatch " +
                             std::to_string(u.size()) + " vs " + std::to_string(v.size()));
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0)
        throw std::invalid_argument("cosine_similarity: zero vector");
    return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

inline RealMatrix laplacian(const RealMatrix &t) {
    RealMatrix l = -t;
    RealVector d = t.rowwise().sum();
    for (Eigen::Index i = 0; i < t.rows(); ++i) l(i, i) += d(i);
    return l;
}

// Features are the columns of `features`. Vertex i keeps its k most similar
// vertices (ties to the smaller index); the edge set is the union of both
// directions. Negative similarities are stored as zero weight.
inline GraphWeights knn_graph(const RealMatrix &features, int k) {
    const Eigen::Index m = features.cols();
    if (k < 1 || k >= m)
        throw std::invalid_argument("knn_graph: k must satisfy 1 <= k < M (k=" +
                                    std::to_string(k) + ", M=" + std::to_string(m) + ")");
    RealVector norms(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        norms(j) = features.col(j).norm();
        if (norms(j) == 0.0)
            throw std::invalid_argument("knn_graph: feature column " + std::to_string(j) +
                                        " is zero");
    }

    RealMatrix sim = RealMatrix::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = i + 1; j < m; ++j) {
            double s = features.col(i).dot(features.col(j)) / (norms(i) * norms(j));
            s = std::clamp(s, -1.0, 1.0);
            sim(i, j) = s;
            sim(j, i) = s;
        }

    GraphWeights g;
    g.k = k;
    g.T = RealMatrix::Zero(m, m);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m - 1));
    for (Eigen::Index i = 0; i < m; ++i) {
        order.clear();
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + k, order.end(),
                          [&](Eigen::Index a, Eigen::Index b) {
                              if (sim(i, a) != sim(i, b)) return sim(i, a) > sim(i, b);
                              return a < b;
                          });
        for (int n = 0; n < k; ++n) {
            Eigen::Index j = order[static_cast<std::size_t>(n)];
            double w = std::max(sim(i, j), 0.0);
            g.T(i, j) = w;
            g.T(j, i) = w;
        }
    }
    g.L = laplacian(g.T);
    return g;
}

// Trace(V L V^H) as a complex number; the imaginary part is roundoff only.
inline Complex graph_trace(const ComplexMatrix &v, const RealMatrix &l) {
    if (l.rows() != l.cols() || l.rows() != v.cols())
        throw DimensionError("graph_penalty: V " + shape_str(v) + " incompatible with L " +
                             shape_str(l));
    const RealMatrix vr = v.real();
    const RealMatrix vi = v.imag();
    const RealMatrix ar = vr * l;
    const RealMatrix ai = vi * l;
    double re = (ar.array() * vr.array()).sum() + (ai.array() * vi.array()).sum();
    double im = (ai.array() * vr.array()).sum() - (ar.array() * vi.array()).sum();
    return {re, im};
}

inline double graph_penalty(const ComplexMatrix &v, const RealMatrix &l) {
    return graph_trace(v, l).real();
}

} // namespace cmf
