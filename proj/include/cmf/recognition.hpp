#pragma once

// Subspace encoding v = pinv(W) z and 1-nearest-neighbour classification
// under the complex Euclidean metric.

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmf/factor.hpp"
#include "cmf/label.hpp"
#include "cmf/linalg.hpp"

namespace cmf {

struct Gallery {
    std::vector<ComplexVector> coefficients;
    std::vector<Label> labels;

    std::size_t size() const { return coefficients.size(); }

    void validate() const {
        if (coefficients.empty()) throw std::invalid_argument("gallery: empty");
        if (coefficients.size() != labels.size())
            throw std::invalid_argument("gallery: coefficient/label count mismatch");
        const auto k = coefficients.front().size();
        for (const auto &c : coefficients)
            if (c.size() != k)
                throw DimensionError("gallery: coefficient vectors differ in dimension");
    }
};

// Caches pinv(W) for repeated encoding. W must have full column rank.
class Encoder {
  public:
    explicit Encoder(const ComplexMatrix &w) {
        const auto rank = numerical_rank(w);
        if (rank < w.cols())
            throw std::invalid_argument("encode: basis " + shape_str(w) +
                                        " is rank deficient (numerical rank " +
                                        std::to_string(rank) + " < K = " +
                                        std::to_string(w.cols()) + ")");
        pinv_ = pinv(w);
    }

    Eigen::Index dim() const { return pinv_.rows(); }
    Eigen::Index input_dim() const { return pinv_.cols(); }

    ComplexVector encode(const ComplexVector &z) const {
        if (z.size() != input_dim())
            throw DimensionError("encode: sample length " + std::to_string(z.size()) +
                                 " != N = " + std::to_string(input_dim()));
        return pinv_ * z;
    }

    // Encodes every column of Z.
    ComplexMatrix encode_columns(const ComplexMatrix &z) const {
        if (z.rows() != input_dim())
            throw DimensionError("encode: data " + shape_str(z) + " has wrong row count for N = " +
                                 std::to_string(input_dim()));
        return pinv_ * z;
    }

  private:
    ComplexMatrix pinv_;
};

inline ComplexVector encode(const ComplexMatrix &w, const ComplexVector &z) {
    return Encoder(w).encode(z);
}

inline Gallery build_gallery(const Encoder &enc, const ComplexMatrix &train,
                             const std::vector<Label> &labels) {
    if (static_cast<std::size_t>(train.cols()) != labels.size())
        throw std::invalid_argument("gallery: " + std::to_string(train.cols()) +
                                    " samples but " + std::to_string(labels.size()) +
                                    " labels");
    const ComplexMatrix coeffs = enc.encode_columns(train);
    Gallery g;
    g.labels = labels;
    g.coefficients.reserve(labels.size());
    for (Eigen::Index j = 0; j < coeffs.cols(); ++j) g.coefficients.emplace_back(coeffs.col(j));
    return g;
}

// Index of the closest gallery entry; ties resolve to the lowest index.
inline std::size_t nearest_index(const Gallery &g, const ComplexVector &probe) {
    if (g.coefficients.empty()) throw std::invalid_argument("classify_1nn: empty gallery");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.coefficients.size(); ++i) {
        const auto &c = g.coefficients[i];
        if (c.size() != probe.size())
            throw DimensionError("classify_1nn: probe dimension " +
                                 std::to_string(probe.size()) + " != gallery dimension " +
                                 std::to_string(c.size()));
        double d = (c - probe).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline const Label &classify_1nn(const Gallery &g, const ComplexVector &probe) {
    if (g.labels.size() != g.coefficients.size())
        throw std::invalid_argument("classify_1nn: gallery label count mismatch");
    return g.labels[nearest_index(g, probe)];
}

// Both sides are encoded through pinv(W); the result is the fraction of test
// columns whose nearest training column carries the same label.
inline double evaluate(const FactorModel &model, const ComplexMatrix &train,
                       const std::vector<Label> &train_labels, const ComplexMatrix &test,
                       const std::vector<Label> &test_labels) {
    if (static_cast<std::size_t>(test.cols()) != test_labels.size())
        throw std::invalid_argument("evaluate: test sample/label count mismatch");
    if (test.cols() == 0) throw std::invalid_argument("evaluate: empty test set");
    Encoder enc(model.W);
    Gallery gallery = build_gallery(enc, train, train_labels);
    const ComplexMatrix probes = enc.encode_columns(test);
    std::size_t correct = 0;
    for (Eigen::Index j = 0; j < probes.cols(); ++j) {
        ComplexVector p = probes.col(j);
        if (classify_1nn(gallery, p) == test_labels[static_cast<std::size_t>(j)]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.cols());
}

} // namespace cmf
