#pragma once

// Dense complex matrix primitives. Storage is row-major double precision;
// real-valued matrices (pixel data, graph weights, Laplacians) use RealMatrix
// or a ComplexMatrix with zero imaginary parts.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cmf/rng.hpp"

namespace cmf {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RealMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;
using RealVector = Eigen::Matrix<double, Eigen::Dynamic, 1>;
using IntMatrix =
    Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Singular values at or below this fraction of the largest are treated as zero.
inline constexpr double kRankTolerance = 1e-12;

class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

template <typename Derived>
std::string shape_str(const Eigen::EigenBase<Derived> &m) {
    return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

inline ComplexMatrix matmul(const ComplexMatrix &a, const ComplexMatrix &b) {
    if (a.cols() != b.rows())
        throw DimensionError("matmul: shape mismatch " + shape_str(a) + " * " +
                             shape_str(b));
    return a * b;
}

inline ComplexMatrix hermitian(const ComplexMatrix &a) { return a.adjoint(); }

// Sum of squared moduli; exactly real by construction.
template <typename Derived>
double frob_norm_sq(const Eigen::MatrixBase<Derived> &a) {
    return a.squaredNorm();
}

template <typename Derived> bool all_finite(const Eigen::MatrixBase<Derived> &a) {
    return a.allFinite();
}

inline ComplexMatrix to_complex(const RealMatrix &x) {
    return x.cast<Complex>();
}

// Entries with real and imaginary parts i.i.d. uniform on [lo, hi).
inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, Rng &rng,
                                    double lo = -1.0, double hi = 1.0) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            double re = rng.uniform(lo, hi);
            double im = rng.uniform(lo, hi);
            m(i, j) = Complex(re, im);
        }
    return m;
}

inline RealMatrix random_real(Eigen::Index rows, Eigen::Index cols, Rng &rng,
                              double lo = -1.0, double hi = 1.0) {
    RealMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    return m;
}

namespace detail {

using Svd = Eigen::JacobiSVD<Eigen::MatrixXcd, Eigen::ColPivHouseholderQRPreconditioner>;

inline Svd thin_svd(const ComplexMatrix &a) {
    return Svd(Eigen::MatrixXcd(a), Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline Eigen::Index rank_from_singular_values(const Eigen::VectorXd &s) {
    if (s.size() == 0 || s(0) == 0.0) return 0;
    const double cutoff = kRankTolerance * s(0);
    Eigen::Index r = 0;
    while (r < s.size() && s(r) > cutoff) ++r;
    return r;
}

} // namespace detail

inline Eigen::Index numerical_rank(const ComplexMatrix &a) {
    if (a.size() == 0) return 0;
    auto svd = Eigen::JacobiSVD<Eigen::MatrixXcd>(Eigen::MatrixXcd(a));
    return detail::rank_from_singular_values(svd.singularValues());
}

// Moore-Penrose pseudoinverse from a thin SVD: A+ = V S+ U^H, with singular
// values at or below kRankTolerance * sigma_max dropped.
inline ComplexMatrix pinv(const ComplexMatrix &a) {
    if (a.size() == 0) return ComplexMatrix::Zero(a.cols(), a.rows());
    auto svd = detail::thin_svd(a);
    const Eigen::VectorXd &s = svd.singularValues();
    const Eigen::Index r = detail::rank_from_singular_values(s);
    if (r == 0) return ComplexMatrix::Zero(a.cols(), a.rows());
    Eigen::MatrixXcd vs = svd.matrixV().leftCols(r);
    for (Eigen::Index k = 0; k < r; ++k) vs.col(k) /= s(k);
    return vs * svd.matrixU().leftCols(r).adjoint();
}

// argmin_W ||Z - W V||_F, i.e. W = Z pinv(V).
inline ComplexMatrix lstsq_W(const ComplexMatrix &z, const ComplexMatrix &v) {
    if (z.cols() != v.cols())
        throw DimensionError("lstsq_W: Z " + shape_str(z) + " and V " + shape_str(v) +
                             " must have the same number of columns");
    return z * pinv(v);
}

} // namespace cmf
