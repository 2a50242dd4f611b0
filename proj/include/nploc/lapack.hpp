#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#ifndef lapack_complex_float
#define lapack_complex_float std::complex<float>
#endif
#ifndef lapack_complex_double
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "nploc/errors.hpp"

namespace nploc::lapack {

/** Eigenvalues and right eigenvectors of a real general matrix. */
struct RealEigen {
    Eigen::VectorXcd values;
    Eigen::MatrixXcd vectors; // column j belongs to values(j), unit 2-norm
};

// The input matrix is overwritten.
inline RealEigen geev(Eigen::MatrixXd& a, bool want_vectors = true)
{
    const lapack_int n = static_cast<lapack_int>(a.rows());
    if (a.cols() != a.rows())
        throw InvalidParameter("eigenproblem needs a square matrix");
    std::vector<double> wr(n), wi(n);
    Eigen::MatrixXd vr(want_vectors ? n : 1, want_vectors ? n : 1);
    double dummy = 0.0;
    lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, a.data(), n,
                                    wr.data(), wi.data(), &dummy, 1, vr.data(),
                                    want_vectors ? n : 1);
    if (info != 0)
        throw NumericalFailure("dgeev failed to converge (info = " + std::to_string(info) + ")");
    RealEigen out;
    out.values.resize(n);
    for (lapack_int j = 0; j < n; ++j)
        out.values(j) = {wr[j], wi[j]};
    if (!want_vectors)
        return out;
    out.vectors.resize(n, n);
    for (lapack_int j = 0; j < n; ++j) {
        if (wi[j] == 0.0) {
            out.vectors.col(j) = vr.col(j).cast<std::complex<double>>();
        } else {
            // Conjugate pair stored as (re, im) in consecutive columns.
            Eigen::VectorXcd v(n);
            for (lapack_int i = 0; i < n; ++i)
                v(i) = {vr(i, j), vr(i, j + 1)};
            out.vectors.col(j) = v;
            out.vectors.col(j + 1) = v.conjugate();
            ++j;
        }
    }
    return out;
}

/** Dense LU factorization with partial pivoting and a condition estimate. */
class ComplexLU {
public:
    explicit ComplexLU(Eigen::MatrixXcd a) : lu_(std::move(a))
    {
        const lapack_int n = static_cast<lapack_int>(lu_.rows());
        if (lu_.cols() != lu_.rows())
            throw InvalidParameter("LU needs a square matrix");
        double anorm = lu_.cwiseAbs().colwise().sum().maxCoeff();
        piv_.resize(n);
        auto* data = reinterpret_cast<lapack_complex_double*>(lu_.data());
        lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, n, n, data, n, piv_.data());
        if (info < 0)
            throw NumericalFailure("zgetrf rejected its arguments");
        singular_ = info > 0;
        rcond_ = 0.0;
        if (!singular_) {
            info = LAPACKE_zgecon(LAPACK_COL_MAJOR, '1', n, data, n, anorm, &rcond_);
            if (info != 0)
                throw NumericalFailure("zgecon failed");
        }
    }

    bool singular() const { return singular_; }
    // Reciprocal 1-norm condition number estimate.
    double rcond() const { return rcond_; }

    Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const
    {
        if (singular_)
            throw NumericalFailure("matrix is exactly singular");
        Eigen::VectorXcd x = b;
        const lapack_int n = static_cast<lapack_int>(lu_.rows());
        lapack_int info = LAPACKE_zgetrs(
            LAPACK_COL_MAJOR, 'N', n, 1, reinterpret_cast<const lapack_complex_double*>(lu_.data()),
            n, piv_.data(), reinterpret_cast<lapack_complex_double*>(x.data()), n);
        if (info != 0)
            throw NumericalFailure("zgetrs failed");
        return x;
    }

private:
    Eigen::MatrixXcd lu_;
    std::vector<lapack_int> piv_;
    bool singular_ = false;
    double rcond_ = 0.0;
};

} // namespace nploc::lapack
