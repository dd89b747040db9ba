#pragma once

// Cyclic Jacobi eigenvalue iteration for real symmetric and complex
// Hermitian matrices.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>

#include <Eigen/Dense>

namespace qbound {

class JacobiNotConverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <typename T>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};

}  // namespace detail

// Eigenvalues (unsorted) of the Hermitian matrix `a`.  Iterates until the
// off-diagonal Frobenius norm drops below `tol`.
template <typename Derived>
Eigen::Matrix<typename Eigen::NumTraits<typename Derived::Scalar>::Real, Eigen::Dynamic, 1>
hermitian_eigenvalues(const Eigen::MatrixBase<Derived>& input, double tol = 1e-12, int max_sweeps = 100) {
    using Scalar = typename Derived::Scalar;
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    if (input.rows() != input.cols()) throw std::invalid_argument("hermitian_eigenvalues: matrix is not square");
    Matrix a = input;
    // Symmetrize against rounding in the input.
    a = (a + a.adjoint().eval()) * Real(0.5);
    const Eigen::Index n = a.rows();

    auto off_norm = [&] {
        Real s(0);
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) s += Real(2) * std::norm(a(p, q));
        return std::sqrt(s);
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        const Real off = off_norm();
        if (off < Real(tol)) {
            return a.diagonal().real();
        }
        // Skip tiny entries in early sweeps; rotate everything afterwards.
        const Real threshold = sweep < 3 ? Real(0.2) * off / Real(n * n) : Real(0);
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Real g = std::abs(a(p, q));
                if (g == Real(0) || g <= threshold) continue;
                const Real app = std::real(a(p, p));
                const Real aqq = std::real(a(q, q));
                const Real theta = (aqq - app) / (Real(2) * g);
                const Real t = (theta >= 0 ? Real(1) : Real(-1)) / (std::abs(theta) + std::sqrt(theta * theta + Real(1)));
                const Real c = Real(1) / std::sqrt(t * t + Real(1));
                const Real s = t * c;
                // J = D R with D = diag(1, conj(phase)) on (p, q) makes a(p,q) real.
                Scalar phase = a(p, q) / g;
                Scalar jpp = c, jpq = s, jqp, jqq;
                if constexpr (detail::is_complex<Scalar>::value) {
                    jqp = -s * std::conj(phase);
                    jqq = c * std::conj(phase);
                } else {
                    jqp = -s * phase;
                    jqq = c * phase;
                }
                // a <- J^H a J, acting on columns then rows p and q.
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp * jpp + akq * jqp;
                    a(k, q) = akp * jpq + akq * jqq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const Scalar apk = a(p, k), aqk = a(q, k);
                    a(p, k) = Eigen::numext::conj(jpp) * apk + Eigen::numext::conj(jqp) * aqk;
                    a(q, k) = Eigen::numext::conj(jpq) * apk + Eigen::numext::conj(jqq) * aqk;
                }
                a(p, q) = Scalar(0);
                a(q, p) = Scalar(0);
            }
        }
    }
    if (off_norm() < Real(tol)) return a.diagonal().real();
    throw JacobiNotConverged("Jacobi iteration did not converge within " + std::to_string(max_sweeps) + " sweeps");
}

}  // namespace qbound
