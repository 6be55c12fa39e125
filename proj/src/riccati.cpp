#include "relaycancel/riccati.hpp"

#include "relaycancel/error.hpp"

#include <cmath>
#include <limits>

namespace relaycancel {

namespace {

double norm1(const Matrix& A) { return A.size() == 0 ? 0.0 : A.cwiseAbs().colwise().sum().maxCoeff(); }

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

struct Reduced {
    Matrix A;  // A - B R^{-1} S'
    Matrix G;  // B R^{-1} B'
    Matrix Q;  // Q - S R^{-1} S'
};

Matrix reduced_residual(const Reduced& r, const Matrix& X) {
    return r.A.transpose() * X + X * r.A - X * r.G * X + r.Q;
}

// Sign of the Hamiltonian by the scaled Newton iteration Z <- (cZ + (cZ)^{-1}) / 2.
Matrix matrix_sign(Matrix Z, int& iterations) {
    const auto dim = Z.rows();
    bool scaling = true;
    double previous = std::numeric_limits<double>::infinity();
    for (iterations = 1; iterations <= 100; ++iterations) {
        Eigen::PartialPivLU<Matrix> lu(Z);
        if (!(lu.rcond() > 1e-15))
            throw Error(ErrorCode::NoStabilizingSolution, "Hamiltonian became singular during the sign iteration");
        const Matrix Zinv = lu.inverse();
        double c = 1.0;
        if (scaling) {
            const auto& U = lu.matrixLU();
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < dim; ++i) logdet += std::log(std::abs(U(i, i)));
            c = std::exp(-logdet / static_cast<double>(dim));
        }
        Matrix next = 0.5 * (c * Z + Zinv / c);
        if (!next.allFinite()) throw Error(ErrorCode::IterationDivergence, "sign iteration produced non-finite values");
        const double change = norm1(next - Z) / std::max(1.0, norm1(next));
        Z = std::move(next);
        if (change < 1e-2) scaling = false;
        if (change <= 1e-13) return Z;
        // Quadratic convergence has stalled at rounding level.
        if (change < 1e-9 && change >= previous) return Z;
        previous = change;
    }
    throw Error(ErrorCode::IterationDivergence, "sign iteration did not converge in 100 iterations");
}

}  // namespace

Matrix solve_lyapunov(const Matrix& A, const Matrix& C) {
    const auto n = A.rows();
    if (A.cols() != n || C.rows() != n || C.cols() != n)
        throw Error(ErrorCode::DimensionMismatch, "solve_lyapunov: dimension mismatch");
    if (n == 0) return Matrix(0, 0);

    Eigen::ComplexSchur<CMatrix> schur(A.cast<Complex>());
    if (schur.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "Schur decomposition failed");
    const CMatrix& T = schur.matrixT();
    const CMatrix& U = schur.matrixU();
    const CMatrix F = -(U.adjoint() * C.cast<Complex>() * U);

    // T^H Y + Y T = F, solved row by row.
    CMatrix Y = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Complex acc = F(i, j);
            for (Eigen::Index k = 0; k < i; ++k) acc -= std::conj(T(k, i)) * Y(k, j);
            for (Eigen::Index k = 0; k < j; ++k) acc -= Y(i, k) * T(k, j);
            const Complex denom = std::conj(T(i, i)) + T(j, j);
            if (std::abs(denom) < 1e-14 * std::max(1.0, T.cwiseAbs().maxCoeff()))
                throw Error(ErrorCode::NumericalFailure, "Lyapunov equation is singular");
            Y(i, j) = acc / denom;
        }
    }
    return (U * Y * U.adjoint()).real();
}

double are_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& S,
                    const Matrix& X) {
    const Matrix XBS = X * B + S;
    const Matrix res = A.transpose() * X + X * A - XBS * R.partialPivLu().solve(XBS.transpose()) + Q;
    return res.norm() / std::max(1.0, Q.norm());
}

AreSolution solve_are(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& S) {
    const auto n = A.rows(), m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m ||
        S.rows() != n || S.cols() != m)
        throw Error(ErrorCode::DimensionMismatch, "solve_are: dimension mismatch");
    if ((R - R.transpose()).norm() > 1e-10 * std::max(1.0, R.norm()))
        throw Error(ErrorCode::InvalidArgument, "solve_are: R must be symmetric");

    AreSolution sol;
    if (n == 0) {
        sol.X = Matrix(0, 0);
        return sol;
    }

    Reduced red;
    if (m > 0) {
        Eigen::PartialPivLU<Matrix> lu(R);
        if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::InvalidArgument, "solve_are: R is singular");
        const Matrix Rinv_St = lu.solve(S.transpose());
        const Matrix Rinv_Bt = lu.solve(B.transpose());
        red.A = A - B * Rinv_St;
        red.G = symmetrize(B * Rinv_Bt);
        red.Q = symmetrize(Q - S * Rinv_St);
    } else {
        red.A = A;
        red.G = Matrix::Zero(n, n);
        red.Q = symmetrize(Q);
    }

    Matrix H(2 * n, 2 * n);
    H << red.A, -red.G, -red.Q, -red.A.transpose();

    {
        Eigen::EigenSolver<Matrix> es(H, false);
        if (es.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "Hamiltonian eigenvalues failed");
        const double scale = std::max(1.0, norm1(H));
        if (es.eigenvalues().real().cwiseAbs().minCoeff() <= 1e-8 * scale)
            throw Error(ErrorCode::NoStabilizingSolution, "Hamiltonian has eigenvalues on the imaginary axis");
    }

    const Matrix W = matrix_sign(H, sol.sign_iterations);

    // Stable subspace = ker(W + I); [I; X] spans it.
    Matrix lhs(2 * n, n), rhs(2 * n, n);
    lhs << W.topRightCorner(n, n), W.bottomRightCorner(n, n) + Matrix::Identity(n, n);
    rhs << W.topLeftCorner(n, n) + Matrix::Identity(n, n), W.bottomLeftCorner(n, n);
    Eigen::ColPivHouseholderQR<Matrix> qr(lhs);
    if (qr.rank() < n) throw Error(ErrorCode::NoStabilizingSolution, "stable invariant subspace is not a graph");
    Matrix X = symmetrize(qr.solve(-rhs));
    if (!X.allFinite()) throw Error(ErrorCode::NoStabilizingSolution, "Riccati solution is not finite");

    // Newton refinement: (A - G X)' D + D (A - G X) = -Res(X).
    double res_norm = reduced_residual(red, X).norm();
    for (int step = 0; step < 20 && res_norm > 1e-15 * std::max(1.0, X.norm()); ++step) {
        Matrix candidate;
        try {
            candidate = symmetrize(X + solve_lyapunov(red.A - red.G * X, reduced_residual(red, X)));
        } catch (const Error&) {
            break;
        }
        const double cand_norm = reduced_residual(red, candidate).norm();
        if (!(cand_norm < res_norm)) break;
        X = std::move(candidate);
        res_norm = cand_norm;
        ++sol.newton_steps;
    }

    if (!(spectral_abscissa(red.A - red.G * X) < 0.0))
        throw Error(ErrorCode::NoStabilizingSolution, "Riccati solution is not stabilizing");

    sol.residual = are_residual(A, B, Q, R, S, X);
    sol.X = std::move(X);
    return sol;
}

}  // namespace relaycancel
