#pragma once

#include "relaycancel/lti.hpp"

namespace relaycancel {

struct AreSolution {
    Matrix X;
    /// ||A'X + XA - (XB+S)R^{-1}(B'X+S') + Q||_F / max(1, ||Q||_F)
    double residual = 0.0;
    int sign_iterations = 0;
    int newton_steps = 0;
};

/// Stabilizing solution of the continuous algebraic Riccati equation
///
///     A'X + XA - (XB + S) R^{-1} (B'X + S') + Q = 0
///
/// R only needs to be symmetric and invertible (indefinite R arises in H-infinity
/// problems). The stable invariant subspace of the Hamiltonian is extracted with
/// the matrix sign function and the result is polished with Newton steps.
AreSolution solve_are(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& S);

/// Residual of the equation above, relative to max(1, ||Q||_F).
double are_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R, const Matrix& S,
                    const Matrix& X);

/// Solves A'X + XA + C = 0 (Bartels-Stewart on the complex Schur form).
Matrix solve_lyapunov(const Matrix& A, const Matrix& C);

}  // namespace relaycancel
