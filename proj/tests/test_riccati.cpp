#include "relaycancel/error.hpp"
#include "relaycancel/riccati.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace relaycancel;
using testsupport::gaussian;

namespace {

Matrix scalar(double x) { return Matrix::Constant(1, 1, x); }

}  // namespace

TEST_CASE("scalar Riccati oracles") {
    // -2X - X^2 + 1 = 0, stabilizing root -1 + sqrt(2)
    const auto a = solve_are(scalar(-1), scalar(1), scalar(1), scalar(1), scalar(0));
    CHECK(std::abs(a.X(0, 0) - (std::sqrt(2.0) - 1.0)) < 1e-10);
    // 2X - X^2 = 0 with an unstable A: only X = 2 stabilizes.
    const auto b = solve_are(scalar(1), scalar(1), scalar(0), scalar(1), scalar(0));
    CHECK(std::abs(b.X(0, 0) - 2.0) < 1e-10);
}

TEST_CASE("Riccati cross term folds into Q and A") {
    // S != 0 is equivalent to A - B R^{-1} S', Q - S R^{-1} S'.
    std::mt19937_64 rng(2);
    const int n = 4;
    const Matrix A = gaussian(rng, n, n), B = gaussian(rng, n, 2);
    const Matrix S = 0.1 * gaussian(rng, n, 2);
    const Matrix Q = Matrix::Identity(n, n) + S * S.transpose();
    const Matrix R = Matrix::Identity(2, 2);
    const auto with = solve_are(A, B, Q, R, S);
    const auto folded = solve_are(A - B * S.transpose(), B, Q - S * S.transpose(), R, Matrix::Zero(n, 2));
    CHECK((with.X - folded.X).norm() < 1e-9 * std::max(1.0, folded.X.norm()));
}

TEST_CASE("Riccati residual contract on random stabilizable instances") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 12;
        const Matrix A = gaussian(rng, n, n);
        const Matrix B = gaussian(rng, n, 2);
        const Matrix Cq = gaussian(rng, n, n);
        const Matrix Q = Cq.transpose() * Cq;
        const auto sol = solve_are(A, B, Q, Matrix::Identity(2, 2), Matrix::Zero(n, 2));
        CHECK(sol.residual <= 1e-9);
        CHECK(are_residual(A, B, Q, Matrix::Identity(2, 2), Matrix::Zero(n, 2), sol.X) <= 1e-9);
        CHECK((sol.X - sol.X.transpose()).norm() <= 1e-10 * std::max(1.0, sol.X.norm()));
        const Matrix Acl = A - B * B.transpose() * sol.X;
        CHECK(spectral_abscissa(Acl) < 0.0);
    }
}

TEST_CASE("indefinite R (H-infinity form)") {
    // A'X + XA - X (B2 B2' - B1 B1'/g^2) X + C'C = 0 written with R = diag(-g^2, 1).
    Matrix A(2, 2);
    A << -1, 1, 0, -2;
    Matrix B(2, 2);
    B << 1, 0, 0, 1;
    Matrix Q = Matrix::Identity(2, 2);
    Matrix R(2, 2);
    R << -25, 0, 0, 1;
    const auto sol = solve_are(A, B, Q, R, Matrix::Zero(2, 2));
    CHECK(sol.residual < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(sol.X).eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("Riccati failure modes") {
    // Uncontrollable unstable mode: no stabilizing solution.
    Matrix A(2, 2);
    A << 1, 0, 0, -1;
    const Matrix B = Vector::Unit(2, 1);
    try {
        solve_are(A, B, Matrix::Identity(2, 2), scalar(1), Matrix::Zero(2, 1));
        FAIL("expected NoStabilizingSolution");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoStabilizingSolution);
    }
    try {
        solve_are(scalar(-1), scalar(1), scalar(1), scalar(0), scalar(0));
        FAIL("expected InvalidArgument");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("Lyapunov solver") {
    std::mt19937_64 rng(8);
    const auto sys = testsupport::random_continuous(rng, 6, 1, 1, 0.5);
    const Matrix C = Matrix::Identity(6, 6);
    const Matrix X = solve_lyapunov(sys.A(), C);
    CHECK((sys.A().transpose() * X + X * sys.A() + C).norm() < 1e-10 * std::max(1.0, X.norm()));
}
