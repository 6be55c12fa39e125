#include "relaycancel/discretize.hpp"
#include "relaycancel/error.hpp"
#include "support.hpp"

#include <doctest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

using namespace relaycancel;
using testsupport::gaussian;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("c2d_zoh first-order closed form") {
    const StateSpace sys(Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 0.25), Matrix::Ones(1, 1),
                         Matrix::Zero(1, 1), TimeDomain::continuous());
    const auto d = c2d_zoh(sys, 1.0);
    CHECK(std::abs(d.A()(0, 0) - std::exp(-1.0)) < 1e-12);
    CHECK(std::abs(d.B()(0, 0) - 0.25 * (1.0 - std::exp(-1.0))) < 1e-12);
    CHECK(d.domain() == TimeDomain::discrete(1.0));
}

TEST_CASE("c2d_zoh double integrator closed form") {
    Matrix A(2, 2);
    A << 0, 1, 0, 0;
    const StateSpace sys(A, Vector::Unit(2, 1), Vector::Unit(2, 0).transpose(), Matrix::Zero(1, 1),
                         TimeDomain::continuous());
    const double h = 0.3;
    const auto d = c2d_zoh(sys, h);
    CHECK(d.A()(0, 1) == doctest::Approx(h).epsilon(1e-14));
    CHECK(d.B()(0, 0) == doctest::Approx(h * h / 2).epsilon(1e-14));
    CHECK(d.B()(1, 0) == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("expm agrees with an independent implementation across norm ranges") {
    std::mt19937_64 rng(11);
    for (double scale : {1e-4, 1e-2, 0.2, 0.8, 2.0, 5.0, 40.0}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Matrix A = scale * gaussian(rng, 5, 5) / 5.0;
            const Matrix oracle = A.exp();
            const Matrix E = expm(A);
            CHECK((E - oracle).norm() <= 1e-11 * std::max(1.0, oracle.norm()));
        }
    }
    CHECK(code_of([] { expm(Matrix::Zero(2, 3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("c2d_zoh maps eigenvalues by exp(lambda h)") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto sys = testsupport::random_continuous(rng, 4, 1, 1, 0.2);
        const double h = 0.1 + 0.2 * trial / 20.0;
        const auto d = c2d_zoh(sys, h);
        const Eigen::VectorXcd lc = Eigen::EigenSolver<Matrix>(sys.A(), false).eigenvalues();
        const Eigen::VectorXcd ld = Eigen::EigenSolver<Matrix>(d.A(), false).eigenvalues();
        for (Eigen::Index i = 0; i < lc.size(); ++i) {
            const Complex target = std::exp(lc(i) * h);
            double best = 1e300;
            for (Eigen::Index j = 0; j < ld.size(); ++j) best = std::min(best, std::abs(ld(j) - target));
            CHECK(best < 1e-10);
        }
    }
}

TEST_CASE("c2d_zoh is step-invariant") {
    // The discrete step response equals the continuous one at the sample instants.
    const auto sys = testsupport::tf({1, 2}, {1, 3, 5});
    const double h = 0.25;
    const auto d = c2d_zoh(sys, h);
    const Matrix steps = Matrix::Ones(1, 12);
    const Matrix y = testsupport::simulate(d, steps);
    for (int n = 1; n < 12; ++n) {
        // Continuous step response from the augmented exponential.
        Matrix aug = Matrix::Zero(3, 3);
        aug.topLeftCorner(2, 2) = sys.A();
        aug.topRightCorner(2, 1) = sys.B();
        const Matrix E = (aug * (n * h)).exp();
        const double yc = (sys.C() * E.topRightCorner(2, 1))(0, 0);
        CHECK(std::abs(y(0, n) - yc) < 1e-12);
    }
}

TEST_CASE("c2d_zoh rejects bad arguments") {
    const auto sys = testsupport::tf({1}, {1, 1});
    CHECK(code_of([&] { c2d_zoh(sys, 0.0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { c2d_zoh(c2d_zoh(sys, 1.0), 1.0); }) == ErrorCode::DomainMismatch);
}

TEST_CASE("lift matches the rearranged fast-rate response") {
    std::mt19937_64 rng(5);
    for (int N : {1, 2, 3, 4}) {
        const auto fast = testsupport::random_discrete(rng, 3, 2, 2, 0.25);
        const auto lifted = lift(fast, N);
        CHECK(lifted.domain() == TimeDomain::discrete(0.25 * N));
        CHECK(lifted.inputs() == 2 * N);
        CHECK(lifted.outputs() == 2 * N);
        const int periods = 7;
        const Matrix u = gaussian(rng, 2, periods * N);
        const Matrix y = testsupport::simulate(fast, u);
        Matrix ul(2 * N, periods);
        for (int p = 0; p < periods; ++p)
            for (int j = 0; j < N; ++j) ul.block(2 * j, p, 2, 1) = u.col(p * N + j);
        const Matrix yl = testsupport::simulate(lifted, ul);
        for (int p = 0; p < periods; ++p)
            for (int j = 0; j < N; ++j) CHECK((yl.block(2 * j, p, 2, 1) - y.col(p * N + j)).norm() < 1e-12);
    }
}

TEST_CASE("lift preserves the induced norm") {
    std::mt19937_64 rng(9);
    const auto fast = testsupport::random_discrete(rng, 4, 1, 1, 0.5, 0.8);
    const double base = hinf_norm(fast).value;
    for (int N : {2, 4}) CHECK(hinf_norm(lift(fast, N)).value == doctest::Approx(base).epsilon(1e-5));
}

TEST_CASE("delay_decompose splits L on the fast grid") {
    const auto d = delay_decompose(1.0, 1.0, 16);
    CHECK(d.m == 1);
    CHECK(d.k == 0);
    const auto e = delay_decompose(1.25, 1.0, 8);
    CHECK(e.m == 1);
    CHECK(e.k == 2);
    CHECK(e.fast_steps() == 10);
    const auto z = delay_decompose(0.0, 2.0, 4);
    CHECK(z.fast_steps() == 0);
    CHECK(code_of([] { delay_decompose(0.3, 1.0, 16); }) == ErrorCode::NonRepresentableDelay);
    CHECK(code_of([] { delay_decompose(-1.0, 1.0, 16); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("selectors pick hold and sample positions") {
    const auto s = selectors(4, 2);
    CHECK(s.hold == Matrix::Ones(4, 1));
    CHECK(s.sample == Vector::Unit(4, 0).transpose());
    CHECK(s.sample_at_k == Vector::Unit(4, 2).transpose());
    CHECK(code_of([] { selectors(4, 4); }) == ErrorCode::IndexOutOfRange);
}

TEST_CASE("lifted_delay shifts whole periods") {
    const int N = 3, m = 2;
    const auto D = lifted_delay(m, N, 1.0);
    CHECK(D.states() == m * N);
    std::mt19937_64 rng(1);
    const Matrix u = gaussian(rng, N, 6);
    const Matrix y = testsupport::simulate(D, u);
    CHECK(y.leftCols(m).norm() == 0.0);
    CHECK((y.rightCols(6 - m) - u.leftCols(6 - m)).norm() == 0.0);
    const auto id = lifted_delay(0, N, 1.0);
    CHECK(id.states() == 0);
    CHECK(id.D() == Matrix::Identity(N, N));
}
