#include "relaycancel/error.hpp"
#include "relaycancel/plant.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace relaycancel;
using testsupport::gaussian;
using testsupport::paper_problem;
using testsupport::tf;

namespace {

// Fast-rate responses built directly from the continuous blocks, no lifting involved.
Matrix fast_run(const StateSpace& continuous, double step, const Matrix& u) {
    return testsupport::simulate(c2d_zoh(continuous, step), u);
}

Matrix delay_fast(const Matrix& x, int steps) {
    Matrix out = Matrix::Zero(x.rows(), x.cols());
    if (steps < x.cols()) out.rightCols(x.cols() - steps) = x.leftCols(x.cols() - steps);
    return out;
}

Matrix unlift(const Matrix& lifted, int N) {
    Matrix fast(1, lifted.cols() * N);
    for (Eigen::Index p = 0; p < lifted.cols(); ++p)
        for (int j = 0; j < N; ++j) fast(0, p * N + j) = lifted(j, p);
    return fast;
}

}  // namespace

TEST_CASE("problem validation") {
    const auto P = tf({0.25}, {1, 1}), G = tf({2.5}, {1}), F = tf({1}, {2, 1});
    const auto delay = delay_decompose(1.0, 1.0, 16);
    const auto expect = [](auto&& fn) {
        try {
            fn();
            FAIL("expected InvalidProblem");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidProblem);
        }
    };
    expect([&] { DesignProblem(tf({1}, {1, -1}), G, F, delay, CancelerMode::Feedforward); });
    expect([&] { DesignProblem(P, G, tf({1, 0}, {1, 1}), delay, CancelerMode::Feedforward); });
    expect([&] { DesignProblem(P, G, F, delay, CancelerMode::Feedforward, -1.0); });
    expect([&] { DesignProblem(c2d_zoh(P, 1.0), G, F, delay, CancelerMode::Feedforward); });
}

TEST_CASE("paper feedforward plant: order and K = 0 norm") {
    const auto prob = paper_problem(CancelerMode::Feedforward, 2.5);
    const auto plant = build_ff_plant(prob, 16);
    // weight (1) + P (1) + one period of delay (16) states
    CHECK(plant.sys.states() == 18);
    CHECK(plant.nw == 17);
    CHECK(plant.nz == 16);
    CHECK(plant.D22().norm() == 0.0);
    CHECK(plant.B2().norm() == 0.0);
    // DC gain of delay * P * G * F is 0.25 * 2.5 * 1.
    CHECK(hinf_norm(plant.p11()).value == doctest::Approx(0.625).epsilon(1e-6));
}

TEST_CASE("feedback plant matches a fast-rate oracle, fractional delay") {
    const int N = 4;
    const double h = 1.0, L = 1.25;  // m = 1, k = 1
    const auto prob = DesignProblem(tf({0.25}, {1, 1}), tf({3.0}, {1}), tf({1}, {2, 1}),
                                    delay_decompose(L, h, N), CancelerMode::Feedback, 0.0);
    const auto plant = build_fb_plant(prob, N);
    CHECK(plant.nw == N);

    std::mt19937_64 rng(4);
    const int periods = 10;
    const Matrix w = gaussian(rng, N, periods);
    const Matrix u = gaussian(rng, 1, periods);
    Matrix in(N + 1, periods);
    in << w, u;
    const Matrix out = testsupport::simulate(plant.sys, in);

    const double step = h / N;
    const Matrix w_fast = unlift(w, N);
    Matrix u_fast(1, periods * N);
    for (int j = 0; j < periods * N; ++j) u_fast(0, j) = u(0, j / N);
    const Matrix v_fast = fast_run(prob.weight, step, w_fast);
    const Matrix c_fast = delay_fast(fast_run(series(prob.G, prob.P), step, u_fast), prob.delay.fast_steps());
    for (int n = 0; n < periods; ++n) {
        for (int j = 0; j < N; ++j) CHECK(std::abs(out(j, n) - (v_fast(0, n * N + j) - u(0, n))) < 1e-12);
        CHECK(std::abs(out(N, n) - (v_fast(0, n * N) + c_fast(0, n * N))) < 1e-12);
    }
}

TEST_CASE("feedback plant with whole-period delay and noise channel") {
    const auto prob = paper_problem(CancelerMode::Feedback, 1000.0, 1.0, 8);
    const auto plant = build_fb_plant(prob, 8);
    CHECK(plant.nw == 9);
    CHECK(plant.D21()(0, 8) == doctest::Approx(1e-6));
    // u -> y: one period of delay, then the sampled step response of PG.
    Matrix in = Matrix::Zero(10, 4);
    in(9, 0) = 1.0;
    const Matrix y = testsupport::simulate(plant.sys, in).row(8);
    const auto pg = c2d_zoh(series(prob.G, prob.P), 1.0);
    CHECK(y(0, 0) == 0.0);
    CHECK(y(0, 1) == 0.0);
    CHECK(std::abs(y(0, 2) - (pg.C() * pg.B())(0, 0)) < 1e-9);
}

TEST_CASE("feedforward plant matches a fast-rate oracle, fractional delay") {
    const int N = 4;
    const double h = 1.0, L = 1.25;
    const auto prob = DesignProblem(tf({0.25}, {1, 1}), tf({2.5}, {1}), tf({1}, {2, 1}),
                                    delay_decompose(L, h, N), CancelerMode::Feedforward, 1e-3);
    const auto plant = build_ff_plant(prob, N);

    std::mt19937_64 rng(6);
    const int periods = 10;
    const Matrix w = gaussian(rng, N, periods);
    const Matrix noise = gaussian(rng, 1, periods);
    const Matrix u = gaussian(rng, 1, periods);
    Matrix in(N + 2, periods);
    in << w, noise, u;
    const Matrix out = testsupport::simulate(plant.sys, in);

    const double step = h / N;
    const Matrix y_fast = fast_run(prob.weight, step, unlift(w, N));
    const Matrix c_fast = delay_fast(fast_run(series(prob.G, prob.P), step, y_fast), prob.delay.fast_steps());
    for (int n = 0; n < periods; ++n) {
        for (int j = 0; j < N; ++j) CHECK(std::abs(out(j, n) - (c_fast(0, n * N + j) - u(0, n))) < 1e-12);
        CHECK(std::abs(out(N, n) - (y_fast(0, n * N) + 1e-3 * noise(0, n))) < 1e-12);
    }
}

TEST_CASE("plant builders check mode and grid") {
    const auto ff = paper_problem(CancelerMode::Feedforward, 2.5);
    const auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    CHECK(code([&] { build_fb_plant(ff, 16); }) == ErrorCode::InvalidProblem);
    CHECK(code([&] { build_ff_plant(ff, 8); }) == ErrorCode::InvalidArgument);
    CHECK(code([&] { build_continuous_sigma(ff); }) == ErrorCode::InvalidProblem);
    CHECK(build_plant(ff, 16).sys.states() == 18);
}

TEST_CASE("continuous generalized plant entries") {
    const auto prob = paper_problem(CancelerMode::Feedback, 1000.0);
    const auto sigma = build_continuous_sigma(prob);
    const Complex s(0.0, 0.4);
    const CMatrix T = sigma.evaluate(s);
    const Complex W = 1.0 / (2.0 * s + 1.0);
    CHECK(std::abs(T(0, 0) - W) < 1e-12);
    CHECK(std::abs(T(0, 1) + 1.0) < 1e-15);
    CHECK(std::abs(T(1, 0) - W) < 1e-12);
    CHECK(std::abs(T(1, 1) - std::exp(-s) * 250.0 / (s + 1.0)) < 1e-9);
}
