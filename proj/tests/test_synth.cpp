#include "relaycancel/error.hpp"
#include "relaycancel/synth.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace relaycancel;
using testsupport::paper_problem;

TEST_CASE("bilinear map round trip and frequency warping") {
    std::mt19937_64 rng(12);
    const auto d = testsupport::random_discrete(rng, 4, 2, 3, 0.5, 0.8);
    const auto c = bilinear_d2c(d);
    CHECK(c.domain().is_continuous());
    const auto back = bilinear_c2d(c, 0.5);
    for (double th : {0.0, 0.4, 1.3, 2.9}) {
        const CMatrix Gd = evaluate(d, std::polar(1.0, th));
        // z = e^{j theta} corresponds to s = j tan(theta / 2)
        CHECK((evaluate(c, Complex(0.0, std::tan(th / 2.0))) - Gd).norm() < 1e-11);
        CHECK((evaluate(back, std::polar(1.0, th)) - Gd).norm() < 1e-11);
    }
}

TEST_CASE("bilinear map rejects a pole at z = -1") {
    const StateSpace sys(Matrix::Constant(1, 1, -1.0), Matrix::Ones(1, 1), Matrix::Ones(1, 1), Matrix::Zero(1, 1),
                         TimeDomain::discrete(1.0));
    try {
        bilinear_d2c(sys);
        FAIL("expected PoleAtMinusOne");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::PoleAtMinusOne);
    }
}

TEST_CASE("close_lft against a hand-computed static loop") {
    // z = 2w + 3u, y = 5w + 7u, K = k: u = k y = 5k w / (1 - 7k)
    Matrix D(2, 2);
    D << 2, 3, 5, 7;
    const GeneralizedPlant plant(StateSpace::static_gain(D, TimeDomain::discrete(1.0)), 1, 1, 1, 1);
    const double k = 0.1;
    const auto cl = close_lft(plant, StateSpace::static_gain(Matrix::Constant(1, 1, k), TimeDomain::discrete(1.0)));
    CHECK(cl.D()(0, 0) == doctest::Approx(2.0 + 3.0 * 5.0 * k / (1.0 - 7.0 * k)));
}

TEST_CASE("close_lft with dynamics agrees with frequency-domain LFT") {
    std::mt19937_64 rng(21);
    const auto P = testsupport::random_discrete(rng, 4, 3, 3, 1.0, 0.7);
    const GeneralizedPlant plant(P, 2, 1, 2, 1);
    const auto K = testsupport::random_discrete(rng, 2, 1, 1, 1.0, 0.5);
    const auto cl = close_lft(plant, K);
    for (double th : {0.1, 1.0, 2.5}) {
        const Complex z = std::polar(1.0, th);
        const CMatrix G = evaluate(P, z);
        const CMatrix k = evaluate(K, z);
        const CMatrix G11 = G.topLeftCorner(2, 2), G12 = G.topRightCorner(2, 1);
        const CMatrix G21 = G.bottomLeftCorner(1, 2), G22 = G.bottomRightCorner(1, 1);
        const CMatrix I = CMatrix::Identity(1, 1);
        const CMatrix expected = G11 + G12 * k * (I - G22 * k).inverse() * G21;
        CHECK((evaluate(cl, z) - expected).norm() < 1e-10);
    }
}

TEST_CASE("paper feedforward synthesis") {
    const auto plant = build_ff_plant(paper_problem(CancelerMode::Feedforward, 2.5), 16);
    SynthesisOptions opts;
    opts.require_stable_controller = true;
    const auto res = synthesize(plant, opts);
    const auto& K = res.controller;
    CHECK(K.order() == 18);
    CHECK(K.gamma_achieved < 0.625);
    CHECK(res.report.open_loop_norm == doctest::Approx(0.625).epsilon(1e-6));
    CHECK(res.report.closed_loop_radius < 1.0);
    CHECK(spectral_radius(K.K.A()) < 1.0);
    CHECK(K.residuals.first < 1e-9);
    CHECK(K.residuals.second < 1e-9);
    const double achieved = hinf_norm(close_lft(plant, K)).value;
    CHECK(achieved <= K.gamma_achieved * 1.01);

    // Bisection history: every feasible probe lies above every infeasible one.
    double max_infeasible = 0.0, min_feasible = 1e300;
    for (const auto& p : res.report.gamma_history) {
        if (p.feasible)
            min_feasible = std::min(min_feasible, p.gamma);
        else
            max_infeasible = std::max(max_infeasible, p.gamma);
    }
    CHECK(max_infeasible < min_feasible);
    CHECK(min_feasible == K.gamma_achieved);
    CHECK((K.gamma_achieved - max_infeasible) <= 1e-3 * K.gamma_achieved);
}

TEST_CASE("synthesis is deterministic") {
    const auto plant = build_ff_plant(paper_problem(CancelerMode::Feedforward, 2.5, 1.0, 8), 8);
    CHECK(controller_to_json(synthesize(plant).controller) == controller_to_json(synthesize(plant).controller));
}

TEST_CASE("paper feedback synthesis stabilizes the loop") {
    const auto plant = build_fb_plant(paper_problem(CancelerMode::Feedback, 1000.0, 1.0, 8), 8);
    const auto res = synthesize(plant);
    CHECK(res.report.closed_loop_radius < 1.0);
    CHECK(hinf_norm(close_lft(plant, res.controller)).value <= res.controller.gamma_achieved * 1.01);
}

TEST_CASE("trivial plant yields the zero controller") {
    const auto plant = GeneralizedPlant(StateSpace::static_gain(Matrix::Zero(2, 2), TimeDomain::discrete(1.0)), 1, 1, 1, 1);
    const auto res = synthesize(plant);
    CHECK(res.controller.gamma_achieved == 0.0);
    CHECK(res.controller.K.D().norm() == 0.0);
}

TEST_CASE("controller JSON round trip is exact") {
    const auto plant = build_ff_plant(paper_problem(CancelerMode::Feedforward, 2.5, 1.0, 4), 4);
    const auto K = synthesize(plant).controller;
    const auto text = controller_to_json(K);
    const auto back = controller_from_json(text);
    CHECK(back.K.A() == K.K.A());
    CHECK(back.K.B() == K.K.B());
    CHECK(back.K.C() == K.K.C());
    CHECK(back.K.D() == K.K.D());
    CHECK(back.gamma_achieved == K.gamma_achieved);
    CHECK(controller_to_json(back) == text);
}

TEST_CASE("controller JSON rejects unknown keys and bad shapes") {
    const auto code = [](const std::string& text) {
        try {
            controller_from_json(text);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::IoError;
    };
    CHECK(code(R"({"h":1,"A":[],"B":[],"C":[],"D":[[0]],"gamma":1,"extra":2})") == ErrorCode::InvalidConfig);
    CHECK(code(R"({"h":1,"A":[[1,2],[3]],"B":[[1],[1]],"C":[[1,1]],"D":[[0]],"gamma":1})") ==
          ErrorCode::InvalidConfig);
    CHECK(code("not json") == ErrorCode::InvalidConfig);
    // Static gain: one output row with no state columns.
    CHECK(code(R"({"h":1,"A":[],"B":[],"C":[[]],"D":[[0.5]],"gamma":1})") == ErrorCode::IoError);
    CHECK(code(R"({"h":1,"A":[],"B":[],"C":[],"D":[[0.5]],"gamma":1})") == ErrorCode::InvalidConfig);
}
