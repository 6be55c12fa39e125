#include "relaycancel/plant.hpp"

#include "relaycancel/error.hpp"

#include <cmath>
#include <iostream>

namespace relaycancel {

namespace {

constexpr int kStateExplosion = 500;

void require_siso_continuous(const StateSpace& sys, const char* name) {
    if (sys.is_discrete())
        throw Error(ErrorCode::InvalidProblem, std::string(name) + " must be a continuous-time system");
    if (sys.inputs() != 1 || sys.outputs() != 1)
        throw Error(ErrorCode::InvalidProblem, std::string(name) + " must be single-input single-output");
}

void require_stable_strictly_proper(const StateSpace& sys, const char* name) {
    if (sys.D()(0, 0) != 0.0)
        throw Error(ErrorCode::InvalidProblem, std::string(name) + " must be strictly proper");
    if (!is_stable(sys)) throw Error(ErrorCode::InvalidProblem, std::string(name) + " must be stable");
}

void check_grid(const DesignProblem& prob, int N) {
    if (N < 2) throw Error(ErrorCode::InvalidArgument, "FSFH factor N must be at least 2");
    if (prob.delay.N != N)
        throw Error(ErrorCode::InvalidArgument, "delay was decomposed for N = " + std::to_string(prob.delay.N) +
                                                    " but the plant is built for N = " + std::to_string(N));
}

StateSpace fast_lifted(const StateSpace& sys, double h, int N) { return lift(c2d_zoh(sys, h / N), N); }

void warn_if_large(const GeneralizedPlant& plant) {
    if (plant.sys.states() > kStateExplosion)
        std::cerr << "warning: StateExplosion: generalized plant has " << plant.sys.states() << " states\n";
}

}  // namespace

std::string_view to_string(CancelerMode mode) noexcept {
    return mode == CancelerMode::Feedforward ? "feedforward" : "feedback";
}

DesignProblem::DesignProblem(StateSpace P_, StateSpace G_, StateSpace weight_, DelaySpec delay_,
                             CancelerMode mode_, double meas_reg_)
    : P(std::move(P_)), G(std::move(G_)), weight(std::move(weight_)), delay(delay_), mode(mode_),
      meas_reg(meas_reg_) {
    require_siso_continuous(P, "P");
    require_siso_continuous(G, "G");
    require_siso_continuous(weight, "weight");
    require_stable_strictly_proper(P, "P");
    require_stable_strictly_proper(weight, "weight");
    if (!(meas_reg >= 0.0) || !std::isfinite(meas_reg))
        throw Error(ErrorCode::InvalidProblem, "meas_reg must be a nonnegative finite number");
    if (!(delay.h > 0.0) || delay.N < 1 || delay.m < 0 || delay.k < 0 || delay.k >= delay.N)
        throw Error(ErrorCode::InvalidProblem, "malformed delay specification");
}

GeneralizedPlant build_fb_plant(const DesignProblem& prob, int N) {
    if (prob.mode != CancelerMode::Feedback)
        throw Error(ErrorCode::InvalidProblem, "build_fb_plant needs a feedback-mode problem");
    check_grid(prob, N);
    const double h = prob.h();
    const auto domain = TimeDomain::discrete(h);

    const StateSpace W = fast_lifted(prob.weight, h, N);
    const StateSpace Pl = fast_lifted(prob.P, h, N);
    const StateSpace Gl = fast_lifted(prob.G, h, N);

    // Sampling the delayed signal at nh reads fast sample n*N - (m*N + k),
    // which sits at position N - k of lifted period n - m - 1 when k > 0.
    const int m = prob.delay.k == 0 ? prob.delay.m : prob.delay.m + 1;
    const int k = prob.delay.k == 0 ? 0 : N - prob.delay.k;
    const auto sel = selectors(N, k);

    StateSpace t22 = series(StateSpace::static_gain(sel.hold, domain), Gl);
    t22 = series(t22, Pl);
    t22 = series(t22, lifted_delay(m, N, h));
    t22 = series(t22, StateSpace::static_gain(sel.sample_at_k, domain));

    const int nW = W.states(), n22 = t22.states(), n = nW + n22;
    const int extra = prob.meas_reg > 0.0 ? 1 : 0;
    const int nw = N + extra;

    Matrix A = Matrix::Zero(n, n);
    A.topLeftCorner(nW, nW) = W.A();
    A.bottomRightCorner(n22, n22) = t22.A();

    Matrix B = Matrix::Zero(n, nw + 1);
    B.topLeftCorner(nW, N) = W.B();
    B.bottomRightCorner(n22, 1) = t22.B();

    Matrix C = Matrix::Zero(N + 1, n);
    C.topLeftCorner(N, nW) = W.C();
    C.bottomLeftCorner(1, nW) = sel.sample * W.C();
    C.bottomRightCorner(1, n22) = t22.C();

    Matrix D = Matrix::Zero(N + 1, nw + 1);
    D.topLeftCorner(N, N) = W.D();
    D.topRightCorner(N, 1) = -sel.hold;
    D.bottomLeftCorner(1, N) = sel.sample * W.D();
    if (extra) D(N, N) = prob.meas_reg;
    D(N, nw) = t22.D()(0, 0);

    GeneralizedPlant plant({A, B, C, D, domain}, nw, 1, N, 1);
    warn_if_large(plant);
    return plant;
}

GeneralizedPlant build_ff_plant(const DesignProblem& prob, int N) {
    if (prob.mode != CancelerMode::Feedforward)
        throw Error(ErrorCode::InvalidProblem, "build_ff_plant needs a feedforward-mode problem");
    check_grid(prob, N);
    const double h = prob.h();
    const auto domain = TimeDomain::discrete(h);
    const auto sel = selectors(N, 0);

    const StateSpace F = fast_lifted(prob.weight, h, N);
    StateSpace path = series(fast_lifted(prob.G, h, N), fast_lifted(prob.P, h, N));
    if (prob.delay.k > 0) path = series(path, lift(lifted_delay(prob.delay.k, 1, h / N), N));
    path = series(path, lifted_delay(prob.delay.m, N, h));
    const StateSpace error_path = series(F, path);

    const int n = error_path.states(), nF = F.states();
    const int extra = prob.meas_reg > 0.0 ? 1 : 0;
    const int nw = N + extra;

    Matrix B = Matrix::Zero(n, nw + 1);
    B.leftCols(N) = error_path.B();

    Matrix C = Matrix::Zero(N + 1, n);
    C.topRows(N) = error_path.C();
    C.bottomLeftCorner(1, nF) = sel.sample * F.C();

    Matrix D = Matrix::Zero(N + 1, nw + 1);
    D.topLeftCorner(N, N) = error_path.D();
    D.topRightCorner(N, 1) = -sel.hold;
    D.bottomLeftCorner(1, N) = sel.sample * F.D();
    if (extra) D(N, N) = prob.meas_reg;

    GeneralizedPlant plant({error_path.A(), B, C, D, domain}, nw, 1, N, 1);
    warn_if_large(plant);
    return plant;
}

GeneralizedPlant build_plant(const DesignProblem& prob, int N) {
    return prob.mode == CancelerMode::Feedforward ? build_ff_plant(prob, N) : build_fb_plant(prob, N);
}

CMatrix ContinuousSigma::evaluate(Complex s) const {
    const Complex w = relaycancel::evaluate(weight, s)(0, 0);
    const Complex pg = relaycancel::evaluate(coupling, s)(0, 0) * std::exp(-delay * s);
    CMatrix out(2, 2);
    out << w, -1.0, w, pg;
    return out;
}

ContinuousSigma build_continuous_sigma(const DesignProblem& prob) {
    if (prob.mode != CancelerMode::Feedback)
        throw Error(ErrorCode::InvalidProblem, "the continuous generalized plant describes the feedback design");
    return {prob.weight, series(prob.G, prob.P), prob.delay.L};
}

}  // namespace relaycancel
