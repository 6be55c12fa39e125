#pragma once

#include "relaycancel/discretize.hpp"
#include "relaycancel/lti.hpp"

#include <string_view>

namespace relaycancel {

enum class CancelerMode { Feedforward, Feedback };

std::string_view to_string(CancelerMode mode) noexcept;

/// Relay-loop model: coupling path P with delay L, relay amplifier G, and the
/// input-spectrum weight (F for feedforward, W for feedback).
struct DesignProblem {
    StateSpace P;
    StateSpace G;
    StateSpace weight;
    DelaySpec delay;
    CancelerMode mode = CancelerMode::Feedforward;
    /// Gain of the fictitious measurement-noise channel; 0 disables it.
    double meas_reg = 1e-6;

    /// Validates the blocks: all SISO and continuous, P and weight stable and
    /// strictly proper. Throws InvalidProblem.
    DesignProblem(StateSpace P, StateSpace G, StateSpace weight, DelaySpec delay, CancelerMode mode,
                  double meas_reg = 1e-6);

    double h() const noexcept { return delay.h; }
};

/// Lifted FSFH plant for the feedback canceler.
///
/// Inputs [w (N); noise (1, only when meas_reg > 0); u (1)], outputs [z (N); y (1)]:
///   z = W_dN w - H_N u
///   y = S_N W_dN w + S_{N,k'} z^{-m'} P_dN G_dN H_N u + meas_reg * noise
/// with (m', k') = (m, 0) when the delay is a whole number of periods and
/// (m + 1, N - k) otherwise.
GeneralizedPlant build_fb_plant(const DesignProblem& prob, int N);

/// Lifted FSFH model-matching plant for the feedforward canceler.
///
///   z = lift(delay * P * G * F) w - H_N u
///   y = S_N F_dN w + meas_reg * noise
/// The (2,2) block is identically zero.
GeneralizedPlant build_ff_plant(const DesignProblem& prob, int N);

/// Dispatches on prob.mode.
GeneralizedPlant build_plant(const DesignProblem& prob, int N);

/// Continuous generalized plant [[W, -1], [W, e^{-Ls} P G]] with the delay
/// kept as a pure-delay tag. Evaluation only; never used for synthesis.
struct ContinuousSigma {
    StateSpace weight;
    StateSpace coupling;  ///< P * G without the delay
    double delay = 0.0;

    /// 2x2 transfer matrix at s.
    CMatrix evaluate(Complex s) const;
};

ContinuousSigma build_continuous_sigma(const DesignProblem& prob);

}  // namespace relaycancel
