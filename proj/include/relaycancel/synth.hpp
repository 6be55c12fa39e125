#pragma once

#include "relaycancel/lti.hpp"

#include <string>
#include <utility>
#include <vector>

namespace relaycancel {

/// Discrete controller K(z) at the slow period h.
struct Controller {
    StateSpace K;
    double gamma_achieved = 0.0;
    int iterations = 0;
    /// Relative residuals of the X and Y Riccati equations at gamma_achieved.
    std::pair<double, double> residuals{0.0, 0.0};

    int order() const noexcept { return K.states(); }
};

struct GammaProbe {
    double gamma = 0.0;
    bool feasible = false;
};

struct SynthesisReport {
    double gamma_opt = 0.0;
    /// Sorted by gamma.
    std::vector<GammaProbe> gamma_history;
    double closed_loop_radius = 0.0;
    int order = 0;
    /// Norm of the closed loop with K = 0 (the initial upper bracket when finite).
    double open_loop_norm = 0.0;
};

struct SynthesisOptions {
    double gamma_tol = 1e-3;
    /// Also require K itself to be stable (feedforward designs).
    bool require_stable_controller = false;
};

struct SynthesisResult {
    Controller controller;
    SynthesisReport report;
};

/// Bilinear map z = (1 + s) / (1 - s): discrete -> continuous. Throws
/// PoleAtMinusOne when A has an eigenvalue at z = -1.
StateSpace bilinear_d2c(const StateSpace& sys);
GeneralizedPlant bilinear_d2c(const GeneralizedPlant& plant);

/// Inverse map, producing a discrete system with the given period.
StateSpace bilinear_c2d(const StateSpace& sys, double period);

/// Lower LFT of the plant with u = K y.
StateSpace close_lft(const GeneralizedPlant& plant, const StateSpace& K);
inline StateSpace close_lft(const GeneralizedPlant& plant, const Controller& K) { return close_lft(plant, K.K); }

/// Discrete H-infinity synthesis by gamma bisection on the two-Riccati test.
SynthesisResult synthesize(const GeneralizedPlant& plant, const SynthesisOptions& options = {});

/// Controller export: {"h", "A", "B", "C", "D", "gamma"} with 17 significant digits.
std::string controller_to_json(const Controller& K);
Controller controller_from_json(const std::string& text);

}  // namespace relaycancel
