#pragma once

#include "relaycancel/plant.hpp"
#include "relaycancel/synth.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace relaycancel {

/// Periodic square wave: +amplitude for the first half period, -amplitude for the second.
struct RectWave {
    double period = 8.0;
    double amplitude = 1.0;
};

/// Seeded Gaussian noise on [0, active), normalized to unit L2 norm.
struct FilteredNoise {
    std::uint64_t seed = 0;
    double active = 10.0;
};

/// Rectangular pulse of the given width at `start`, height 1/sqrt(width).
struct UnitNormPulse {
    double start = 0.0;
    double width = 1.0;
};

/// RectWave enters as the source signal v. The unit-norm kinds describe w and
/// are shaped by the weight: in feedback mode v = W w; in feedforward mode the
/// received line signal itself is prescribed, y = F w, and v is recovered from
/// the loop equation y = v + (e^{-Ls} P G - H K S) y.
using InputSpec = std::variant<RectWave, FilteredNoise, UnitNormPulse>;

bool is_weighted(const InputSpec& input) noexcept;

struct SimConfig {
    DesignProblem problem;
    std::optional<Controller> K;
    /// Fast substeps per period h; must be a multiple of the design N.
    int M = 64;
    double duration = 40.0;
    InputSpec input = RectWave{};
};

struct SimTrace {
    int rate = 0;  ///< samples per h
    double h = 1.0;
    std::vector<double> t, v, y, u, e;
    bool diverged = false;
    SimConfig config;

    double step() const noexcept { return h / rate; }
    std::size_t size() const noexcept { return t.size(); }
};

inline constexpr double kDivergenceThreshold = 1e9;

/// Fast-rate simulation of the relay loop with an optional canceler.
SimTrace run(const SimConfig& config);

/// The unit-norm w sequence (one value per fast step) for weighted inputs.
std::vector<double> unit_norm_input(const InputSpec& input, double step, std::size_t steps);

/// sqrt(sum x_i^2 * step)
double l2_norm(std::span<const double> samples, double step);

struct BoundReport {
    bool pass = false;
    double error_norm = 0.0;
    double bound = 0.0;
    /// error_norm / (gamma * w_norm); pass iff ratio <= 1 + tol.
    double ratio = 0.0;
};

BoundReport check_bound(const SimTrace& trace, double gamma, double w_norm, double tol = 0.02);

/// RMS(with.e) / RMS(without.e) over [t0, t1].
double rms_reduction(const SimTrace& with_canceler, const SimTrace& without, double t0, double t1);

/// CSV with header t,v,y,u,e and 15 significant digits.
void write_csv(const SimTrace& trace, std::ostream& out);

}  // namespace relaycancel
