#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace relaycancel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Continuous time, or discrete time with a strictly positive sampling period.
class TimeDomain {
public:
    static TimeDomain continuous() { return TimeDomain{}; }
    static TimeDomain discrete(double period);

    bool is_discrete() const noexcept { return period_.has_value(); }
    bool is_continuous() const noexcept { return !period_.has_value(); }
    /// Sampling period; throws DomainMismatch for continuous domains.
    double period() const;

    /// Periods are compared with a 1e-12 relative tolerance.
    bool operator==(const TimeDomain& other) const noexcept;

private:
    std::optional<double> period_;
};

/// LTI system x' = Ax + Bu, y = Cx + Du (x' is dx/dt or x[n+1]).
///
/// A zero-state system is legal and represents the static map u -> D u.
class StateSpace {
public:
    StateSpace(Matrix A, Matrix B, Matrix C, Matrix D, TimeDomain domain);

    static StateSpace static_gain(const Matrix& D, TimeDomain domain);
    static StateSpace identity(int size, TimeDomain domain);

    const Matrix& A() const noexcept { return A_; }
    const Matrix& B() const noexcept { return B_; }
    const Matrix& C() const noexcept { return C_; }
    const Matrix& D() const noexcept { return D_; }
    const TimeDomain& domain() const noexcept { return domain_; }

    int states() const noexcept { return static_cast<int>(A_.rows()); }
    int inputs() const noexcept { return static_cast<int>(B_.cols()); }
    int outputs() const noexcept { return static_cast<int>(C_.rows()); }
    bool is_discrete() const noexcept { return domain_.is_discrete(); }

private:
    Matrix A_, B_, C_, D_;
    TimeDomain domain_;
};

/// Partitioned plant with inputs ordered [w; u] and outputs ordered [z; y].
struct GeneralizedPlant {
    StateSpace sys;
    int nw = 0;
    int nu = 0;
    int nz = 0;
    int ny = 0;

    GeneralizedPlant(StateSpace sys, int nw, int nu, int nz, int ny);

    Matrix B1() const { return sys.B().leftCols(nw); }
    Matrix B2() const { return sys.B().rightCols(nu); }
    Matrix C1() const { return sys.C().topRows(nz); }
    Matrix C2() const { return sys.C().bottomRows(ny); }
    Matrix D11() const { return sys.D().topLeftCorner(nz, nw); }
    Matrix D12() const { return sys.D().topRightCorner(nz, nu); }
    Matrix D21() const { return sys.D().bottomLeftCorner(ny, nw); }
    Matrix D22() const { return sys.D().bottomRightCorner(ny, nu); }

    /// The open-loop w -> z block.
    StateSpace p11() const;
};

/// Controllable canonical realization of num/den (coefficients in descending powers).
StateSpace from_tf(std::span<const double> numerator, std::span<const double> denominator,
                   TimeDomain domain);

/// Realization of `second` driven by `first` (transfer function second * first).
StateSpace series(const StateSpace& first, const StateSpace& second);

/// Block-diagonal stacking: inputs and outputs are concatenated.
StateSpace append(const StateSpace& a, const StateSpace& b);

/// Closed loop y = (I - loop_gain)^{-1} v.
StateSpace feedback_loop(const StateSpace& loop_gain);

struct StabilityReport {
    bool stable = false;
    /// Within 1e-9 of the stability boundary; reported as not stable.
    bool marginal = false;
    /// Spectral radius (discrete) or spectral abscissa (continuous).
    double measure = 0.0;
};

inline constexpr double kMarginalBand = 1e-9;

double spectral_radius(const Matrix& A);
double spectral_abscissa(const Matrix& A);
StabilityReport stability(const StateSpace& sys);
bool is_stable(const StateSpace& sys);

/// Frequency response at jw (continuous) or e^{j theta} (discrete).
std::vector<CMatrix> freq_response(const StateSpace& sys, std::span<const double> points);
CMatrix evaluate(const StateSpace& sys, Complex q);

double max_singular_value(const CMatrix& m);

struct HinfNorm {
    double value = 0.0;
    /// Frequency (rad/sample) at which the peak was found.
    double theta = 0.0;
    bool unstable = false;
};

/// l2-induced norm of a discrete system by dense grid plus golden-section
/// refinement. Unstable systems report +inf with `unstable` set.
HinfNorm hinf_norm(const StateSpace& sys, double rel_tol = 1e-6);

}  // namespace relaycancel
