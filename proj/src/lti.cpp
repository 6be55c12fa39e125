#include "relaycancel/lti.hpp"

#include "relaycancel/error.hpp"
#include "relaycancel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace relaycancel {

namespace {

std::string shape(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

void require_same_domain(const StateSpace& a, const StateSpace& b, const char* op) {
    if (!(a.domain() == b.domain()))
        throw Error(ErrorCode::DomainMismatch, std::string(op) + ": systems live in different time domains");
}

Eigen::VectorXcd eigenvalues(const Matrix& A) {
    if (A.rows() == 0) return {};
    Eigen::EigenSolver<Matrix> solver(A, false);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::NumericalFailure, "eigenvalue solver did not converge");
    return solver.eigenvalues();
}

std::vector<double> strip_leading_zeros(std::span<const double> coeffs) {
    auto first = std::find_if(coeffs.begin(), coeffs.end(), [](double c) { return c != 0.0; });
    return {first, coeffs.end()};
}

}  // namespace

TimeDomain TimeDomain::discrete(double period) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw Error(ErrorCode::InvalidArgument, "discrete period must be positive and finite");
    TimeDomain d;
    d.period_ = period;
    return d;
}

double TimeDomain::period() const {
    if (!period_) throw Error(ErrorCode::DomainMismatch, "continuous-time system has no sampling period");
    return *period_;
}

bool TimeDomain::operator==(const TimeDomain& other) const noexcept {
    if (period_.has_value() != other.period_.has_value()) return false;
    if (!period_) return true;
    return std::abs(*period_ - *other.period_) <= 1e-12 * std::max(*period_, *other.period_);
}

StateSpace::StateSpace(Matrix A, Matrix B, Matrix C, Matrix D, TimeDomain domain)
    : A_(std::move(A)), B_(std::move(B)), C_(std::move(C)), D_(std::move(D)), domain_(domain) {
    const auto n = A_.rows();
    const bool ok = A_.cols() == n && B_.rows() == n && C_.cols() == n && D_.rows() == C_.rows() &&
                    D_.cols() == B_.cols();
    if (!ok)
        throw Error(ErrorCode::DimensionMismatch, "inconsistent state-space dimensions: A " + shape(A_) +
                                                      ", B " + shape(B_) + ", C " + shape(C_) + ", D " +
                                                      shape(D_));
}

StateSpace StateSpace::static_gain(const Matrix& D, TimeDomain domain) {
    return {Matrix(0, 0), Matrix(0, D.cols()), Matrix(D.rows(), 0), D, domain};
}

StateSpace StateSpace::identity(int size, TimeDomain domain) {
    return static_gain(Matrix::Identity(size, size), domain);
}

GeneralizedPlant::GeneralizedPlant(StateSpace s, int w, int u, int z, int y)
    : sys(std::move(s)), nw(w), nu(u), nz(z), ny(y) {
    if (nw < 0 || nu < 0 || nz < 0 || ny < 0 || nw + nu != sys.inputs() || nz + ny != sys.outputs())
        throw Error(ErrorCode::DimensionMismatch, "generalized plant partition does not match the system");
}

StateSpace GeneralizedPlant::p11() const {
    return {sys.A(), B1(), C1(), D11(), sys.domain()};
}

StateSpace from_tf(std::span<const double> numerator, std::span<const double> denominator,
                   TimeDomain domain) {
    const auto den = strip_leading_zeros(denominator);
    if (den.empty()) throw Error(ErrorCode::ZeroDenominator, "denominator polynomial is identically zero");
    auto num = strip_leading_zeros(numerator);
    if (num.empty()) num = {0.0};

    const int n = static_cast<int>(den.size()) - 1;
    if (static_cast<int>(num.size()) - 1 > n)
        throw Error(ErrorCode::ImproperTransferFunction, "numerator degree exceeds denominator degree");

    const double lead = den.front();
    std::vector<double> a(n + 1), b(n + 1, 0.0);
    for (int i = 0; i <= n; ++i) a[i] = den[i] / lead;
    std::copy(num.begin(), num.end(), b.begin() + (n + 1 - static_cast<int>(num.size())));
    for (auto& c : b) c /= lead;

    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, 1), C(1, n), D(1, 1);
    D(0, 0) = b[0];
    for (int i = 0; i < n; ++i) {
        A(0, i) = -a[i + 1];
        C(0, i) = b[i + 1] - b[0] * a[i + 1];
        if (i + 1 < n) A(i + 1, i) = 1.0;
    }
    if (n > 0) B(0, 0) = 1.0;
    return {A, B, C, D, domain};
}

StateSpace series(const StateSpace& first, const StateSpace& second) {
    require_same_domain(first, second, "series");
    if (first.outputs() != second.inputs())
        throw Error(ErrorCode::DimensionMismatch, "series: output count of the first system (" +
                                                      std::to_string(first.outputs()) +
                                                      ") differs from input count of the second (" +
                                                      std::to_string(second.inputs()) + ")");
    const int n1 = first.states(), n2 = second.states();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
    A.topLeftCorner(n1, n1) = first.A();
    A.bottomLeftCorner(n2, n1) = second.B() * first.C();
    A.bottomRightCorner(n2, n2) = second.A();
    Matrix B(n1 + n2, first.inputs());
    B.topRows(n1) = first.B();
    B.bottomRows(n2) = second.B() * first.D();
    Matrix C(second.outputs(), n1 + n2);
    C.leftCols(n1) = second.D() * first.C();
    C.rightCols(n2) = second.C();
    return {A, B, C, second.D() * first.D(), first.domain()};
}

StateSpace append(const StateSpace& a, const StateSpace& b) {
    require_same_domain(a, b, "append");
    const int n1 = a.states(), n2 = b.states();
    const int m1 = a.inputs(), m2 = b.inputs(), p1 = a.outputs(), p2 = b.outputs();
    Matrix A = Matrix::Zero(n1 + n2, n1 + n2), B = Matrix::Zero(n1 + n2, m1 + m2);
    Matrix C = Matrix::Zero(p1 + p2, n1 + n2), D = Matrix::Zero(p1 + p2, m1 + m2);
    A.topLeftCorner(n1, n1) = a.A();
    A.bottomRightCorner(n2, n2) = b.A();
    B.topLeftCorner(n1, m1) = a.B();
    B.bottomRightCorner(n2, m2) = b.B();
    C.topLeftCorner(p1, n1) = a.C();
    C.bottomRightCorner(p2, n2) = b.C();
    D.topLeftCorner(p1, m1) = a.D();
    D.bottomRightCorner(p2, m2) = b.D();
    return {A, B, C, D, a.domain()};
}

StateSpace feedback_loop(const StateSpace& loop_gain) {
    if (loop_gain.inputs() != loop_gain.outputs())
        throw Error(ErrorCode::DimensionMismatch, "feedback_loop: loop gain must be square");
    const int p = loop_gain.outputs();
    const Matrix I_minus_D = Matrix::Identity(p, p) - loop_gain.D();
    Eigen::PartialPivLU<Matrix> lu(I_minus_D);
    if (p > 0 && !(lu.rcond() > 1e-13))
        throw Error(ErrorCode::AlgebraicLoop, "feedback_loop: I - D is singular (ill-posed loop)");
    const Matrix M = p > 0 ? lu.inverse() : Matrix(0, 0);
    const Matrix& A = loop_gain.A();
    const Matrix& B = loop_gain.B();
    const Matrix& C = loop_gain.C();
    return {A + B * M * C, B * M, M * C, M, loop_gain.domain()};
}

double spectral_radius(const Matrix& A) {
    const auto ev = eigenvalues(A);
    double r = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::max(r, std::abs(ev[i]));
    return r;
}

double spectral_abscissa(const Matrix& A) {
    const auto ev = eigenvalues(A);
    double r = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ev.size(); ++i) r = std::max(r, ev[i].real());
    return r;
}

StabilityReport stability(const StateSpace& sys) {
    StabilityReport report;
    if (sys.is_discrete()) {
        report.measure = spectral_radius(sys.A());
        report.marginal = std::abs(report.measure - 1.0) <= kMarginalBand;
        report.stable = report.measure < 1.0 && !report.marginal;
    } else {
        report.measure = spectral_abscissa(sys.A());
        report.marginal = std::abs(report.measure) <= kMarginalBand;
        report.stable = report.measure < 0.0 && !report.marginal;
    }
    return report;
}

bool is_stable(const StateSpace& sys) { return stability(sys).stable; }

CMatrix evaluate(const StateSpace& sys, Complex q) {
    const int n = sys.states();
    CMatrix D = sys.D().cast<Complex>();
    if (n == 0) return D;
    CMatrix resolvent = -sys.A().cast<Complex>();
    resolvent.diagonal().array() += q;
    Eigen::PartialPivLU<CMatrix> lu(resolvent);
    if (!(lu.rcond() > 1e-14)) {
        std::ostringstream os;
        os << "resolvent (qI - A) is singular at q = " << q;
        throw Error(ErrorCode::SingularResolvent, os.str());
    }
    return sys.C().cast<Complex>() * lu.solve(sys.B().cast<Complex>()) + D;
}

std::vector<CMatrix> freq_response(const StateSpace& sys, std::span<const double> points) {
    std::vector<CMatrix> out;
    out.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double f = points[i];
        const Complex q = sys.is_discrete() ? std::polar(1.0, f) : Complex(0.0, f);
        try {
            out.push_back(evaluate(sys, q));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SingularResolvent) throw;
            std::ostringstream os;
            os << e.what() << " (point " << i << ", frequency " << f << ")";
            throw Error(ErrorCode::SingularResolvent, os.str());
        }
    }
    return out;
}

double max_singular_value(const CMatrix& m) {
    if (m.size() == 0) return 0.0;
    if (m.rows() == 1 || m.cols() == 1) return m.norm();
    // Largest eigenvalue of the smaller Gram matrix.
    const CMatrix gram = m.rows() <= m.cols() ? CMatrix(m * m.adjoint()) : CMatrix(m.adjoint() * m);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(gram, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorCode::NumericalFailure, "singular value computation did not converge");
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

HinfNorm hinf_norm(const StateSpace& sys, double rel_tol) {
    if (!sys.is_discrete()) throw Error(ErrorCode::DomainMismatch, "hinf_norm expects a discrete-time system");
    if (!(rel_tol > 0.0 && rel_tol <= 1e-2))
        throw Error(ErrorCode::InvalidArgument, "hinf_norm: rel_tol must lie in (0, 1e-2]");

    HinfNorm result;
    if (!is_stable(sys)) {
        result.value = std::numeric_limits<double>::infinity();
        result.unstable = true;
        return result;
    }
    if (sys.states() == 0 || sys.inputs() == 0 || sys.outputs() == 0) {
        result.value = max_singular_value(sys.D().cast<Complex>());
        return result;
    }

    const auto gain = [&](double theta) { return max_singular_value(evaluate(sys, std::polar(1.0, theta))); };

    // 1024 linear points plus 1024 log-spaced points concentrated near DC.
    constexpr int kLinear = 1024, kLog = 1024;
    const double pi = std::numbers::pi;
    std::vector<double> grid;
    grid.reserve(kLinear + kLog + 1);
    for (int i = 0; i < kLinear; ++i) grid.push_back(pi * i / (kLinear - 1));
    for (int i = 0; i < kLog; ++i) grid.push_back(std::pow(10.0, -6.0 + 6.0 * i / (kLog - 1)) * pi);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::vector<double> values(grid.size());
    parallel_for(static_cast<int>(grid.size()), [&](int i) { values[i] = gain(grid[i]); });

    std::size_t champion = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[champion]) champion = i;
    result.value = values[champion];
    result.theta = grid[champion];

    // Refine the strongest local maxima; the champion is always among them.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool left = i == 0 || values[i] >= values[i - 1];
        const bool right = i + 1 == values.size() || values[i] >= values[i + 1];
        if (left && right) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return values[a] > values[b]; });
    if (peaks.size() > 8) peaks.resize(8);

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (const auto idx : peaks) {
        double lo = grid[idx == 0 ? 0 : idx - 1];
        double hi = grid[std::min(idx + 1, grid.size() - 1)];
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        double f1 = gain(x1), f2 = gain(x2);
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (hi - lo <= 1e-2 * rel_tol * std::max(mid, 1e-8)) break;
            if (f1 < f2) {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = gain(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = gain(x1);
            }
        }
        for (const auto& [x, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
            if (f > result.value) {
                result.value = f;
                result.theta = x;
            }
        }
    }
    return result;
}

}  // namespace relaycancel
