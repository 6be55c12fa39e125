#include "relaycancel/discretize.hpp"

#include "relaycancel/error.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace relaycancel {

namespace {

double norm1(const Matrix& A) { return A.cwiseAbs().colwise().sum().maxCoeff(); }

// Pade coefficients and 1-norm thresholds for double precision
// (Higham, "The scaling and squaring method for the matrix exponential revisited").
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                           30270240.0,    2162160.0,    110880.0,     3960.0,
                                           90.0,          1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};
constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

template <std::size_t K>
std::pair<Matrix, Matrix> pade_low(const Matrix& A, const std::array<double, K>& b) {
    const auto n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A;
    Matrix odd = b[1] * I, even = b[0] * I;
    Matrix power = I;
    for (std::size_t j = 2; j < K; j += 2) {
        power = power * A2;
        even += b[j] * power;
        if (j + 1 < K) odd += b[j + 1] * power;
    }
    return {A * odd, even};
}

std::pair<Matrix, Matrix> pade13(const Matrix& A) {
    const auto& b = kPade13;
    const auto n = A.rows();
    const Matrix I = Matrix::Identity(n, n);
    const Matrix A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
    const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
                          b[1] * I);
    const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
    return {U, V};
}

}  // namespace

Matrix expm(const Matrix& A) {
    if (A.rows() != A.cols()) throw Error(ErrorCode::DimensionMismatch, "expm: matrix must be square");
    const auto n = A.rows();
    if (n == 0) return A;
    if (!A.allFinite()) throw Error(ErrorCode::NumericalFailure, "expm: non-finite input");

    const double a_norm = norm1(A);
    int squarings = 0;
    std::pair<Matrix, Matrix> uv;
    if (a_norm <= kTheta3) {
        uv = pade_low(A, kPade3);
    } else if (a_norm <= kTheta5) {
        uv = pade_low(A, kPade5);
    } else if (a_norm <= kTheta7) {
        uv = pade_low(A, kPade7);
    } else if (a_norm <= kTheta9) {
        uv = pade_low(A, kPade9);
    } else {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(a_norm / kTheta13))));
        uv = pade13(A / std::ldexp(1.0, squarings));
    }
    const auto& [U, V] = uv;
    Eigen::PartialPivLU<Matrix> lu(V - U);
    Matrix E = lu.solve(V + U);
    for (int i = 0; i < squarings; ++i) E = E * E;
    if (!E.allFinite()) throw Error(ErrorCode::NumericalFailure, "expm: result overflowed");
    return E;
}

StateSpace c2d_zoh(const StateSpace& sys, double h) {
    if (sys.is_discrete()) throw Error(ErrorCode::DomainMismatch, "c2d_zoh expects a continuous-time system");
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "c2d_zoh: h must be positive");
    const int n = sys.states(), m = sys.inputs();
    Matrix aug = Matrix::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = sys.A() * h;
    aug.topRightCorner(n, m) = sys.B() * h;
    const Matrix E = expm(aug);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m), sys.C(), sys.D(), TimeDomain::discrete(h)};
}

StateSpace lift(const StateSpace& sys, int N) {
    if (!sys.is_discrete()) throw Error(ErrorCode::DomainMismatch, "lift expects a discrete-time system");
    if (N < 1) throw Error(ErrorCode::InvalidArgument, "lift: N must be at least 1");
    const int n = sys.states(), m = sys.inputs(), p = sys.outputs();
    const Matrix& A = sys.A();
    const Matrix& B = sys.B();
    const Matrix& C = sys.C();

    // powers[i] = A^i for i = 0..N
    std::vector<Matrix> powers(N + 1);
    powers[0] = Matrix::Identity(n, n);
    for (int i = 1; i <= N; ++i) powers[i] = powers[i - 1] * A;

    Matrix Bl(n, N * m), Cl(N * p, n), Dl = Matrix::Zero(N * p, N * m);
    for (int j = 0; j < N; ++j) Bl.middleCols(j * m, m) = powers[N - 1 - j] * B;
    for (int i = 0; i < N; ++i) Cl.middleRows(i * p, p) = C * powers[i];
    for (int i = 0; i < N; ++i) {
        Dl.block(i * p, i * m, p, m) = sys.D();
        for (int j = 0; j < i; ++j) Dl.block(i * p, j * m, p, m) = C * powers[i - j - 1] * B;
    }
    return {powers[N], Bl, Cl, Dl, TimeDomain::discrete(sys.domain().period() * N)};
}

DelaySpec delay_decompose(double L, double h, int N) {
    if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "delay: h must be positive");
    if (N < 1) throw Error(ErrorCode::InvalidArgument, "delay: N must be positive");
    if (!(L >= 0.0) || !std::isfinite(L)) throw Error(ErrorCode::InvalidArgument, "delay: L must be nonnegative");

    DelaySpec spec{L, h, N, 0, 0};
    spec.m = static_cast<int>(std::floor(L / h));
    spec.k = static_cast<int>(std::lround((L / h - spec.m) * N));
    if (spec.k == N) {
        ++spec.m;
        spec.k = 0;
    }
    const double represented = (spec.m + static_cast<double>(spec.k) / N) * h;
    if (std::abs(L - represented) > 1e-9 * h) {
        const double step = h / N;
        std::ostringstream os;
        os.precision(12);
        os << "L = " << L << " is not a multiple of h/N = " << step << "; nearest representable delays are "
           << std::floor(L / step) * step << " and " << std::ceil(L / step) * step;
        throw Error(ErrorCode::NonRepresentableDelay, os.str());
    }
    return spec;
}

Selectors selectors(int N, int k) {
    if (N < 1 || k < 0 || k >= N)
        throw Error(ErrorCode::IndexOutOfRange, "selectors: need 0 <= k < N, got N=" + std::to_string(N) +
                                                    ", k=" + std::to_string(k));
    Selectors s{Matrix::Ones(N, 1), Matrix::Zero(1, N), Matrix::Zero(1, N)};
    s.sample(0, 0) = 1.0;
    s.sample_at_k(0, k) = 1.0;
    return s;
}

StateSpace lifted_delay(int m, int N, double period) {
    if (m < 0 || N < 1) throw Error(ErrorCode::InvalidArgument, "lifted_delay: need m >= 0 and N >= 1");
    const auto domain = TimeDomain::discrete(period);
    if (m == 0) return StateSpace::identity(N, domain);
    // x_1 is the oldest block and the output; the input enters x_m.
    const int n = m * N;
    Matrix A = Matrix::Zero(n, n), B = Matrix::Zero(n, N), C = Matrix::Zero(N, n);
    for (int i = 0; i + 1 < m; ++i) A.block(i * N, (i + 1) * N, N, N).setIdentity();
    B.bottomRows(N).setIdentity();
    C.leftCols(N).setIdentity();
    return {A, B, C, Matrix::Zero(N, N), domain};
}

}  // namespace relaycancel
