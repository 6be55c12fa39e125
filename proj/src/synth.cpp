#include "relaycancel/synth.hpp"

#include "relaycancel/error.hpp"
#include "relaycancel/riccati.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace relaycancel {

namespace {

double max_sv(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

Matrix inverse_checked(const Matrix& M, ErrorCode code, const char* what) {
    if (M.rows() == 0) return M;
    Eigen::PartialPivLU<Matrix> lu(M);
    if (!(lu.rcond() > 1e-14)) throw Error(code, what);
    return lu.inverse();
}

double min_eigenvalue(const Matrix& S) {
    if (S.rows() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// Continuous plant with D12 = [0; I], D21 = [0 I] and D22 removed, plus the
// transformations needed to map a controller back to the original signals.
struct NormalizedPlant {
    Matrix A, B1, B2, C1, C2, D11;
    int m1 = 0, m2 = 0, p1 = 0, p2 = 0;
    Matrix u_scale;  // u = u_scale * u_normalized
    Matrix y_scale;  // y_normalized = y_scale * (y - D22 u)
    Matrix D22;
    double d11_bound = 0.0;
};

NormalizedPlant normalize(const GeneralizedPlant& pc) {
    NormalizedPlant np;
    np.m1 = pc.nw;
    np.m2 = pc.nu;
    np.p1 = pc.nz;
    np.p2 = pc.ny;
    if (np.m2 > np.p1 || np.p2 > np.m1)
        throw Error(ErrorCode::RegularityViolation, "need dim(u) <= dim(z) and dim(y) <= dim(w)");

    const Matrix D12 = pc.D12(), D21 = pc.D21();
    Eigen::JacobiSVD<Matrix> svd12(D12, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::JacobiSVD<Matrix> svd21(D21, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector s12 = svd12.singularValues(), s21 = svd21.singularValues();
    if (np.m2 > 0 && !(s12(np.m2 - 1) > 1e-12 * std::max(1.0, s12(0))))
        throw Error(ErrorCode::RegularityViolation, "D12 does not have full column rank");
    if (np.p2 > 0 && !(s21(np.p2 - 1) > 1e-12 * std::max(1.0, s21(0))))
        throw Error(ErrorCode::RegularityViolation,
                    "D21 does not have full row rank (increase meas_reg)");

    // D12 = U1 S V'  ->  theta12 = [U2 U1], u = V S^{-1} u_normalized.
    const Matrix& U12 = svd12.matrixU();
    Matrix theta12(np.p1, np.p1);
    theta12 << U12.rightCols(np.p1 - np.m2), U12.leftCols(np.m2);
    np.u_scale = svd12.matrixV() * s12.head(np.m2).cwiseInverse().asDiagonal();

    // D21 = U S V1'  ->  theta21 = [V2 V1], y_normalized = S^{-1} U' y.
    const Matrix& V21 = svd21.matrixV();
    Matrix theta21(np.m1, np.m1);
    theta21 << V21.rightCols(np.m1 - np.p2), V21.leftCols(np.p2);
    np.y_scale = s21.head(np.p2).cwiseInverse().asDiagonal() * svd21.matrixU().transpose();

    np.A = pc.sys.A();
    np.B1 = pc.B1() * theta21;
    np.B2 = pc.B2() * np.u_scale;
    np.C1 = theta12.transpose() * pc.C1();
    np.C2 = np.y_scale * pc.C2();
    np.D11 = theta12.transpose() * pc.D11() * theta21;
    np.D22 = pc.D22();

    const int r = np.p1 - np.m2, c = np.m1 - np.p2;
    np.d11_bound = std::max(max_sv(np.D11.topRows(r)), max_sv(np.D11.leftCols(c)));
    return np;
}

struct GammaTest {
    bool feasible = false;
    std::string reason;
    Matrix X, Y;
    double x_residual = 0.0, y_residual = 0.0;
};

GammaTest test_gamma(const NormalizedPlant& np, double gamma) {
    GammaTest t;
    if (!(gamma > np.d11_bound * (1.0 + 1e-12))) {
        t.reason = "gamma below the feedthrough bound";
        return t;
    }
    const int n = static_cast<int>(np.A.rows());
    const double g2 = gamma * gamma;

    Matrix D1dot = Matrix::Zero(np.p1, np.m1 + np.m2);
    D1dot.leftCols(np.m1) = np.D11;
    D1dot.bottomRightCorner(np.m2, np.m2).setIdentity();
    Matrix Ddot1(np.p1 + np.p2, np.m1);
    Ddot1 << np.D11, Matrix::Zero(np.p2, np.m1 - np.p2), Matrix::Identity(np.p2, np.p2);

    Matrix R = D1dot.transpose() * D1dot;
    R.topLeftCorner(np.m1, np.m1).diagonal().array() -= g2;
    Matrix Rt = Ddot1 * Ddot1.transpose();
    Rt.topLeftCorner(np.p1, np.p1).diagonal().array() -= g2;

    Matrix B(n, np.m1 + np.m2);
    B << np.B1, np.B2;
    Matrix C(np.p1 + np.p2, n);
    C << np.C1, np.C2;

    try {
        const auto xs = solve_are(np.A, B, np.C1.transpose() * np.C1, R, np.C1.transpose() * D1dot);
        const auto ys = solve_are(np.A.transpose(), C.transpose(), np.B1 * np.B1.transpose(), Rt,
                                  np.B1 * Ddot1.transpose());
        t.X = xs.X;
        t.Y = ys.X;
        t.x_residual = xs.residual;
        t.y_residual = ys.residual;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoStabilizingSolution || e.code() == ErrorCode::IterationDivergence) {
            t.reason = e.what();
            return t;
        }
        std::ostringstream os;
        os.precision(17);
        os << "Riccati solve failed at gamma = " << gamma << ": " << e.what();
        throw Error(ErrorCode::NumericalFailure, os.str());
    }

    if (min_eigenvalue(t.X) < -1e-9 * std::max(1.0, t.X.norm())) {
        t.reason = "X is not positive semidefinite";
        return t;
    }
    if (min_eigenvalue(t.Y) < -1e-9 * std::max(1.0, t.Y.norm())) {
        t.reason = "Y is not positive semidefinite";
        return t;
    }
    if (!(spectral_radius(t.X * t.Y) < g2)) {
        t.reason = "coupling condition rho(XY) < gamma^2 fails";
        return t;
    }
    t.feasible = true;
    return t;
}

// Central controller for the normalized continuous plant, mapped back to the
// original (un-normalized, D22-carrying) continuous coordinates.
StateSpace central_controller(const NormalizedPlant& np, const GammaTest& t, double gamma) {
    const int n = static_cast<int>(np.A.rows());
    const int r = np.p1 - np.m2, c = np.m1 - np.p2;
    const double g2 = gamma * gamma;

    Matrix D1dot = Matrix::Zero(np.p1, np.m1 + np.m2);
    D1dot.leftCols(np.m1) = np.D11;
    D1dot.bottomRightCorner(np.m2, np.m2).setIdentity();
    Matrix Ddot1(np.p1 + np.p2, np.m1);
    Ddot1 << np.D11, Matrix::Zero(np.p2, c), Matrix::Identity(np.p2, np.p2);
    Matrix R = D1dot.transpose() * D1dot;
    R.topLeftCorner(np.m1, np.m1).diagonal().array() -= g2;
    Matrix Rt = Ddot1 * Ddot1.transpose();
    Rt.topLeftCorner(np.p1, np.p1).diagonal().array() -= g2;
    Matrix B(n, np.m1 + np.m2);
    B << np.B1, np.B2;
    Matrix C(np.p1 + np.p2, n);
    C << np.C1, np.C2;

    const Matrix F = -R.partialPivLu().solve(D1dot.transpose() * np.C1 + B.transpose() * t.X);
    const Matrix L = -Rt.transpose().partialPivLu().solve((np.B1 * Ddot1.transpose() + t.Y * C.transpose()).transpose())
                          .transpose();
    const Matrix F12 = F.middleRows(c, np.p2);
    const Matrix F2 = F.bottomRows(np.m2);
    const Matrix L12 = L.middleCols(r, np.m2);
    const Matrix L2 = L.rightCols(np.p2);

    const Matrix D1111 = np.D11.topLeftCorner(r, c);
    const Matrix D1112 = np.D11.topRightCorner(r, np.p2);
    const Matrix D1121 = np.D11.bottomLeftCorner(np.m2, c);
    const Matrix D1122 = np.D11.bottomRightCorner(np.m2, np.p2);
    Matrix Dhat = -D1122;
    if (r > 0 && c > 0) {
        Matrix inner = -D1111 * D1111.transpose();
        inner.diagonal().array() += g2;
        Dhat -= D1121 * D1111.transpose() * inner.partialPivLu().solve(D1112);
    }

    Matrix Zinv = -t.Y * t.X / g2;
    Zinv.diagonal().array() += 1.0;
    const Matrix Z = inverse_checked(Zinv, ErrorCode::NumericalFailure, "I - Y X / gamma^2 is singular");

    const Matrix C2F = np.C2 + F12;
    const Matrix Bk = -Z * L2 + Z * (np.B2 + L12) * Dhat;
    const Matrix Ck = F2 - Dhat * C2F;
    const Matrix Ak = np.A + B * F - Bk * C2F;

    // Undo the normalization: u = u_scale * K~ * y_scale * (y - D22 u).
    const Matrix Bk0 = Bk * np.y_scale;
    const Matrix Ck0 = np.u_scale * Ck;
    const Matrix Dk0 = np.u_scale * Dhat * np.y_scale;

    // Close the D22 loop: u = (I + K0 D22)^{-1} K0 y.
    Matrix I_KD = Dk0 * np.D22;
    I_KD.diagonal().array() += 1.0;
    const Matrix M = inverse_checked(I_KD, ErrorCode::AlgebraicLoop, "controller loop shift is ill-posed");
    const Matrix A_out = Ak - Bk0 * np.D22 * M * Ck0;
    const Matrix B_out = Bk0 - Bk0 * np.D22 * M * Dk0;
    return {A_out, B_out, M * Ck0, M * Dk0, TimeDomain::continuous()};
}

}  // namespace

StateSpace bilinear_d2c(const StateSpace& sys) {
    if (!sys.is_discrete()) throw Error(ErrorCode::DomainMismatch, "bilinear_d2c expects a discrete-time system");
    const int n = sys.states();
    Matrix ApI = sys.A();
    ApI.diagonal().array() += 1.0;
    const Matrix inv =
        inverse_checked(ApI, ErrorCode::PoleAtMinusOne, "system has a pole at z = -1 (maps to s = infinity)");
    const double r2 = std::sqrt(2.0);
    Matrix AmI = sys.A();
    AmI.diagonal().array() -= 1.0;
    const Matrix Ac = n > 0 ? Matrix(inv * AmI) : Matrix(0, 0);
    return {Ac, r2 * inv * sys.B(), r2 * sys.C() * inv, sys.D() - sys.C() * inv * sys.B(), TimeDomain::continuous()};
}

GeneralizedPlant bilinear_d2c(const GeneralizedPlant& plant) {
    return {bilinear_d2c(plant.sys), plant.nw, plant.nu, plant.nz, plant.ny};
}

StateSpace bilinear_c2d(const StateSpace& sys, double period) {
    if (sys.is_discrete()) throw Error(ErrorCode::DomainMismatch, "bilinear_c2d expects a continuous-time system");
    const int n = sys.states();
    Matrix ImA = -sys.A();
    ImA.diagonal().array() += 1.0;
    const Matrix inv =
        inverse_checked(ImA, ErrorCode::NumericalFailure, "system has a pole at s = 1 (maps to z = infinity)");
    const double r2 = std::sqrt(2.0);
    Matrix IpA = sys.A();
    IpA.diagonal().array() += 1.0;
    const Matrix Ad = n > 0 ? Matrix(inv * IpA) : Matrix(0, 0);
    return {Ad, r2 * inv * sys.B(), r2 * sys.C() * inv, sys.D() + sys.C() * inv * sys.B(),
            TimeDomain::discrete(period)};
}

StateSpace close_lft(const GeneralizedPlant& plant, const StateSpace& K) {
    if (!(K.domain() == plant.sys.domain()))
        throw Error(ErrorCode::DomainMismatch, "close_lft: controller and plant live in different time domains");
    if (K.inputs() != plant.ny || K.outputs() != plant.nu)
        throw Error(ErrorCode::DimensionMismatch, "close_lft: controller shape does not match the plant partition");

    const int n = plant.sys.states(), nk = K.states();
    const Matrix B1 = plant.B1(), B2 = plant.B2(), C1 = plant.C1(), C2 = plant.C2();
    const Matrix D11 = plant.D11(), D12 = plant.D12(), D21 = plant.D21(), D22 = plant.D22();

    Matrix I_DkD22 = -K.D() * D22;
    I_DkD22.diagonal().array() += 1.0;
    const Matrix M = inverse_checked(I_DkD22, ErrorCode::AlgebraicLoop, "close_lft: I - D_K D22 is singular");

    // u = Ux [x; xk] + Uw w
    Matrix Ux(plant.nu, n + nk);
    Ux << M * K.D() * C2, M * K.C();
    const Matrix Uw = M * K.D() * D21;
    Matrix Yx(plant.ny, n + nk);
    Yx << C2, Matrix::Zero(plant.ny, nk);
    Yx += D22 * Ux;
    const Matrix Yw = D21 + D22 * Uw;

    Matrix A = Matrix::Zero(n + nk, n + nk);
    A.topLeftCorner(n, n) = plant.sys.A();
    A.bottomRightCorner(nk, nk) = K.A();
    A.topRows(n) += B2 * Ux;
    A.bottomRows(nk) += K.B() * Yx;

    Matrix B(n + nk, plant.nw);
    B << B1 + B2 * Uw, K.B() * Yw;
    Matrix C(plant.nz, n + nk);
    C << C1, Matrix::Zero(plant.nz, nk);
    C += D12 * Ux;
    return {A, B, C, D11 + D12 * Uw, plant.sys.domain()};
}

SynthesisResult synthesize(const GeneralizedPlant& plant, const SynthesisOptions& options) {
    if (!plant.sys.is_discrete()) throw Error(ErrorCode::DomainMismatch, "synthesize expects a discrete plant");
    if (!(options.gamma_tol > 0.0 && options.gamma_tol < 0.5))
        throw Error(ErrorCode::InvalidArgument, "gamma_tol must lie in (0, 0.5)");
    const double h = plant.sys.domain().period();

    SynthesisResult result{Controller{StateSpace::static_gain(Matrix::Zero(plant.nu, plant.ny),
                                                              plant.sys.domain())},
                           SynthesisReport{}};
    auto& report = result.report;

    const auto open_loop = hinf_norm(plant.p11(), 1e-6);
    report.open_loop_norm = open_loop.value;
    if (!open_loop.unstable && open_loop.value <= 1e-12) {
        report.closed_loop_radius = spectral_radius(plant.sys.A());
        return result;
    }

    const NormalizedPlant np = normalize(bilinear_d2c(plant));

    std::vector<GammaProbe> history;
    auto probe = [&](double gamma) {
        GammaTest t = test_gamma(np, gamma);
        history.push_back({gamma, t.feasible});
        return t;
    };

    double hi = std::isfinite(open_loop.value) ? open_loop.value * (1.0 + options.gamma_tol)
                                               : std::max(1.0, 2.0 * np.d11_bound);
    GammaTest best = probe(hi);
    for (int i = 0; !best.feasible && i < 40; ++i) {
        hi *= 2.0;
        best = probe(hi);
    }
    if (!best.feasible) {
        std::ostringstream os;
        os << "no feasible gamma up to " << hi << " (" << best.reason << ")";
        throw Error(ErrorCode::Infeasible, os.str());
    }

    double lo = np.d11_bound;
    while (hi - lo > options.gamma_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        GammaTest t = probe(mid);
        if (t.feasible) {
            hi = mid;
            best = std::move(t);
        } else {
            lo = mid;
        }
    }

    const StateSpace Kc = central_controller(np, best, hi);
    Controller& K = result.controller;
    K.K = bilinear_c2d(Kc, h);
    K.gamma_achieved = hi;
    K.iterations = static_cast<int>(history.size());
    K.residuals = {best.x_residual, best.y_residual};

    const StateSpace cl = close_lft(plant, K.K);
    report.closed_loop_radius = spectral_radius(cl.A());
    if (!(report.closed_loop_radius < 1.0)) {
        std::ostringstream os;
        os.precision(17);
        os << "controller at gamma = " << hi << " does not stabilize the loop (radius "
           << report.closed_loop_radius << ")";
        throw Error(ErrorCode::NumericalFailure, os.str());
    }
    if (options.require_stable_controller && !(spectral_radius(K.K.A()) < 1.0))
        throw Error(ErrorCode::NumericalFailure, "synthesized controller is not stable");

    std::sort(history.begin(), history.end(), [](const auto& a, const auto& b) { return a.gamma < b.gamma; });
    report.gamma_history = std::move(history);
    report.gamma_opt = hi;
    report.order = K.order();
    return result;
}

namespace {

void write_matrix(std::ostringstream& os, const Matrix& M) {
    char buf[40];
    os << "[";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        os << (i ? ", [" : "[");
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
            os << (j ? ", " : "") << buf;
        }
        os << "]";
    }
    os << "]";
}

Matrix read_matrix(const nlohmann::json& j, const char* key, Eigen::Index cols_if_empty) {
    if (!j.contains(key) || !j[key].is_array())
        throw Error(ErrorCode::InvalidConfig, std::string("controller JSON: missing matrix '") + key + "'");
    const auto& rows = j[key];
    if (rows.empty()) return Matrix(0, cols_if_empty);
    const auto ncols = rows[0].size();
    if (ncols == 0) return Matrix(rows.size(), 0);
    Matrix M(rows.size(), ncols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows[r].is_array() || rows[r].size() != ncols)
            throw Error(ErrorCode::InvalidConfig, std::string("controller JSON: ragged matrix '") + key + "'");
        for (std::size_t c = 0; c < ncols; ++c) M(r, c) = rows[r][c].get<double>();
    }
    return M;
}

}  // namespace

std::string controller_to_json(const Controller& K) {
    std::ostringstream os;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", K.K.domain().period());
    os << "{\n  \"h\": " << buf << ",\n  \"A\": ";
    write_matrix(os, K.K.A());
    os << ",\n  \"B\": ";
    write_matrix(os, K.K.B());
    os << ",\n  \"C\": ";
    write_matrix(os, K.K.C());
    os << ",\n  \"D\": ";
    write_matrix(os, K.K.D());
    std::snprintf(buf, sizeof buf, "%.17g", K.gamma_achieved);
    os << ",\n  \"gamma\": " << buf << "\n}\n";
    return os.str();
}

Controller controller_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("controller JSON: ") + e.what());
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "h" && key != "A" && key != "B" && key != "C" && key != "D" && key != "gamma")
            throw Error(ErrorCode::InvalidConfig, "controller JSON: unknown key '" + key + "'");
    }
    if (!j.contains("h") || !j["h"].is_number() || !j.contains("gamma") || !j["gamma"].is_number())
        throw Error(ErrorCode::InvalidConfig, "controller JSON: 'h' and 'gamma' must be numbers");
    try {
        const Matrix D = read_matrix(j, "D", 0);
        const Matrix A = read_matrix(j, "A", 0);
        const Matrix B = read_matrix(j, "B", D.cols());
        const Matrix C = read_matrix(j, "C", A.rows());
        Controller K{StateSpace(A, B, C, D, TimeDomain::discrete(j["h"].get<double>()))};
        K.gamma_achieved = j["gamma"].get<double>();
        return K;
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("controller JSON: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("controller JSON: ") + e.what());
    }
}

}  // namespace relaycancel
