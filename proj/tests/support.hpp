#pragma once

#include "relaycancel/discretize.hpp"
#include "relaycancel/lti.hpp"
#include "relaycancel/plant.hpp"

#include <Eigen/Eigenvalues>

#include <random>
#include <vector>

namespace testsupport {

using relaycancel::Matrix;
using relaycancel::StateSpace;
using relaycancel::TimeDomain;
using relaycancel::Vector;

inline Matrix gaussian(std::mt19937_64& rng, int rows, int cols) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

// Random discrete system with spectral radius `radius`.
inline StateSpace random_discrete(std::mt19937_64& rng, int n, int m, int p, double period, double radius = 0.9) {
    Matrix A = gaussian(rng, n, n);
    const double rho = Eigen::EigenSolver<Matrix>(A, false).eigenvalues().cwiseAbs().maxCoeff();
    A *= radius / std::max(rho, 1e-3);
    return {A, gaussian(rng, n, m), gaussian(rng, p, n), gaussian(rng, p, m), TimeDomain::discrete(period)};
}

// Random continuous system whose rightmost eigenvalue sits at -margin.
inline StateSpace random_continuous(std::mt19937_64& rng, int n, int m, int p, double margin = 0.1) {
    Matrix A = gaussian(rng, n, n);
    const double abscissa = Eigen::EigenSolver<Matrix>(A, false).eigenvalues().real().maxCoeff();
    A.diagonal().array() -= abscissa + margin;
    return {A, gaussian(rng, n, m), gaussian(rng, p, n), Matrix::Zero(p, m), TimeDomain::continuous()};
}

// Plain state recursion; one input column per time step.
inline Matrix simulate(const StateSpace& sys, const Matrix& inputs) {
    Vector x = Vector::Zero(sys.states());
    Matrix out(sys.outputs(), inputs.cols());
    for (Eigen::Index t = 0; t < inputs.cols(); ++t) {
        out.col(t) = sys.C() * x + sys.D() * inputs.col(t);
        x = sys.A() * x + sys.B() * inputs.col(t);
    }
    return out;
}

inline StateSpace tf(std::vector<double> num, std::vector<double> den) {
    return relaycancel::from_tf(num, den, TimeDomain::continuous());
}

// Paper example: P = 0.25/(s+1), weight 1/(2s+1), h = 1.
inline relaycancel::DesignProblem paper_problem(relaycancel::CancelerMode mode, double gain, double L = 1.0,
                                                int N = 16, double meas_reg = 1e-6) {
    return relaycancel::DesignProblem(tf({0.25}, {1, 1}), tf({gain}, {1}), tf({1}, {2, 1}),
                                      relaycancel::delay_decompose(L, 1.0, N), mode, meas_reg);
}

}  // namespace testsupport
