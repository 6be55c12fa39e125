#pragma once

#include "relaycancel/lti.hpp"

namespace relaycancel {

/// Loop delay L = m*h + (k/N)*h on the fast grid h/N.
struct DelaySpec {
    double L = 0.0;
    double h = 1.0;
    int N = 2;
    int m = 0;
    int k = 0;

    /// Total delay in fast steps of length h/N.
    int fast_steps() const noexcept { return m * N + k; }
};

/// Matrix exponential by scaling and squaring with a norm-selected Pade approximant.
Matrix expm(const Matrix& A);

/// Step-invariant (zero-order-hold) discretization with period h.
StateSpace c2d_zoh(const StateSpace& sys, double h);

/// Discrete-time lifting by N: a rate-T system becomes an N-wide rate-NT system.
StateSpace lift(const StateSpace& sys, int N);

/// Splits L into whole periods m and fast steps k; throws NonRepresentableDelay
/// when L is not on the h/N grid.
DelaySpec delay_decompose(double L, double h, int N);

struct Selectors {
    Matrix hold;          ///< H_N, N x 1 column of ones
    Matrix sample;        ///< S_N = e_1^T
    Matrix sample_at_k;   ///< S_{N,k} = e_{k+1}^T
};

Selectors selectors(int N, int k);

/// z^{-m} acting on N-wide signals: m*N shift states at the given period.
StateSpace lifted_delay(int m, int N, double period);

}  // namespace relaycancel
