#pragma once

#include <vector>

namespace oracle {

// Single-size instance of the reduced value recursion, written without any
// of the solver's closed forms: the Hamiltonian supremum is found by a
// dense search over the depth.
struct DenseInstance {
    double horizon = 1.0;
    double dt = 0.05;
    int q_min = -2;
    int q_max = 2;
    int size = 1;
    double lambda_bid = 0.2;
    double lambda_ask = 0.2;
    double kappa = 1.5;
    double alpha = 0.001;
    double phi = 0.001;
    double psi = 0.01;
    int lbar = 1;
    double nu = 0.001;
    double mu = 0.05;
    double p = 0.5;
    double rho = 0.0;  // price paid per unit taken, relative to mid
    double delta_lo = -5.0;
    double delta_hi = 10.0;
    double delta_step = 1e-4;
};

// h[level][(q - q_min) * (lbar + 1) + l], levels 0..n_t.
std::vector<std::vector<double>> dense_dp(const DenseInstance& inst);

}  // namespace oracle
