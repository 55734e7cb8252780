#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace qdiode {

struct LeastSquaresOptions {
    double initial_damping = 1e-3;
    int max_iterations = 200;
    // Converged when an accepted step changes the cost by less than this
    // fraction of the previous cost.
    double relative_tolerance = 1e-10;
    // Relative step of the central-difference Jacobian.
    double difference_step = 1e-6;
};

struct LeastSquaresResult {
    Eigen::VectorXd params;
    Eigen::VectorXd residuals;
    Eigen::MatrixXd jacobian;  // at params
    double cost = 0.0;         // 0.5 * |r|^2
    int iterations = 0;
    bool converged = false;
    std::string message;

    double residual_norm() const { return residuals.norm(); }
    // s^2 (J^T J)^-1 with s^2 = |r|^2 / (m - n); empty if m <= n.
    Eigen::MatrixXd covariance() const;
};

using ResidualFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Damped Gauss-Newton (Levenberg-Marquardt with diagonal scaling) on a
// numerically differenced Jacobian.
LeastSquaresResult levenberg_marquardt(const ResidualFunction& residuals, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& opts = {});

}  // namespace qdiode
