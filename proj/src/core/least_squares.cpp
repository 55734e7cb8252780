#include "qdiode/core/least_squares.hpp"

#include <algorithm>
#include <cmath>

#include "qdiode/core/error.hpp"

namespace qdiode {

Eigen::MatrixXd LeastSquaresResult::covariance() const {
    const auto m = residuals.size();
    const auto n = params.size();
    if (m <= n) return {};
    const double s2 = residuals.squaredNorm() / static_cast<double>(m - n);
    const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
    return s2 * jtj.completeOrthogonalDecomposition().pseudoInverse();
}

namespace {

Eigen::MatrixXd central_jacobian(const ResidualFunction& f, const Eigen::VectorXd& x,
                                 Eigen::Index m, double rel_step) {
    Eigen::MatrixXd jac(m, x.size());
    Eigen::VectorXd xp = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = rel_step * std::max(1.0, std::abs(x(k)));
        xp(k) = x(k) + h;
        const Eigen::VectorXd rp = f(xp);
        xp(k) = x(k) - h;
        const Eigen::VectorXd rm = f(xp);
        xp(k) = x(k);
        if (rp.size() != m || rm.size() != m)
            throw FitError("residual function changed its output length");
        jac.col(k) = (rp - rm) / (2.0 * h);
    }
    return jac;
}

}  // namespace

LeastSquaresResult levenberg_marquardt(const ResidualFunction& f, Eigen::VectorXd x0,
                                       const LeastSquaresOptions& opts) {
    LeastSquaresResult out;
    Eigen::VectorXd x = std::move(x0);
    Eigen::VectorXd r = f(x);
    if (!r.allFinite()) throw FitError("residuals are not finite at the initial guess");
    const Eigen::Index m = r.size();
    if (m < x.size()) throw FitError("fewer residuals than parameters");

    double cost = 0.5 * r.squaredNorm();
    double lambda = opts.initial_damping;
    Eigen::MatrixXd jac = central_jacobian(f, x, m, opts.difference_step);

    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd grad = jac.transpose() * r;
        Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-30);

        bool accepted = false;
        bool done = false;
        while (!accepted) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += lambda * scale;
            const Eigen::VectorXd step = a.ldlt().solve(-grad);
            const Eigen::VectorXd x_new = x + step;
            const Eigen::VectorXd r_new = f(x_new);
            const double cost_new = r_new.allFinite() ? 0.5 * r_new.squaredNorm()
                                                      : std::numeric_limits<double>::infinity();
            if (step.allFinite() && cost_new < cost) {
                accepted = true;
                const double change = cost - cost_new;
                const bool tiny_step = step.norm() <= 1e-14 * (x.norm() + 1e-14);
                x = x_new;
                r = r_new;
                cost = cost_new;
                lambda = std::max(lambda / 10.0, 1e-15);
                if (change <= opts.relative_tolerance * (cost + change) || cost == 0.0 || tiny_step)
                    done = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) {
                    // No descent direction left: x is stationary to working precision.
                    done = true;
                    break;
                }
            }
        }
        jac = central_jacobian(f, x, m, opts.difference_step);
        if (done) {
            out.converged = true;
            out.message = "converged";
            ++it;
            break;
        }
    }
    if (!out.converged) out.message = "iteration cap reached";

    out.params = x;
    out.residuals = r;
    out.jacobian = jac;
    out.cost = cost;
    out.iterations = it;
    return out;
}

}  // namespace qdiode
