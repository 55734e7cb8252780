#pragma once

// Dense operator algebra for one or two qubits and the Lindblad machinery
// built on top of it.
//
// Conventions, fixed for the whole library:
//   * single-qubit basis {|g>, |e>}, sigma_z = diag(+1, -1), sigma_- = |g><e|;
//   * two-qubit basis {|gg>, |ge>, |eg>, |ee>} with qubit 1 the left factor;
//   * superoperators act on column-stacked density matrices, so
//     vec(A X B) = (B^T kron A) vec(X).

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace qdiode {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

namespace ops {

ComplexMatrix identity(Eigen::Index d);
ComplexMatrix sigma_minus();
ComplexMatrix sigma_plus();
ComplexMatrix sigma_z();

// Operator of qubit `which` (0 or 1) embedded in the two-qubit space.
ComplexMatrix on_qubit(const ComplexMatrix& single, int which);

}  // namespace ops

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

double hermiticity_error(const ComplexMatrix& a);

// Column-stacking vectorization.
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v);

class DensityOperator {
public:
    static constexpr double kTraceTolerance = 1e-10;
    static constexpr double kHermitianTolerance = 1e-10;
    static constexpr double kPositivityTolerance = 1e-9;

    // Validates trace, hermiticity and positivity; throws InvalidArgument.
    explicit DensityOperator(ComplexMatrix m);

    // Pure state |psi><psi| of a normalized vector.
    static DensityOperator pure(const ComplexVector& psi);
    // Basis projector |k><k| in dimension d.
    static DensityOperator basis(Eigen::Index d, Eigen::Index k);

    const ComplexMatrix& matrix() const { return m_; }
    Eigen::Index dim() const { return m_.rows(); }
    Complex expectation(const ComplexMatrix& op) const { return (op * m_).trace(); }
    Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    ComplexMatrix m_;
};

double trace_distance(const DensityOperator& a, const DensityOperator& b);

// A jump operator with its (non-negative) rate: contributes rate * D[op].
struct Jump {
    double rate = 0.0;
    ComplexMatrix op;
};

class LiouvillianOperator {
public:
    // Wraps an already assembled superoperator (d^2 x d^2).
    explicit LiouvillianOperator(ComplexMatrix superop);

    const ComplexMatrix& matrix() const { return l_; }
    Eigen::Index hilbert_dim() const { return dim_; }
    double norm() const { return l_.norm(); }

    ComplexMatrix apply(const ComplexMatrix& rho) const;

private:
    ComplexMatrix l_;
    Eigen::Index dim_;
};

// D[X] rho = X rho X^+ - (X^+X rho + rho X^+X)/2.
ComplexMatrix dissipator_apply(const ComplexMatrix& x, const ComplexMatrix& rho);
ComplexMatrix dissipator_apply(const ComplexMatrix& x, const DensityOperator& rho);

// -i[H, .] + sum_k rate_k D[X_k], vectorized.
LiouvillianOperator liouvillian_matrix(const ComplexMatrix& h, std::span<const Jump> jumps);

// Direct evaluation of the master-equation right-hand side (no superoperator).
ComplexMatrix master_equation_rhs(const ComplexMatrix& h, std::span<const Jump> jumps,
                                  const ComplexMatrix& rho);

struct SteadyStateOptions {
    // Singular values below degeneracy_tolerance * sigma_max count as null.
    double degeneracy_tolerance = 1e-10;
    // Accepted residual ||L vec(rho)|| relative to ||L||.
    double residual_tolerance = 1e-9;
};

// Unique steady state via the smallest right-singular vector of L.
DensityOperator steady_state(const LiouvillianOperator& l, const SteadyStateOptions& opts = {});

// Dimension of the numerical null space (the quantity steady_state checks).
int null_space_dimension(const LiouvillianOperator& l, double tolerance = 1e-10);

// exp(L t) as a d^2 x d^2 matrix.
ComplexMatrix propagator(const LiouvillianOperator& l, double t);

DensityOperator evolve(const DensityOperator& rho0, const LiouvillianOperator& l, double t);

}  // namespace qdiode
