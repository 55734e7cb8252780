#include "qdiode/core/operators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qdiode/core/error.hpp"

namespace qdiode {

namespace ops {

ComplexMatrix identity(Eigen::Index d) { return ComplexMatrix::Identity(d, d); }

ComplexMatrix sigma_minus() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

ComplexMatrix sigma_plus() { return sigma_minus().adjoint(); }

ComplexMatrix sigma_z() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    return m;
}

ComplexMatrix on_qubit(const ComplexMatrix& single, int which) {
    if (which == 0) return kron(single, identity(2));
    if (which == 1) return kron(identity(2), single);
    throw InvalidArgument("qubit index must be 0 or 1");
}

}  // namespace ops

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    const Eigen::Index rb = b.rows();
    const Eigen::Index cb = b.cols();
    ComplexMatrix out(a.rows() * rb, a.cols() * cb);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    return out;
}

double hermiticity_error(const ComplexMatrix& a) {
    if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

ComplexVector vec(const ComplexMatrix& m) {
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v) {
    const auto d = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw InvalidArgument("unvec: length is not a perfect square");
    return Eigen::Map<const ComplexMatrix>(v.data(), d, d);
}

// ---------------------------------------------------------------------------
// DensityOperator

DensityOperator::DensityOperator(ComplexMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || (m_.rows() != 2 && m_.rows() != 4))
        throw InvalidArgument("density operator must be 2x2 or 4x4");
    if (!m_.allFinite()) throw InvalidArgument("density operator has non-finite entries");
    const Complex tr = m_.trace();
    if (std::abs(tr - 1.0) > kTraceTolerance)
        throw InvalidArgument("density operator trace " + std::to_string(tr.real()) + " != 1");
    if (hermiticity_error(m_) > kHermitianTolerance)
        throw InvalidArgument("density operator is not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPositivityTolerance)
        throw InvalidArgument("density operator has a negative eigenvalue " +
                              std::to_string(es.eigenvalues().minCoeff()));
}

DensityOperator DensityOperator::pure(const ComplexVector& psi) {
    return DensityOperator(psi * psi.adjoint());
}

DensityOperator DensityOperator::basis(Eigen::Index d, Eigen::Index k) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    m(k, k) = 1.0;
    return DensityOperator(std::move(m));
}

double trace_distance(const DensityOperator& a, const DensityOperator& b) {
    const ComplexMatrix diff = a.matrix() - b.matrix();
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (diff + diff.adjoint()),
                                                    Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Liouvillian

LiouvillianOperator::LiouvillianOperator(ComplexMatrix superop) : l_(std::move(superop)) {
    if (l_.rows() != l_.cols()) throw InvalidArgument("Liouvillian must be square");
    dim_ = static_cast<Eigen::Index>(std::lround(std::sqrt(static_cast<double>(l_.rows()))));
    if (dim_ * dim_ != l_.rows()) throw InvalidArgument("Liouvillian size is not d^2");
}

ComplexMatrix LiouvillianOperator::apply(const ComplexMatrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_)
        throw InvalidArgument("Liouvillian applied to a state of the wrong dimension");
    return unvec(l_ * vec(rho));
}

ComplexMatrix dissipator_apply(const ComplexMatrix& x, const ComplexMatrix& rho) {
    if (x.rows() != x.cols() || x.rows() != rho.rows() || rho.rows() != rho.cols())
        throw InvalidArgument("dissipator: dimension mismatch");
    const ComplexMatrix xdx = x.adjoint() * x;
    return x * rho * x.adjoint() - 0.5 * (xdx * rho + rho * xdx);
}

ComplexMatrix dissipator_apply(const ComplexMatrix& x, const DensityOperator& rho) {
    return dissipator_apply(x, rho.matrix());
}

namespace {

void check_generator(const ComplexMatrix& h, std::span<const Jump> jumps) {
    if (h.rows() != h.cols()) throw InvalidArgument("Hamiltonian must be square");
    // Hamiltonians are in rad/s, so hermiticity is judged relative to their scale.
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if (hermiticity_error(h) > 1e-9 * scale) throw InvalidArgument("Hamiltonian is not Hermitian");
    for (const auto& j : jumps) {
        if (!(j.rate >= 0.0)) throw InvalidArgument("jump rate must be non-negative");
        if (j.op.rows() != h.rows() || j.op.cols() != h.cols())
            throw InvalidArgument("jump operator dimension mismatch");
    }
}

}  // namespace

LiouvillianOperator liouvillian_matrix(const ComplexMatrix& h, std::span<const Jump> jumps) {
    check_generator(h, jumps);
    const Eigen::Index d = h.rows();
    const ComplexMatrix id = ops::identity(d);
    const Complex i(0.0, 1.0);
    ComplexMatrix l = -i * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& j : jumps) {
        if (j.rate == 0.0) continue;
        const ComplexMatrix xdx = j.op.adjoint() * j.op;
        l += j.rate * (kron(j.op.conjugate(), j.op) -
                       0.5 * (kron(id, xdx) + kron(xdx.transpose(), id)));
    }
    return LiouvillianOperator(std::move(l));
}

ComplexMatrix master_equation_rhs(const ComplexMatrix& h, std::span<const Jump> jumps,
                                  const ComplexMatrix& rho) {
    check_generator(h, jumps);
    const Complex i(0.0, 1.0);
    ComplexMatrix out = -i * (h * rho - rho * h);
    for (const auto& j : jumps) out += j.rate * dissipator_apply(j.op, rho);
    return out;
}

// ---------------------------------------------------------------------------
// Steady state and time evolution

int null_space_dimension(const LiouvillianOperator& l, double tolerance) {
    Eigen::JacobiSVD<ComplexMatrix> svd(l.matrix());
    const auto& s = svd.singularValues();
    const double cutoff = tolerance * s(0);
    return static_cast<int>((s.array() <= cutoff).count());
}

DensityOperator steady_state(const LiouvillianOperator& l, const SteadyStateOptions& opts) {
    const ComplexMatrix& m = l.matrix();
    if (!m.allFinite()) throw SolverError("steady state: Liouvillian has non-finite entries");

    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const Eigen::Index n = s.size();
    if (!s.allFinite()) throw SolverError("steady state: singular value decomposition failed");

    const double cutoff = opts.degeneracy_tolerance * s(0);
    const auto nullity = (s.array() <= cutoff).count();
    if (nullity != 1) {
        throw SolverError("steady state: null space has dimension " + std::to_string(nullity) +
                          " (expected 1)");
    }

    ComplexMatrix rho = unvec(svd.matrixV().col(n - 1));
    const Complex tr = rho.trace();
    if (std::abs(tr) < 1e-12) throw SolverError("steady state: null vector is traceless");
    rho /= tr;
    rho = 0.5 * (rho + rho.adjoint()).eval();

    const double residual = (m * vec(rho)).norm();
    if (residual > opts.residual_tolerance * l.norm())
        throw SolverError("steady state: residual " + std::to_string(residual) + " too large");
    return DensityOperator(std::move(rho));
}

ComplexMatrix propagator(const LiouvillianOperator& l, double t) {
    if (!(t >= 0.0)) throw InvalidArgument("evolution time must be non-negative");
    if (t == 0.0) return ComplexMatrix::Identity(l.matrix().rows(), l.matrix().cols());
    if (l.norm() * t > 1e12) throw SolverError("propagator: |L t| too large for exponentiation");
    const ComplexMatrix lt = l.matrix() * t;
    ComplexMatrix p = lt.exp();
    if (!p.allFinite()) throw SolverError("propagator: matrix exponential overflowed");
    return p;
}

DensityOperator evolve(const DensityOperator& rho0, const LiouvillianOperator& l, double t) {
    if (rho0.dim() != l.hilbert_dim()) throw InvalidArgument("evolve: dimension mismatch");
    if (t == 0.0) return rho0;
    ComplexMatrix rho = unvec(propagator(l, t) * vec(rho0.matrix()));
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(std::move(rho));
}

}  // namespace qdiode
