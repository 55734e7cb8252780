#pragma once

#include <complex>
#include <random>

#include "doctest.h"

#include "qdiode/core/operators.hpp"
#include "qdiode/core/single_qubit.hpp"
#include "qdiode/core/units.hpp"

namespace qt {

// Purely relative comparison; doctest's default adds an absolute scale of 1.
inline doctest::Approx approx(double v) { return doctest::Approx(v).scale(0.0); }

using qdiode::Complex;
using qdiode::ComplexMatrix;
using qdiode::ComplexVector;

inline double mhz(double v) { return qdiode::to_angular(qdiode::Hertz{v * 1e6}).value; }
inline double khz(double v) { return qdiode::to_angular(qdiode::Hertz{v * 1e3}).value; }

// Measured single-qubit rates at the two operating frequencies.
inline qdiode::QubitParams table_86_q2() { return {0.0, mhz(72.4299), khz(191.1), khz(211.4)}; }
inline qdiode::QubitParams table_88_q2() { return {0.0, mhz(73.1158), khz(64.0), khz(74.7)}; }
inline qdiode::QubitParams table_86_q1() { return {0.0, mhz(71.3039), khz(191.1), khz(211.4)}; }
inline qdiode::QubitParams table_88_q1() { return {0.0, mhz(62.4261), khz(64.0), khz(74.7)}; }

inline ComplexMatrix random_matrix(std::mt19937_64& rng, Eigen::Index d) {
    std::normal_distribution<double> n;
    ComplexMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(n(rng), n(rng));
    return m;
}

inline ComplexMatrix random_hermitian(std::mt19937_64& rng, Eigen::Index d) {
    const ComplexMatrix m = random_matrix(rng, d);
    return 0.5 * (m + m.adjoint());
}

inline qdiode::DensityOperator random_state(std::mt19937_64& rng, Eigen::Index d) {
    const ComplexMatrix m = random_matrix(rng, d);
    ComplexMatrix rho = m * m.adjoint();
    rho /= rho.trace();
    return qdiode::DensityOperator(0.5 * (rho + rho.adjoint()));
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace qt
