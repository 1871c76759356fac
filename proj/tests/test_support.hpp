#pragma once

// Test-only helpers: random generators and reference routines that stay
// independent of the library code paths they check.

#include "stopwatch/operators.hpp"

#include <cmath>
#include <random>

namespace stopwatch::test
{

inline CMatrix kron(const CMatrix& a, const CMatrix& b)
{
	CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
	for(Eigen::Index i = 0; i < a.rows(); ++i) {
		for(Eigen::Index j = 0; j < a.cols(); ++j) {
			out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
		}
	}
	return out;
}

template <typename Rng>
CMatrix random_matrix(Eigen::Index dim, Rng& rng)
{
	std::normal_distribution<double> nd;
	CMatrix m(dim, dim);
	for(Eigen::Index j = 0; j < dim; ++j) {
		for(Eigen::Index i = 0; i < dim; ++i) {
			const double re = nd(rng);
			m(i, j) = cplx{re, nd(rng)};
		}
	}
	return m;
}

template <typename Rng>
CMatrix random_hermitian(Eigen::Index dim, Rng& rng)
{
	const CMatrix m = random_matrix(dim, rng);
	return (m + m.adjoint()) / 2.0;
}

template <typename Rng>
CVector random_state(int n_sites, Rng& rng)
{
	std::normal_distribution<double> nd;
	CVector v(static_cast<Eigen::Index>(hilbert_dim(n_sites)));
	for(Eigen::Index i = 0; i < v.size(); ++i) {
		const double re = nd(rng);
		v(i) = cplx{re, nd(rng)};
	}
	return v / v.norm();
}

/// Random density matrix of dimension `dim` (Ginibre construction).
template <typename Rng>
CMatrix random_density(Eigen::Index dim, Rng& rng)
{
	const CMatrix g = random_matrix(dim, rng);
	const CMatrix r = g * g.adjoint();
	return r / r.trace().real();
}

/// exp(-iHt) psi by repeated sixth-order Taylor steps of size <= max_step.
inline CVector taylor_propagate(const CMatrix& h, const CVector& psi, double t, double max_step = 0.005)
{
	const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / max_step)));
	const double dt = t / steps;
	const cplx factor{0.0, -dt};
	CVector out = psi;
	for(int s = 0; s < steps; ++s) {
		CVector term = out;
		CVector acc = out;
		for(int k = 1; k <= 6; ++k) {
			term = (factor / static_cast<double>(k)) * (h * term);
			acc += term;
		}
		out = acc;
	}
	return out;
}

/// tr_B by explicit index loops over a full density matrix, A = leading sites.
inline CMatrix brute_partial_trace_leading(const CMatrix& rho, Eigen::Index dim_a)
{
	const Eigen::Index dim_b = rho.rows() / dim_a;
	CMatrix out = CMatrix::Zero(dim_a, dim_a);
	for(Eigen::Index a = 0; a < dim_a; ++a) {
		for(Eigen::Index ap = 0; ap < dim_a; ++ap) {
			for(Eigen::Index b = 0; b < dim_b; ++b) {
				out(a, ap) += rho(a * dim_b + b, ap * dim_b + b);
			}
		}
	}
	return out;
}

} // namespace stopwatch::test
