#pragma once

// Exact dynamics on dense spectra: eigendecomposition, ground-state
// preparation, quenches, time evolution, Heisenberg operators, partial
// traces and the reduced generator M_A(t) = tr_B(-i[H, rho(t)]).

#include "operators.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace stopwatch
{

namespace detail
{

// V * Z with V real and Z complex, as two real products.
inline CMatrix product(const RMatrix& v, const CMatrix& z)
{
	const RMatrix re = v * z.real();
	const RMatrix im = v * z.imag();
	CMatrix out(re.rows(), re.cols());
	out.real() = re;
	out.imag() = im;
	return out;
}

inline CMatrix product(const CMatrix& v, const CMatrix& z) { return v * z; }

// V^dag * Z.
inline CMatrix adjoint_product(const RMatrix& v, const CMatrix& z)
{
	const RMatrix re = v.transpose() * z.real();
	const RMatrix im = v.transpose() * z.imag();
	CMatrix out(re.rows(), re.cols());
	out.real() = re;
	out.imag() = im;
	return out;
}

inline CMatrix adjoint_product(const CMatrix& v, const CMatrix& z) { return v.adjoint() * z; }

inline int sites_from_dim(Eigen::Index dim)
{
	int n = 0;
	while((Eigen::Index{1} << n) < dim) {
		++n;
	}
	if((Eigen::Index{1} << n) != dim || dim < 2) {
		throw std::invalid_argument("dimension " + std::to_string(dim) + " is not 2^N with N >= 1");
	}
	return n;
}

} // namespace detail

/// Eigenvalues in ascending order and the unitary whose columns are the
/// matching eigenvectors.
template <typename Scalar>
struct SpectralDecomposition
{
	RVector energies;
	Matrix<Scalar> vectors;

	[[nodiscard]] Eigen::Index dim() const noexcept { return energies.size(); }
	[[nodiscard]] int n_sites() const { return detail::sites_from_dim(dim()); }

	[[nodiscard]] Matrix<Scalar> reconstruct() const
	{
		return vectors * energies.asDiagonal() * vectors.adjoint();
	}

	/// Coefficients V^dag * z in the eigenbasis (columns of z are states).
	[[nodiscard]] CMatrix to_eigenbasis(const CMatrix& z) const { return detail::adjoint_product(vectors, z); }
	[[nodiscard]] CMatrix from_eigenbasis(const CMatrix& z) const { return detail::product(vectors, z); }

	/// V^dag * O * V for an operator given in the computational basis.
	[[nodiscard]] CMatrix operator_to_eigenbasis(const CMatrix& op) const
	{
		// O V = (V^dag O^dag)^dag keeps both products in the real-times-complex form
		return detail::adjoint_product(vectors, CMatrix(detail::adjoint_product(vectors, op.adjoint()).adjoint()));
	}
};

using RealSpectrum = SpectralDecomposition<double>;
using ComplexSpectrum = SpectralDecomposition<cplx>;

/// Dense self-adjoint eigendecomposition.
template <typename Scalar>
SpectralDecomposition<Scalar> eigendecompose(const Hermitian<Scalar>& op)
{
	Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(op.matrix(), Eigen::ComputeEigenvectors);
	if(solver.info() != Eigen::Success) {
		throw std::runtime_error("eigendecompose: eigensolver did not converge");
	}
	SpectralDecomposition<Scalar> out{solver.eigenvalues(), solver.eigenvectors()};
	if(!out.energies.allFinite()) {
		throw std::runtime_error("eigendecompose: non-finite eigenvalues");
	}
	return out;
}

/// Eigendecomposition that block-diagonalizes a real symmetric operator over
/// the two sectors of a basis involution P (P^2 = 1, P H P = H), e.g. the
/// spatial reflection of an open chain. Each block costs a quarter of the
/// full solve. Throws if `involution` is not a symmetry of `op`.
inline RealSpectrum eigendecompose(const Hermitian<double>& op, std::span<const std::uint64_t> involution,
                                   double rel_tol = 1e-12)
{
	const auto& h = op.matrix();
	const auto dim = h.rows();
	if(static_cast<Eigen::Index>(involution.size()) != dim) {
		throw std::invalid_argument("eigendecompose: involution size mismatch");
	}
	for(Eigen::Index i = 0; i < dim; ++i) {
		const auto pi = static_cast<Eigen::Index>(involution[static_cast<std::size_t>(i)]);
		if(pi < 0 || pi >= dim || static_cast<Eigen::Index>(involution[static_cast<std::size_t>(pi)]) != i) {
			throw std::invalid_argument("eigendecompose: permutation is not an involution");
		}
	}
	const double tol = rel_tol * std::max(h.cwiseAbs().maxCoeff(), 1e-300);
	for(Eigen::Index j = 0; j < dim; ++j) {
		const auto pj = static_cast<Eigen::Index>(involution[static_cast<std::size_t>(j)]);
		for(Eigen::Index i = 0; i < dim; ++i) {
			const auto pi = static_cast<Eigen::Index>(involution[static_cast<std::size_t>(i)]);
			if(std::abs(h(pi, pj) - h(i, j)) > tol) {
				throw std::invalid_argument("eigendecompose: operator does not commute with the involution");
			}
		}
	}

	// Sector basis vectors as (i, partner, weight of partner) triples:
	// even = (e_i + e_p)/sqrt2 or e_i, odd = (e_i - e_p)/sqrt2.
	struct BasisVec
	{
		Eigen::Index i;
		Eigen::Index p;
		double sign;
	};
	std::vector<BasisVec> even;
	std::vector<BasisVec> odd;
	for(Eigen::Index i = 0; i < dim; ++i) {
		const auto p = static_cast<Eigen::Index>(involution[static_cast<std::size_t>(i)]);
		if(p == i) {
			even.push_back({i, i, 0.0});
		} else if(i < p) {
			even.push_back({i, p, 1.0});
			odd.push_back({i, p, -1.0});
		}
	}

	// <a|H|b> for sector vectors holding at most two entries each.
	auto element = [&h](const BasisVec& a, const BasisVec& b) {
		if(a.sign == 0.0 && b.sign == 0.0) {
			return h(a.i, b.i);
		}
		if(a.sign == 0.0) {
			return M_SQRT1_2 * (h(a.i, b.i) + b.sign * h(a.i, b.p));
		}
		if(b.sign == 0.0) {
			return M_SQRT1_2 * (h(a.i, b.i) + a.sign * h(a.p, b.i));
		}
		return 0.5 * (h(a.i, b.i) + b.sign * h(a.i, b.p) + a.sign * h(a.p, b.i) + a.sign * b.sign * h(a.p, b.p));
	};

	auto solve_sector = [&](const std::vector<BasisVec>& basis) {
		const auto m = static_cast<Eigen::Index>(basis.size());
		RMatrix block(m, m);
		for(Eigen::Index c = 0; c < m; ++c) {
			for(Eigen::Index r = 0; r < m; ++r) {
				block(r, c) = element(basis[static_cast<std::size_t>(r)], basis[static_cast<std::size_t>(c)]);
			}
		}
		block = (block + block.transpose()).eval() / 2.0;
		Eigen::SelfAdjointEigenSolver<RMatrix> solver(block, Eigen::ComputeEigenvectors);
		if(solver.info() != Eigen::Success) {
			throw std::runtime_error("eigendecompose: eigensolver did not converge");
		}
		const RMatrix& w = solver.eigenvectors();
		RMatrix full = RMatrix::Zero(dim, m);
		for(Eigen::Index k = 0; k < m; ++k) {
			const auto& b = basis[static_cast<std::size_t>(k)];
			if(b.sign == 0.0) {
				full.row(b.i) = w.row(k);
			} else {
				full.row(b.i) = M_SQRT1_2 * w.row(k);
				full.row(b.p) = (b.sign * M_SQRT1_2) * w.row(k);
			}
		}
		return std::make_tuple(RVector(solver.eigenvalues()), std::move(full));
	};

	auto [e_even, v_even] = solve_sector(even);
	RVector e_odd;
	RMatrix v_odd;
	if(!odd.empty()) {
		std::tie(e_odd, v_odd) = solve_sector(odd);
	}

	RealSpectrum out;
	out.energies.resize(dim);
	out.vectors.resize(dim, dim);
	Eigen::Index a = 0;
	Eigen::Index b = 0;
	for(Eigen::Index k = 0; k < dim; ++k) {
		const bool take_even = b >= e_odd.size() || (a < e_even.size() && e_even(a) <= e_odd(b));
		if(take_even) {
			out.energies(k) = e_even(a);
			out.vectors.col(k) = v_even.col(a++);
		} else {
			out.energies(k) = e_odd(b);
			out.vectors.col(k) = v_odd.col(b++);
		}
	}
	if(!out.energies.allFinite()) {
		throw std::runtime_error("eigendecompose: non-finite eigenvalues");
	}
	return out;
}

/// Normalized state vector of an n-site chain.
class PureState
{
public:
	PureState() = default;

	PureState(CVector amplitudes, double tol = 1e-10) : amplitudes_(std::move(amplitudes))
	{
		n_sites_ = detail::sites_from_dim(amplitudes_.size());
		if(std::abs(amplitudes_.norm() - 1.0) > tol) {
			throw std::invalid_argument("PureState: state is not normalized (norm "
			                            + std::to_string(amplitudes_.norm()) + ")");
		}
	}

	static PureState normalized(CVector v)
	{
		const double n = v.norm();
		if(!(n > 0.0) || !std::isfinite(n)) {
			throw std::invalid_argument("PureState: cannot normalize a zero or non-finite vector");
		}
		return PureState(v / n);
	}

	static PureState basis(int n_sites, std::uint64_t index)
	{
		const auto dim = static_cast<Eigen::Index>(hilbert_dim(n_sites));
		if(static_cast<Eigen::Index>(index) >= dim) {
			throw std::out_of_range("PureState::basis: index outside the register");
		}
		CVector v = CVector::Zero(dim);
		v(static_cast<Eigen::Index>(index)) = 1.0;
		return PureState(std::move(v));
	}

	[[nodiscard]] const CVector& amplitudes() const noexcept { return amplitudes_; }
	[[nodiscard]] int n_sites() const noexcept { return n_sites_; }
	[[nodiscard]] Eigen::Index dim() const noexcept { return amplitudes_.size(); }

private:
	CVector amplitudes_;
	int n_sites_ = 0;
};

struct GroundState
{
	PureState state;
	bool degenerate = false;
	double gap = 0.0;
};

/// Lowest eigenvector. `degenerate` is raised when E1 - E0 < 1e-8 max(1,|E0|);
/// the lowest-index eigenvector is returned in that case too.
template <typename Scalar>
GroundState ground_state(const SpectralDecomposition<Scalar>& spec)
{
	GroundState out{PureState::normalized(spec.vectors.col(0).template cast<cplx>())};
	if(spec.dim() > 1) {
		const double e0 = spec.energies(0);
		out.gap = spec.energies(1) - e0;
		out.degenerate = out.gap < 1e-8 * std::max(1.0, std::abs(e0));
	}
	return out;
}

/// Applies a local unitary to the state.
inline PureState quench(const PureState& psi, const LocalOperator& op)
{
	if(!op.is_unitary()) {
		throw std::invalid_argument("quench: operator is not unitary on its support");
	}
	return PureState::normalized(apply(op, psi.amplitudes(), psi.n_sites()));
}

/// Phases exp(-i E t) on the diagonal.
inline CVector phases(const RVector& energies, double t)
{
	CVector d(energies.size());
	for(Eigen::Index k = 0; k < energies.size(); ++k) {
		d(k) = std::polar(1.0, -energies(k) * t);
	}
	return d;
}

/// exp(-iHt) psi0.
template <typename Scalar>
PureState evolve(const SpectralDecomposition<Scalar>& spec, const PureState& psi0, double t)
{
	if(psi0.dim() != spec.dim()) {
		throw std::invalid_argument("evolve: state and spectrum dimensions differ");
	}
	if(t == 0.0) {
		return psi0;
	}
	const CMatrix c = spec.to_eigenbasis(psi0.amplitudes());
	const CMatrix z = phases(spec.energies, t).cwiseProduct(c.col(0));
	return PureState::normalized(spec.from_eigenbasis(z).col(0));
}

/// States exp(-iH t_k) psi0 as the columns of a dim x |times| matrix.
template <typename Scalar>
CMatrix evolve_batch(const SpectralDecomposition<Scalar>& spec, const CVector& psi0, std::span<const double> times)
{
	if(psi0.size() != spec.dim()) {
		throw std::invalid_argument("evolve_batch: state and spectrum dimensions differ");
	}
	const CMatrix c = spec.to_eigenbasis(psi0);
	CMatrix z(spec.dim(), static_cast<Eigen::Index>(times.size()));
	for(std::size_t k = 0; k < times.size(); ++k) {
		z.col(static_cast<Eigen::Index>(k)) = phases(spec.energies, times[k]).cwiseProduct(c.col(0));
	}
	return spec.from_eigenbasis(z);
}

/// B(t) v = exp(iHt) B exp(-iHt) v, applied to a state vector.
template <typename Scalar>
CVector heisenberg_apply(const SpectralDecomposition<Scalar>& spec, const LocalOperator& b, double t, const CVector& v)
{
	const int n = spec.n_sites();
	const CVector d = phases(spec.energies, t);
	const CVector forward = spec.from_eigenbasis(d.cwiseProduct(spec.to_eigenbasis(v).col(0))).col(0);
	const CVector kicked = apply(b, forward, n);
	return spec.from_eigenbasis(d.conjugate().cwiseProduct(spec.to_eigenbasis(kicked).col(0))).col(0);
}

/// Dense Heisenberg-picture operator exp(iHt) B exp(-iHt).
template <typename Scalar>
CMatrix heisenberg(const SpectralDecomposition<Scalar>& spec, const LocalOperator& b, double t)
{
	const CMatrix full = embed(b, spec.n_sites());
	if(t == 0.0) {
		return full;
	}
	const CVector d = phases(spec.energies, t);
	const CMatrix u = spec.from_eigenbasis(CMatrix(d.asDiagonal() * spec.vectors.adjoint().template cast<cplx>()));
	return u.adjoint() * full * u;
}

/// Split of the chain into subsystem A and its complement B.
class Bipartition
{
public:
	Bipartition() = default;

	/// `sites_a` in any order; stored ascending. B may be empty.
	Bipartition(std::vector<int> sites_a, int n_sites) : n_sites_(n_sites), sites_a_(std::move(sites_a))
	{
		if(n_sites < 1) {
			throw std::invalid_argument("Bipartition: n_sites must be >= 1");
		}
		std::sort(sites_a_.begin(), sites_a_.end());
		if(sites_a_.empty()) {
			throw std::invalid_argument("Bipartition: subsystem A is empty");
		}
		if(std::adjacent_find(sites_a_.begin(), sites_a_.end()) != sites_a_.end()) {
			throw std::invalid_argument("Bipartition: repeated site in A");
		}
		if(sites_a_.front() < 0 || sites_a_.back() >= n_sites) {
			throw std::out_of_range("Bipartition: site of A outside the chain");
		}
		for(int s = 0; s < n_sites; ++s) {
			if(!std::binary_search(sites_a_.begin(), sites_a_.end(), s)) {
				sites_b_.push_back(s);
			}
		}
		const auto dim = hilbert_dim(n_sites);
		index_a_.resize(dim);
		index_b_.resize(dim);
		for(std::uint64_t i = 0; i < dim; ++i) {
			index_a_[i] = gather(i, sites_a_);
			index_b_[i] = gather(i, sites_b_);
		}
	}

	[[nodiscard]] const std::vector<int>& sites_a() const noexcept { return sites_a_; }
	[[nodiscard]] const std::vector<int>& sites_b() const noexcept { return sites_b_; }
	[[nodiscard]] int n_sites() const noexcept { return n_sites_; }
	[[nodiscard]] Eigen::Index dim_a() const { return static_cast<Eigen::Index>(hilbert_dim(static_cast<int>(sites_a_.size()))); }
	[[nodiscard]] Eigen::Index dim_b() const { return static_cast<Eigen::Index>(hilbert_dim(static_cast<int>(sites_b_.size()))); }

	/// Amplitudes reshaped to the d_A x d_B matrix C with psi = sum C_ab |a>|b>.
	[[nodiscard]] CMatrix coefficients(const CVector& psi) const
	{
		if(psi.size() != static_cast<Eigen::Index>(index_a_.size())) {
			throw std::invalid_argument("Bipartition: state dimension mismatch");
		}
		CMatrix c(dim_a(), dim_b());
		for(std::size_t i = 0; i < index_a_.size(); ++i) {
			c(static_cast<Eigen::Index>(index_a_[i]), static_cast<Eigen::Index>(index_b_[i])) = psi(static_cast<Eigen::Index>(i));
		}
		return c;
	}

	/// Inverse of `coefficients`.
	[[nodiscard]] CVector flatten(const CMatrix& c) const
	{
		CVector psi(static_cast<Eigen::Index>(index_a_.size()));
		for(std::size_t i = 0; i < index_a_.size(); ++i) {
			psi(static_cast<Eigen::Index>(i)) = c(static_cast<Eigen::Index>(index_a_[i]), static_cast<Eigen::Index>(index_b_[i]));
		}
		return psi;
	}

private:
	std::uint64_t gather(std::uint64_t full, const std::vector<int>& sites) const
	{
		std::uint64_t out = 0;
		for(int s : sites) {
			out = (out << 1U) | ((full >> site_bit(s, n_sites_)) & 1U);
		}
		return out;
	}

	int n_sites_ = 0;
	std::vector<int> sites_a_;
	std::vector<int> sites_b_;
	std::vector<std::uint64_t> index_a_;
	std::vector<std::uint64_t> index_b_;
};

/// Hermitian, unit-trace, positive semidefinite matrix (tolerance 1e-10).
class DensityMatrix
{
public:
	DensityMatrix() = default;

	explicit DensityMatrix(CMatrix m, double tol = 1e-10) : matrix_(std::move(m))
	{
		if(matrix_.rows() != matrix_.cols() || matrix_.rows() == 0) {
			throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
		}
		if((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > tol) {
			throw std::invalid_argument("DensityMatrix: not Hermitian");
		}
		matrix_ = (matrix_ + matrix_.adjoint()).eval() / 2.0;
		if(std::abs(matrix_.trace() - 1.0) > tol) {
			throw std::invalid_argument("DensityMatrix: trace differs from 1");
		}
		if(eigenvalues().minCoeff() < -tol) {
			throw std::invalid_argument("DensityMatrix: negative eigenvalue");
		}
	}

	static DensityMatrix pure(const CVector& v) { return DensityMatrix(v * v.adjoint()); }

	[[nodiscard]] const CMatrix& matrix() const noexcept { return matrix_; }
	[[nodiscard]] Eigen::Index dim() const noexcept { return matrix_.rows(); }

	[[nodiscard]] RVector eigenvalues() const
	{
		Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
		return solver.eigenvalues();
	}

private:
	CMatrix matrix_;
};

/// rho_A = tr_B |psi><psi|.
inline DensityMatrix partial_trace(const CVector& psi, const Bipartition& part)
{
	const CMatrix c = part.coefficients(psi);
	return DensityMatrix(c * c.adjoint());
}

inline DensityMatrix partial_trace(const PureState& psi, const Bipartition& part)
{
	return partial_trace(psi.amplitudes(), part);
}

/// tr_B(|phi><psi| + |psi><phi|) with phi = -iH psi supplied by the caller.
inline Hermitian<cplx> reduced_generator_from_action(const CVector& psi, const CVector& minus_i_h_psi, const Bipartition& part)
{
	const CMatrix cp = part.coefficients(psi);
	const CMatrix cf = part.coefficients(minus_i_h_psi);
	const CMatrix x = cf * cp.adjoint();
	return Hermitian<cplx>(x + x.adjoint());
}

/// Subsystem generator d rho_A / dt = tr_B(-i[H, |psi><psi|]), computed from
/// state vectors without forming the global density matrix.
template <typename Scalar>
Hermitian<cplx> reduced_generator(const Hermitian<Scalar>& h_full, const PureState& psi_t, const Bipartition& part)
{
	if(h_full.dim() != psi_t.dim()) {
		throw std::invalid_argument("reduced_generator: Hamiltonian and state dimensions differ");
	}
	const CVector phi = cplx{0.0, -1.0} * (h_full.matrix().template cast<cplx>() * psi_t.amplitudes());
	return reduced_generator_from_action(psi_t.amplitudes(), phi, part);
}

} // namespace stopwatch
