#pragma once

// Pauli algebra, local-operator embeddings and the chaotic Ising chain
// Hamiltonian, all as dense matrices.
//
// Qubit ordering: site 0 is the leftmost (most significant) tensor factor,
// so basis index i stores site s in bit (n_sites - 1 - s).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stopwatch
{

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Largest chain the dense engine accepts unless the caller raises it.
inline constexpr int kDefaultMaxSites = 14;

enum class Axis { x, y, z };

enum class Boundary { open };

inline std::size_t hilbert_dim(int n_sites)
{
	return std::size_t{1} << static_cast<unsigned>(n_sites);
}

/// Bit position of `site` inside a basis index of an `n_sites` register.
inline int site_bit(int site, int n_sites) { return n_sites - 1 - site; }

/// Parameters of H = -J sum z_i z_{i+1} - h sum x_i - g sum z_i.
struct ChainParams
{
	int n_sites = 1;
	double coupling = 1.0;     // J
	double transverse = 0.0;   // h
	double longitudinal = 0.0; // g
	Boundary boundary = Boundary::open;

	void validate() const
	{
		if(n_sites < 1) {
			throw std::invalid_argument("ChainParams: n_sites must be >= 1");
		}
		if(!std::isfinite(coupling) || !std::isfinite(transverse) || !std::isfinite(longitudinal)) {
			throw std::invalid_argument("ChainParams: couplings must be finite");
		}
	}
};

/// An operator acting on a strictly increasing list of sites.
class LocalOperator
{
public:
	LocalOperator() = default;

	LocalOperator(std::vector<int> support, CMatrix matrix)
		: support_(std::move(support)), matrix_(std::move(matrix))
	{
		if(support_.empty()) {
			throw std::invalid_argument("LocalOperator: empty support");
		}
		for(std::size_t k = 0; k < support_.size(); ++k) {
			if(support_[k] < 0) {
				throw std::invalid_argument("LocalOperator: negative site index");
			}
			if(k > 0 && support_[k] <= support_[k - 1]) {
				throw std::invalid_argument("LocalOperator: support must be strictly increasing");
			}
		}
		const auto dim = static_cast<Eigen::Index>(hilbert_dim(static_cast<int>(support_.size())));
		if(matrix_.rows() != dim || matrix_.cols() != dim) {
			throw std::invalid_argument("LocalOperator: matrix dimension must be 2^|support|");
		}
	}

	[[nodiscard]] const std::vector<int>& support() const noexcept { return support_; }
	[[nodiscard]] const CMatrix& matrix() const noexcept { return matrix_; }
	[[nodiscard]] int max_site() const { return support_.back(); }

	[[nodiscard]] bool is_unitary(double tol = 1e-10) const
	{
		const auto id = CMatrix::Identity(matrix_.rows(), matrix_.cols());
		return (matrix_.adjoint() * matrix_ - id).cwiseAbs().maxCoeff() <= tol;
	}

	[[nodiscard]] bool is_hermitian(double tol = 1e-12) const
	{
		return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() <= tol;
	}

	[[nodiscard]] bool overlaps(const LocalOperator& other) const
	{
		return std::any_of(support_.begin(), support_.end(), [&](int s) {
			return std::find(other.support_.begin(), other.support_.end(), s) != other.support_.end();
		});
	}

	[[nodiscard]] LocalOperator adjoint() const { return {support_, matrix_.adjoint()}; }

private:
	std::vector<int> support_;
	CMatrix matrix_;
};

/// The standard 2x2 Pauli matrix.
inline CMatrix pauli_matrix(Axis axis)
{
	const cplx i{0.0, 1.0};
	CMatrix m(2, 2);
	switch(axis) {
	case Axis::x: m << 0.0, 1.0, 1.0, 0.0; break;
	case Axis::y: m << 0.0, -i, i, 0.0; break;
	case Axis::z: m << 1.0, 0.0, 0.0, -1.0; break;
	}
	return m;
}

inline LocalOperator pauli(Axis axis, int site = 0) { return {{site}, pauli_matrix(axis)}; }

inline LocalOperator identity_on(int site) { return {{site}, CMatrix::Identity(2, 2)}; }

inline Axis parse_axis(const std::string& name)
{
	if(name == "x") {
		return Axis::x;
	}
	if(name == "y") {
		return Axis::y;
	}
	if(name == "z") {
		return Axis::z;
	}
	throw std::invalid_argument("unknown Pauli axis '" + name + "'");
}

namespace detail
{

inline void check_support(const LocalOperator& op, int n_sites)
{
	if(op.max_site() >= n_sites) {
		throw std::out_of_range("LocalOperator support site " + std::to_string(op.max_site())
		                        + " outside chain of " + std::to_string(n_sites) + " sites");
	}
}

// Splits a full basis index into the local index on `support` (first site
// most significant) and the index with the support bits cleared.
struct SupportIndexer
{
	std::vector<std::uint64_t> masks;

	SupportIndexer(const std::vector<int>& support, int n_sites)
	{
		masks.reserve(support.size());
		for(int s : support) {
			masks.push_back(std::uint64_t{1} << site_bit(s, n_sites));
		}
	}

	[[nodiscard]] std::uint64_t local(std::uint64_t full) const
	{
		std::uint64_t l = 0;
		for(auto m : masks) {
			l = (l << 1U) | ((full & m) != 0 ? 1U : 0U);
		}
		return l;
	}

	[[nodiscard]] std::uint64_t rest(std::uint64_t full) const
	{
		for(auto m : masks) {
			full &= ~m;
		}
		return full;
	}

	[[nodiscard]] std::uint64_t compose(std::uint64_t rest, std::uint64_t local) const
	{
		const auto k = masks.size();
		for(std::size_t j = 0; j < k; ++j) {
			if(((local >> (k - 1 - j)) & 1U) != 0) {
				rest |= masks[j];
			}
		}
		return rest;
	}
};

} // namespace detail

/// Kronecker embedding of `op` into an n-site register (identity elsewhere).
inline CMatrix embed(const LocalOperator& op, int n_sites)
{
	detail::check_support(op, n_sites);
	const auto dim = hilbert_dim(n_sites);
	const detail::SupportIndexer idx(op.support(), n_sites);
	const auto& m = op.matrix();
	const auto ld = static_cast<std::uint64_t>(m.rows());

	CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
	for(std::uint64_t col = 0; col < dim; ++col) {
		const auto l = idx.local(col);
		const auto r = idx.rest(col);
		for(std::uint64_t lr = 0; lr < ld; ++lr) {
			const cplx v = m(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(l));
			if(v != cplx{}) {
				out(static_cast<Eigen::Index>(idx.compose(r, lr)), static_cast<Eigen::Index>(col)) += v;
			}
		}
	}
	return out;
}

/// Applies `op` to a state vector without materializing the 2^N matrix.
inline CVector apply(const LocalOperator& op, const CVector& psi, int n_sites)
{
	detail::check_support(op, n_sites);
	const auto dim = hilbert_dim(n_sites);
	if(static_cast<std::size_t>(psi.size()) != dim) {
		throw std::invalid_argument("apply: state dimension does not match chain");
	}
	const detail::SupportIndexer idx(op.support(), n_sites);
	const auto& m = op.matrix();
	const auto ld = static_cast<std::uint64_t>(m.rows());

	CVector out = CVector::Zero(psi.size());
	for(std::uint64_t col = 0; col < dim; ++col) {
		const cplx amp = psi(static_cast<Eigen::Index>(col));
		if(amp == cplx{}) {
			continue;
		}
		const auto l = idx.local(col);
		const auto r = idx.rest(col);
		for(std::uint64_t lr = 0; lr < ld; ++lr) {
			const cplx v = m(static_cast<Eigen::Index>(lr), static_cast<Eigen::Index>(l));
			if(v != cplx{}) {
				out(static_cast<Eigen::Index>(idx.compose(r, lr))) += v * amp;
			}
		}
	}
	return out;
}

/// Dense Hermitian matrix. Construction checks ||M - M^dag||_max against
/// `rel_tol * ||M||_max` and then symmetrizes to (M + M^dag) / 2.
template <typename Scalar>
class Hermitian
{
public:
	using scalar_type = Scalar;

	Hermitian() = default;

	explicit Hermitian(Matrix<Scalar> m, double rel_tol = 1e-12)
	{
		if(m.rows() != m.cols()) {
			throw std::invalid_argument("Hermitian: matrix is not square");
		}
		if(m.size() > 0) {
			const double scale = m.cwiseAbs().maxCoeff();
			const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
			if(asym > rel_tol * std::max(scale, 1e-300)) {
				throw std::invalid_argument("Hermitian: matrix is not Hermitian (asymmetry "
				                            + std::to_string(asym) + ")");
			}
		}
		matrix_ = (m + m.adjoint()) / 2.0;
	}

	[[nodiscard]] const Matrix<Scalar>& matrix() const noexcept { return matrix_; }
	[[nodiscard]] Eigen::Index dim() const noexcept { return matrix_.rows(); }

	[[nodiscard]] CMatrix complex_matrix() const { return matrix_.template cast<cplx>(); }

private:
	Matrix<Scalar> matrix_;
};

/// H = -J sum_{i<N-1} z_i z_{i+1} - h sum_i x_i - g sum_i z_i with open
/// boundaries. Real-symmetric in the computational basis.
inline Hermitian<double> build_hamiltonian(const ChainParams& p, int max_sites = kDefaultMaxSites)
{
	p.validate();
	if(p.n_sites > max_sites) {
		throw std::length_error("build_hamiltonian: n_sites " + std::to_string(p.n_sites)
		                        + " exceeds configured maximum " + std::to_string(max_sites));
	}
	const int n = p.n_sites;
	const auto dim = hilbert_dim(n);
	RMatrix h = RMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));

	auto spin = [n](std::uint64_t state, int site) {
		return ((state >> site_bit(site, n)) & 1U) != 0 ? -1.0 : 1.0;
	};

	for(std::uint64_t s = 0; s < dim; ++s) {
		const auto col = static_cast<Eigen::Index>(s);
		double diag = 0.0;
		for(int i = 0; i + 1 < n; ++i) {
			diag -= p.coupling * spin(s, i) * spin(s, i + 1);
		}
		for(int i = 0; i < n; ++i) {
			diag -= p.longitudinal * spin(s, i);
		}
		h(col, col) = diag;
		if(p.transverse != 0.0) {
			for(int i = 0; i < n; ++i) {
				const auto flipped = s ^ (std::uint64_t{1} << site_bit(i, n));
				h(static_cast<Eigen::Index>(flipped), col) -= p.transverse;
			}
		}
	}
	return Hermitian<double>(std::move(h));
}

/// [a, b] = ab - ba. Mixed real/complex arguments promote to complex.
template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
	using S = typename Eigen::ScalarBinaryOpTraits<typename DerivedA::Scalar,
	                                               typename DerivedB::Scalar>::ReturnType;
	if(a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
		throw std::invalid_argument("commutator: dimension mismatch");
	}
	const Matrix<S> ac = a.template cast<S>();
	const Matrix<S> bc = b.template cast<S>();
	Matrix<S> out = ac * bc - bc * ac;
	return out;
}

/// Basis permutation of the spatial reflection site i -> N-1-i.
inline std::vector<std::uint64_t> reflection_permutation(int n_sites)
{
	const auto dim = hilbert_dim(n_sites);
	std::vector<std::uint64_t> perm(dim);
	for(std::uint64_t s = 0; s < dim; ++s) {
		std::uint64_t r = 0;
		for(int b = 0; b < n_sites; ++b) {
			if(((s >> b) & 1U) != 0) {
				r |= std::uint64_t{1} << (n_sites - 1 - b);
			}
		}
		perm[s] = r;
	}
	return perm;
}

} // namespace stopwatch
