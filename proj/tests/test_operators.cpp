#include "stopwatch/operators.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace stopwatch;
using Catch::Matchers::WithinAbs;

TEST_CASE("pauli matrices", "[operators]")
{
	const CMatrix x = pauli_matrix(Axis::x);
	const CMatrix y = pauli_matrix(Axis::y);
	const CMatrix z = pauli_matrix(Axis::z);
	const cplx i{0.0, 1.0};

	CMatrix expected_x(2, 2);
	expected_x << 0.0, 1.0, 1.0, 0.0;
	CHECK(x == expected_x);
	CHECK((z * z - CMatrix::Identity(2, 2)).norm() == 0.0);
	CHECK((commutator(x, y) - 2.0 * i * z).norm() < 1e-15);
	CHECK((commutator(x, z) + 2.0 * i * y).norm() < 1e-15);

	for(auto axis : {Axis::x, Axis::y, Axis::z}) {
		const auto p = pauli(axis);
		CHECK(p.is_unitary());
		CHECK(p.is_hermitian());
		CHECK(std::abs(p.matrix().trace()) == 0.0);
	}
}

TEST_CASE("local operators validate their support", "[operators]")
{
	CHECK_THROWS_AS(LocalOperator({1, 0}, CMatrix::Identity(4, 4)), std::invalid_argument);
	CHECK_THROWS_AS(LocalOperator({0, 0}, CMatrix::Identity(4, 4)), std::invalid_argument);
	CHECK_THROWS_AS(LocalOperator({0}, CMatrix::Identity(4, 4)), std::invalid_argument);
	CHECK_THROWS_AS(LocalOperator({}, CMatrix::Identity(1, 1)), std::invalid_argument);
	CHECK_NOTHROW(LocalOperator({0, 3}, CMatrix::Identity(4, 4)));
}

TEST_CASE("embedding follows the site-0-leftmost convention", "[operators]")
{
	const CMatrix i2 = CMatrix::Identity(2, 2);
	const CMatrix z = pauli_matrix(Axis::z);
	const CMatrix x = pauli_matrix(Axis::x);

	CHECK((embed(pauli(Axis::z, 0), 2) - test::kron(z, i2)).norm() == 0.0);
	CHECK((embed(pauli(Axis::x, 1), 2) - test::kron(i2, x)).norm() == 0.0);
	CHECK((embed(identity_on(2), 4) - CMatrix::Identity(16, 16)).norm() == 0.0);

	// sigma^x on site 1 maps |00> to |01>.
	CVector ket00 = CVector::Zero(4);
	ket00(0) = 1.0;
	const CVector out = embed(pauli(Axis::x, 1), 2) * ket00;
	CHECK(std::abs(out(1) - 1.0) == 0.0);
	CHECK(out.norm() == 1.0);

	// non-adjacent two-site support: explicit Kronecker product
	const CMatrix zx = test::kron(z, x);
	const LocalOperator op({0, 2}, zx);
	CHECK((embed(op, 3) - test::kron(test::kron(z, i2), x)).norm() == 0.0);

	CHECK_THROWS_AS(embed(pauli(Axis::x, 2), 2), std::out_of_range);
}

TEST_CASE("embedding is multiplicative on random two-site operators", "[operators][property]")
{
	std::mt19937_64 rng(7);
	for(int trial = 0; trial < 20; ++trial) {
		const int n = 3 + trial % 3;
		std::uniform_int_distribution<int> site(0, n - 1);
		int s0 = site(rng);
		int s1 = site(rng);
		while(s1 == s0) {
			s1 = site(rng);
		}
		const std::vector<int> support{std::min(s0, s1), std::max(s0, s1)};
		const CMatrix a = test::random_matrix(4, rng);
		const CMatrix b = test::random_matrix(4, rng);
		const CMatrix lhs = embed(LocalOperator(support, a * b), n);
		const CMatrix rhs = embed(LocalOperator(support, a), n) * embed(LocalOperator(support, b), n);
		CHECK((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));

		// matrix-free application agrees with the dense embedding
		const CVector psi = test::random_state(n, rng);
		const CVector dense = embed(LocalOperator(support, a), n) * psi;
		CHECK((apply(LocalOperator(support, a), psi, n) - dense).norm() < 1e-12);
	}
}

TEST_CASE("single spin and classical Ising spectra", "[operators]")
{
	const auto h1 = build_hamiltonian({.n_sites = 1, .coupling = 1.0, .transverse = 1.0, .longitudinal = 0.0});
	CHECK((h1.matrix() + pauli_matrix(Axis::x).real()).norm() == 0.0);
	Eigen::SelfAdjointEigenSolver<RMatrix> es1(h1.matrix());
	CHECK_THAT(es1.eigenvalues()(0), WithinAbs(-1.0, 1e-14));
	CHECK_THAT(es1.eigenvalues()(1), WithinAbs(1.0, 1e-14));

	const auto h2 = build_hamiltonian({.n_sites = 2, .coupling = 1.0, .transverse = 0.0, .longitudinal = 0.0});
	Eigen::SelfAdjointEigenSolver<RMatrix> es2(h2.matrix());
	const double expected[] = {-1.0, -1.0, 1.0, 1.0};
	for(int k = 0; k < 4; ++k) {
		CHECK_THAT(es2.eigenvalues()(k), WithinAbs(expected[k], 1e-14));
	}
}

TEST_CASE("two-site transverse Ising spectrum matches the closed form", "[operators]")
{
	// H = -J zz - h (x1 + x2): the even-parity block gives -+sqrt(J^2 + 4h^2),
	// the odd block gives -+J.
	const double j = 0.7;
	const double h = 1.3;
	const auto ham = build_hamiltonian({.n_sites = 2, .coupling = j, .transverse = h, .longitudinal = 0.0});
	Eigen::SelfAdjointEigenSolver<RMatrix> es(ham.matrix());
	const double r = std::sqrt(j * j + 4.0 * h * h);
	std::vector<double> expected{-r, -j, j, r};
	std::sort(expected.begin(), expected.end());
	for(int k = 0; k < 4; ++k) {
		CHECK_THAT(es.eigenvalues()(k), WithinAbs(expected[static_cast<std::size_t>(k)], 1e-13));
	}
}

TEST_CASE("Hamiltonian matches an explicit Kronecker sum", "[operators]")
{
	const ChainParams p{.n_sites = 4, .coupling = 0.9, .transverse = -0.6, .longitudinal = 0.4};
	const auto h = build_hamiltonian(p);
	CMatrix ref = CMatrix::Zero(16, 16);
	for(int i = 0; i + 1 < 4; ++i) {
		ref -= p.coupling * embed(pauli(Axis::z, i), 4) * embed(pauli(Axis::z, i + 1), 4);
	}
	for(int i = 0; i < 4; ++i) {
		ref -= p.transverse * embed(pauli(Axis::x, i), 4) + p.longitudinal * embed(pauli(Axis::z, i), 4);
	}
	CHECK((h.complex_matrix() - ref).norm() < 1e-14);
	CHECK((h.matrix() - h.matrix().transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("N=11 chain builds and the size guard holds", "[operators]")
{
	const auto h = build_hamiltonian({.n_sites = 11, .coupling = 1.0, .transverse = 0.5, .longitudinal = 0.4});
	CHECK(h.dim() == 2048);
	CHECK((h.matrix() - h.matrix().transpose()).cwiseAbs().maxCoeff() <= 1e-12);
	CHECK_THROWS_AS(build_hamiltonian({.n_sites = 15}), std::length_error);
	CHECK_THROWS_AS(build_hamiltonian({.n_sites = 0}), std::invalid_argument);
	CHECK_THROWS_AS(build_hamiltonian({.n_sites = 2, .coupling = std::nan("")}), std::invalid_argument);
}

TEST_CASE("Hermitian wrapper rejects non-Hermitian input", "[operators]")
{
	CMatrix m(2, 2);
	m << 1.0, 2.0, 0.0, 1.0;
	CHECK_THROWS_AS(Hermitian<cplx>(m), std::invalid_argument);
	CMatrix ok(2, 2);
	ok << 1.0, cplx(0.0, 1.0), cplx(0.0, -1.0), 2.0;
	CHECK_NOTHROW(Hermitian<cplx>(ok));
}

TEST_CASE("commutators", "[operators]")
{
	const auto h = build_hamiltonian({.n_sites = 3, .coupling = 1.0, .transverse = 0.8, .longitudinal = 0.4});
	CHECK(commutator(h.matrix(), h.matrix()).norm() == 0.0);
	const CMatrix a = embed(pauli(Axis::z, 0), 2);
	const CMatrix b = embed(pauli(Axis::x, 1), 2);
	CHECK(commutator(a, b).norm() == 0.0);
	CHECK_THROWS_AS(commutator(CMatrix::Identity(2, 2), CMatrix::Identity(4, 4)), std::invalid_argument);

	// [H, X] of Hermitian operators is anti-Hermitian
	const CMatrix c = commutator(h.matrix(), embed(pauli(Axis::x, 1), 3));
	CHECK((c + c.adjoint()).norm() < 1e-14);
}

TEST_CASE("reflection permutation is an involution commuting with H", "[operators]")
{
	const int n = 5;
	const auto perm = reflection_permutation(n);
	const auto h = build_hamiltonian({.n_sites = n, .coupling = 1.0, .transverse = 0.7, .longitudinal = 0.4});
	for(std::size_t i = 0; i < perm.size(); ++i) {
		CHECK(perm[perm[i]] == i);
	}
	double diff = 0.0;
	for(std::size_t i = 0; i < perm.size(); ++i) {
		for(std::size_t j = 0; j < perm.size(); ++j) {
			diff = std::max(diff, std::abs(h.matrix()(static_cast<Eigen::Index>(perm[i]), static_cast<Eigen::Index>(perm[j]))
			                               - h.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
		}
	}
	CHECK(diff == 0.0);
}
