#include "stopwatch/clock.hpp"
#include "test_support.hpp"

#include <catch_amalgamated.hpp>

using namespace stopwatch;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{

std::vector<double> grid(double step, int count)
{
	std::vector<double> t(static_cast<std::size_t>(count));
	for(int k = 0; k < count; ++k) {
		t[static_cast<std::size_t>(k)] = step * k;
	}
	return t;
}

ClockProtocol chaotic(int n)
{
	return ClockProtocol::standard({.n_sites = n, .coupling = 1.0, .transverse = 1.05, .longitudinal = 0.5});
}

} // namespace

TEST_CASE("protocol validation", "[clock]")
{
	const ChainParams chain{.n_sites = 4, .coupling = 1.0, .transverse = 1.0, .longitudinal = 0.4};
	CHECK_NOTHROW(ClockProtocol::standard(chain).validate());
	CHECK_THROWS_AS(ClockProtocol::standard({.n_sites = 1}), std::invalid_argument);
	ClockProtocol overlapping{chain, pauli(Axis::x, 0), pauli(Axis::z, 0), PureState::basis(4, 0)};
	CHECK_THROWS_AS(overlapping.validate(), std::invalid_argument);
	CMatrix not_unitary = CMatrix::Identity(2, 2);
	not_unitary(0, 0) = 2.0;
	ClockProtocol bad{chain, LocalOperator({0}, not_unitary), pauli(Axis::z, 2), PureState::basis(4, 0)};
	CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
	ClockProtocol wrong_size{chain, pauli(Axis::x, 0), pauli(Axis::z, 2), PureState::basis(3, 0)};
	CHECK_THROWS_AS(wrong_size.validate(), std::invalid_argument);
}

TEST_CASE("branch overlap equals the chain OTOC", "[clock][oracle]")
{
	std::mt19937_64 rng(8);
	const ChainParams chain{.n_sites = 4, .coupling = 1.0, .transverse = 0.9, .longitudinal = 0.4};
	const auto spec = eigendecompose(build_hamiltonian(chain));
	const ClockProtocol proto{chain, pauli(Axis::x, 0), pauli(Axis::z, 2), PureState(test::random_state(4, rng))};
	for(double t : {0.0, 0.3, 1.1, 2.5, 6.0}) {
		const auto pair = branches(spec, proto, t);
		CHECK_THAT(pair.left.amplitudes().norm(), WithinAbs(1.0, 1e-12));
		CHECK_THAT(pair.right.amplitudes().norm(), WithinAbs(1.0, 1e-12));
		const cplx otoc = otoc_4pt(spec, proto.initial, proto.o1, proto.o2, t).value;
		CHECK(std::abs(pair.coherence() - otoc) < 1e-10);
	}
	CHECK(std::abs(branches(spec, proto, 0.0).coherence() - 1.0) < 1e-12);

	// no dynamics: constant <O1 O2 O1 O2>
	const ChainParams idle{.n_sites = 4, .coupling = 0.0, .transverse = 0.0, .longitudinal = 0.0};
	const auto still = eigendecompose(build_hamiltonian(idle));
	const ClockProtocol p2{idle, pauli(Axis::x, 0), pauli(Axis::z, 2), proto.initial};
	const cplx c0 = branches(still, p2, 0.0).coherence();
	for(double t : {0.5, 3.0}) {
		CHECK(std::abs(branches(still, p2, t).coherence() - c0) < 1e-13);
	}
}

TEST_CASE("ancilla state", "[clock]")
{
	const auto plus = ancilla_state(cplx{1.0, 0.0});
	CHECK_THAT(purity(plus), WithinAbs(1.0, 1e-15));
	CHECK_THAT(plus.matrix()(0, 1).real(), WithinAbs(0.5, 1e-15));
	const auto mixed = ancilla_state(cplx{0.0, 0.0});
	CHECK((mixed.matrix() - CMatrix::Identity(2, 2) / 2.0).norm() == 0.0);

	std::mt19937_64 rng(12);
	const ChainParams chain{.n_sites = 5, .coupling = 1.0, .transverse = 1.2, .longitudinal = 0.4};
	const auto spec = eigendecompose(build_hamiltonian(chain));
	for(int k = 0; k < 10; ++k) {
		const ClockProtocol proto{chain, pauli(Axis::y, 1), pauli(Axis::x, 3), PureState(test::random_state(5, rng))};
		const auto pair = branches(spec, proto, 0.4 * (k + 1));
		const double mag = std::abs(pair.coherence());
		const RVector ev = ancilla_state(pair).eigenvalues();
		CHECK_THAT(ev.minCoeff(), WithinAbs((1.0 - mag) / 2.0, 1e-13));
		CHECK_THAT(ev.maxCoeff(), WithinAbs((1.0 + mag) / 2.0, 1e-13));
	}
}

TEST_CASE("standard protocol keeps the coherence real", "[clock]")
{
	const auto proto = chaotic(6);
	const auto ham = build_hamiltonian(proto.chain);
	const auto spec = eigendecompose(ham);
	const auto times = grid(0.1, 60);
	const auto traj = clock_trajectory(spec, ham, proto, times);
	for(std::size_t k = 0; k < times.size(); ++k) {
		CHECK(std::abs(traj.coherence[k].imag()) < 1e-12);
		CHECK(std::abs(traj.rate[k].imag()) < 1e-12);
		CHECK(std::abs(branches(spec, proto, times[k]).coherence() - traj.coherence[k]) < 1e-10);
	}
	CHECK_NOTHROW(real_part(traj.times, traj.coherence));
	CHECK_THROWS_AS(real_part({0.0}, {cplx{0.5, 0.1}}), std::domain_error);
}

TEST_CASE("exact clock derivatives match finite differences", "[clock]")
{
	const auto proto = chaotic(5);
	const auto ham = build_hamiltonian(proto.chain);
	const auto spec = eigendecompose(ham);
	const double dt = 1e-4;
	for(double t : {0.2, 0.9, 2.3}) {
		const double ts[] = {t - dt, t, t + dt};
		const auto tr = clock_trajectory(spec, ham, proto, ts);
		const cplx d1 = (tr.coherence[2] - tr.coherence[0]) / (2.0 * dt);
		const cplx d2 = (tr.coherence[2] - 2.0 * tr.coherence[1] + tr.coherence[0]) / (dt * dt);
		CHECK(std::abs(tr.rate[1] - d1) < 1e-7);
		CHECK(std::abs(tr.curvature[1] - d2) < 1e-5);
	}
}

TEST_CASE("ancilla QFI identity on analytic coherences", "[clock]")
{
	const double omega = 1.7;
	const auto t = grid(1e-3, 801);
	std::vector<double> c;
	std::vector<double> rate;
	for(double s : t) {
		c.push_back(std::cos(omega * s));
		rate.push_back(-omega * std::sin(omega * s));
	}
	const TimeSeries cosine(t, c);
	const auto fd = clock_qfi_identity(cosine);
	const auto exact = clock_qfi_identity(cosine, &rate);
	std::size_t compared = 0;
	for(std::size_t k = 0; k < t.size(); ++k) {
		if(std::isnan(exact.qfi_state[k])) {
			continue;
		}
		CHECK_THAT(exact.qfi_state[k], WithinRel(omega * omega, 1e-10));
		CHECK_THAT(fd.qfi_state[k], WithinRel(fd.qfi_formula[k], 1e-10));
		++compared;
	}
	CHECK(compared > 700);
	CHECK(fd.max_relative_deviation < 1e-10);
	CHECK(exact.skipped.front() == 0);

	const TimeSeries flat(t, std::vector<double>(t.size(), 0.6));
	const auto f = clock_qfi_identity(flat);
	for(std::size_t k = 1; k + 1 < t.size(); ++k) {
		CHECK(f.qfi_state[k] == 0.0);
		CHECK(f.qfi_formula[k] == 0.0);
	}

	// |c| = 1 uses the curvature limit
	CHECK_THAT(ancilla_qfi(cplx{1.0, 0.0}, cplx{0.0, 0.0}, cplx{-omega * omega, 0.0}), WithinRel(omega * omega, 1e-15));
	CHECK_THAT(ancilla_qfi(cplx{std::cos(0.3), 0.0}, cplx{-omega * std::sin(0.3), 0.0}, cplx{}), WithinRel(omega * omega, 1e-12));
}

TEST_CASE("cosine identity: constant QFI clock", "[clock]")
{
	const double omega = 0.8;
	const auto t = grid(0.01, 400);
	std::vector<double> c;
	for(double s : t) {
		c.push_back(std::cos(omega * s));
	}
	const auto rep = clock_cosine_identity(TimeSeries(t, std::vector<double>(t.size(), omega * omega)), TimeSeries(t, c));
	CHECK(rep.max_deviation < 1e-13);
	CHECK(rep.window_points > 100);
	CHECK(rep.window_end <= std::numbers::pi / (2.0 * omega) + 1e-12);
}

TEST_CASE("chain clock: QFI and cosine identities", "[clock]")
{
	const auto proto = chaotic(6);
	const auto ham = build_hamiltonian(proto.chain);
	const auto spec = eigendecompose(ham);

	auto run = [&](double dt, double t_end) {
		const auto times = grid(dt, static_cast<int>(std::lround(t_end / dt)) + 1);
		const auto traj = clock_trajectory(spec, ham, proto, times);
		const TimeSeries coherence = real_part(traj.times, traj.coherence);
		return std::make_pair(coherence, ancilla_qfi_series(traj));
	};

	const auto [coherence, qfi] = run(1e-3, 1.5);
	const auto id = clock_qfi_identity(coherence);
	CHECK(id.max_relative_deviation < 1e-4);

	// 1 - c grows like t^4 here (O2 needs two commutator steps to reach O1),
	// so the exact rate is compared with differences only away from t = 0
	const auto traj = clock_trajectory(spec, ham, proto, coherence.times);
	const auto fd = central_derivative(coherence);
	for(std::size_t k = 100; k + 1 < coherence.size(); ++k) {
		// central differences carry c''' dt^2 / 6
		CHECK(std::abs(traj.rate[k].real() - fd.values[k]) < 1e-4);
	}

	const auto coarse = clock_cosine_identity(run(0.02, 1.5).second, run(0.02, 1.5).first);
	const auto fine = clock_cosine_identity(run(0.01, 1.5).second, run(0.01, 1.5).first);
	CHECK(coarse.window_points > 10);
	CHECK(coarse.max_deviation < 1e-3);
	const double ratio = coarse.max_deviation / fine.max_deviation;
	CHECK(ratio > 3.0);
	CHECK(ratio < 5.0);
	CHECK(std::abs(fine.lambda_estimate - fine.lambda_from_action) < 1e-3);
}
