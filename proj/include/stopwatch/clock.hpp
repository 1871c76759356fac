#pragma once

// Ancilla-controlled interferometric clock. A control qubit in |+> steers
// forward/backward evolution of the chain; after tracing out the chain the
// ancilla coherence is the OTOC <O2(t) O1 O2(t) O1>, and its QFI saturates
// the Lyapunov bound. The joint tau^z (x) H evolution is never built: the
// two branch states are computed directly.

#include "scrambling.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace stopwatch
{

struct ClockProtocol
{
	ChainParams chain;
	LocalOperator o1;
	LocalOperator o2;
	PureState initial;

	void validate() const
	{
		chain.validate();
		if(!o1.is_unitary() || !o2.is_unitary()) {
			throw std::invalid_argument("ClockProtocol: O1 and O2 must be unitary");
		}
		if(o1.overlaps(o2)) {
			throw std::invalid_argument("ClockProtocol: O1 and O2 must have disjoint supports");
		}
		if(initial.n_sites() != chain.n_sites) {
			throw std::invalid_argument("ClockProtocol: initial state does not match the chain");
		}
		detail::check_support(o1, chain.n_sites);
		detail::check_support(o2, chain.n_sites);
	}

	/// O1 = z on site 0, O2 = x on site 1, chain prepared in |0...0>. The
	/// initial state is an O1 eigenstate, which keeps the coherence real for
	/// real-symmetric H.
	static ClockProtocol standard(const ChainParams& chain)
	{
		if(chain.n_sites < 2) {
			throw std::invalid_argument("ClockProtocol: need at least two sites");
		}
		return {chain, pauli(Axis::z, 0), pauli(Axis::x, 1), PureState::basis(chain.n_sites, 0)};
	}
};

struct BranchPair
{
	PureState left;  // O1 e^{iHt} O2 e^{-iHt} |psi>
	PureState right; // e^{iHt} O2 e^{-iHt} O1 |psi>

	[[nodiscard]] cplx coherence() const { return left.amplitudes().dot(right.amplitudes()); }
};

template <typename Scalar>
BranchPair branches(const SpectralDecomposition<Scalar>& spec, const ClockProtocol& proto, double t)
{
	proto.validate();
	const int n = proto.chain.n_sites;
	const CVector& psi = proto.initial.amplitudes();
	CVector right = heisenberg_apply(spec, proto.o2, t, apply(proto.o1, psi, n));
	CVector left = apply(proto.o1, heisenberg_apply(spec, proto.o2, t, psi), n);
	return {PureState::normalized(std::move(left)), PureState::normalized(std::move(right))};
}

/// Ancilla state (1/2)[[1, c], [c*, 1]] with c = <L|R>.
inline DensityMatrix ancilla_state(cplx coherence)
{
	CMatrix m(2, 2);
	m << 1.0, coherence, std::conj(coherence), 1.0;
	return DensityMatrix(m / 2.0);
}

inline DensityMatrix ancilla_state(const BranchPair& pair) { return ancilla_state(pair.coherence()); }

/// d/dt of the ancilla state for coherence rate dc/dt.
inline Hermitian<cplx> ancilla_generator(cplx coherence_rate)
{
	CMatrix m = CMatrix::Zero(2, 2);
	m(0, 1) = coherence_rate / 2.0;
	m(1, 0) = std::conj(coherence_rate) / 2.0;
	return Hermitian<cplx>(m);
}

/// Coherence c(t) = <psi| X^dag O1^dag X O1 |psi> with X = O2(t), together
/// with its exact first and second time derivatives (dX/dt = (i[H,O2])(t)).
struct ClockTrajectory
{
	std::vector<double> times;
	std::vector<cplx> coherence;
	std::vector<cplx> rate;
	std::vector<cplx> curvature;
};

template <typename Scalar>
ClockTrajectory clock_trajectory(const SpectralDecomposition<Scalar>& spec, const Hermitian<Scalar>& h,
                                 const ClockProtocol& proto, std::span<const double> times)
{
	proto.validate();
	const int n = proto.chain.n_sites;
	if(h.dim() != spec.dim() || spec.n_sites() != n) {
		throw std::invalid_argument("clock_trajectory: Hamiltonian, spectrum and protocol disagree");
	}
	const CMatrix hc = h.matrix().template cast<cplx>();
	const cplx i{0.0, 1.0};
	const CMatrix x0 = embed(proto.o2, n);
	const CMatrix x1 = i * commutator(hc, x0);
	const CMatrix x2 = i * commutator(hc, x1);
	// Heisenberg operators in the eigenbasis: (V^dag K V)_{mn} e^{i(E_m - E_n)t}.
	const CMatrix k0 = spec.operator_to_eigenbasis(x0);
	const CMatrix k1 = spec.operator_to_eigenbasis(x1);
	const CMatrix k2 = spec.operator_to_eigenbasis(x2);

	const CVector psi_e = spec.to_eigenbasis(proto.initial.amplitudes()).col(0);
	const CVector o1psi_e = spec.to_eigenbasis(apply(proto.o1, proto.initial.amplitudes(), n)).col(0);

	ClockTrajectory out;
	out.times.assign(times.begin(), times.end());
	for(double t : times) {
		const CVector d = phases(spec.energies, t);
		auto heis = [&](const CMatrix& k, const CVector& v) -> CVector {
			return spec.from_eigenbasis(d.conjugate().cwiseProduct(k * d.cwiseProduct(v))).col(0);
		};
		// Z O1 psi and O1 Y psi in the computational basis.
		const CVector r0 = heis(k0, o1psi_e);
		const CVector r1 = heis(k1, o1psi_e);
		const CVector r2 = heis(k2, o1psi_e);
		const CVector l0 = apply(proto.o1, heis(k0, psi_e), n);
		const CVector l1 = apply(proto.o1, heis(k1, psi_e), n);
		const CVector l2 = apply(proto.o1, heis(k2, psi_e), n);
		out.coherence.push_back(l0.dot(r0));
		out.rate.push_back(l1.dot(r0) + l0.dot(r1));
		out.curvature.push_back(l2.dot(r0) + 2.0 * l1.dot(r1) + l0.dot(r2));
	}
	return out;
}

/// Ancilla QFI from the exact generator. Where the ancilla is pure
/// (|c| = 1, a stationary point of c) the rank drops and the spectral sum
/// is replaced by its one-sided limit |d^2c/dt^2|.
inline double ancilla_qfi(cplx c, cplx rate, cplx curvature, double purity_tol = 1e-9)
{
	if(1.0 - std::abs(c) <= purity_tol) {
		return std::abs(curvature.real());
	}
	return qfi_spectral(ancilla_state(c), ancilla_generator(rate)).value;
}

inline TimeSeries real_part(const std::vector<double>& times, const std::vector<cplx>& values, double imag_tol = 1e-9)
{
	std::vector<double> re(values.size());
	for(std::size_t k = 0; k < values.size(); ++k) {
		if(std::abs(values[k].imag()) > imag_tol) {
			throw std::domain_error("clock: coherence is not real (|Im c| = " + std::to_string(std::abs(values[k].imag()))
			                        + "); identity checks need a real OTOC");
		}
		re[k] = values[k].real();
	}
	return {times, std::move(re)};
}

inline TimeSeries ancilla_qfi_series(const ClockTrajectory& traj)
{
	std::vector<double> v(traj.times.size());
	for(std::size_t k = 0; k < v.size(); ++k) {
		v[k] = ancilla_qfi(traj.coherence[k], traj.rate[k], traj.curvature[k]);
	}
	return {traj.times, std::move(v)};
}

struct ClockQfiReport
{
	std::vector<double> qfi_state;   // spectral QFI of the ancilla state
	std::vector<double> qfi_formula; // dO^2 / (1 - O^2), NaN where skipped
	std::vector<std::size_t> skipped;
	double max_relative_deviation = 0.0;
};

/// Compares the ancilla QFI with dO/dt^2 / (1 - O^2) on interior samples,
/// dO/dt from central differences. The state side uses `exact_rate` when
/// given, otherwise the same finite-difference generator.
inline ClockQfiReport clock_qfi_identity(const TimeSeries& coherence, const std::vector<double>* exact_rate = nullptr,
                                         double abs_floor = 1e-12)
{
	coherence.validate();
	if(exact_rate != nullptr && exact_rate->size() != coherence.size()) {
		throw std::invalid_argument("clock_qfi_identity: rate series is not aligned");
	}
	const TimeSeries fd = central_derivative(coherence);
	const auto n = coherence.size();
	ClockQfiReport rep;
	rep.qfi_state.assign(n, std::numeric_limits<double>::quiet_NaN());
	rep.qfi_formula.assign(n, std::numeric_limits<double>::quiet_NaN());
	for(std::size_t k = 0; k < n; ++k) {
		const double c = coherence.values[k];
		const double rate = exact_rate != nullptr ? (*exact_rate)[k] : fd.values[k];
		const bool interior = k > 0 && k + 1 < n;
		if(std::abs(c) >= 1.0 - 1e-12 || !interior) {
			rep.skipped.push_back(k);
			continue;
		}
		rep.qfi_state[k] = qfi_spectral(ancilla_state(c), ancilla_generator(rate)).value;
		rep.qfi_formula[k] = fd.values[k] * fd.values[k] / (1.0 - c * c);
		const double scale = std::max({std::abs(rep.qfi_state[k]), std::abs(rep.qfi_formula[k]), abs_floor});
		rep.max_relative_deviation = std::max(rep.max_relative_deviation, std::abs(rep.qfi_state[k] - rep.qfi_formula[k]) / scale);
	}
	return rep;
}

struct ClockCosineReport
{
	double max_deviation = 0.0; // max |O_t - cos(action)| over the window
	double window_end = 0.0;
	std::size_t window_points = 0;
	// Early-time Lyapunov estimate -ln(O_t)/t against action^2 / (2t) at the
	// first positive sample.
	double lambda_estimate = std::numeric_limits<double>::quiet_NaN();
	double lambda_from_action = std::numeric_limits<double>::quiet_NaN();
};

/// O_t = cos(int_0^t sqrt(I_F)) on the window where the action stays in the
/// first quadrant and O_t has not turned back up.
inline ClockCosineReport clock_cosine_identity(const TimeSeries& qfi, const TimeSeries& coherence)
{
	qfi.validate();
	coherence.validate();
	if(qfi.times != coherence.times) {
		throw std::invalid_argument("clock_cosine_identity: series are not aligned");
	}
	const auto action = cumulative_action(qfi);
	ClockCosineReport rep;
	for(std::size_t k = 0; k < action.size(); ++k) {
		if(action[k] > std::numbers::pi / 2.0) {
			break;
		}
		if(k > 0 && coherence.values[k] > coherence.values[k - 1]) {
			break;
		}
		rep.max_deviation = std::max(rep.max_deviation, std::abs(coherence.values[k] - std::cos(action[k])));
		rep.window_end = coherence.times[k];
		rep.window_points = k + 1;
	}
	for(std::size_t k = 0; k < rep.window_points; ++k) {
		const double t = coherence.times[k];
		if(t > 0.0 && coherence.values[k] > 0.0) {
			rep.lambda_estimate = -std::log(coherence.values[k]) / t;
			rep.lambda_from_action = action[k] * action[k] / (2.0 * t);
			break;
		}
	}
	return rep;
}

} // namespace stopwatch
