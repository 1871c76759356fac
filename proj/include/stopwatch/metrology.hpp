#pragma once

// Subsystem metrology: purity, Renyi-2 entropy, the spectral quantum Fisher
// information with time as the parameter, its Bures-fidelity finite
// difference check, variance of rho_A as an observable, the sandwich bounds
// in terms of ||M_A||_2, and the speed-limit action integral.

#include "dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace stopwatch
{

/// Sampled trajectory: strictly increasing times and one value per time.
struct TimeSeries
{
	std::vector<double> times;
	std::vector<double> values;

	TimeSeries() = default;

	TimeSeries(std::vector<double> t, std::vector<double> v) : times(std::move(t)), values(std::move(v)) { validate(); }

	void validate() const
	{
		if(times.size() != values.size()) {
			throw std::invalid_argument("TimeSeries: times and values differ in length");
		}
		for(std::size_t k = 1; k < times.size(); ++k) {
			if(!(times[k] > times[k - 1])) {
				throw std::invalid_argument("TimeSeries: times must be strictly increasing");
			}
		}
	}

	[[nodiscard]] std::size_t size() const noexcept { return times.size(); }
	[[nodiscard]] bool empty() const noexcept { return times.empty(); }
};

struct TruncationPolicy
{
	double eigen_floor = 1e-12;

	void validate() const
	{
		if(!(eigen_floor > 0.0)) {
			throw std::invalid_argument("TruncationPolicy: eigen_floor must be positive");
		}
	}
};

inline double purity(const DensityMatrix& rho)
{
	return (rho.matrix() * rho.matrix()).trace().real();
}

inline double renyi2(const DensityMatrix& rho) { return -std::log(purity(rho)); }

/// d/dt tr(rho^2) = 2 tr(rho M) for the generator M = d rho / dt.
inline double purity_rate(const DensityMatrix& rho, const Hermitian<cplx>& generator)
{
	return 2.0 * (rho.matrix() * generator.matrix()).trace().real();
}

struct QfiResult
{
	double value = 0.0;
	bool all_truncated = false; // every pair had p_j + p_k <= floor
};

/// I_F = 2 sum_{jk} |<j|M|k>|^2 / (p_j + p_k) over the eigenbasis of rho,
/// dropping pairs with p_j + p_k <= floor.
inline QfiResult qfi_spectral(const DensityMatrix& rho, const Hermitian<cplx>& generator, TruncationPolicy pol = {})
{
	pol.validate();
	if(generator.dim() != rho.dim()) {
		throw std::invalid_argument("qfi_spectral: generator and state dimensions differ");
	}
	Eigen::SelfAdjointEigenSolver<CMatrix> solver(rho.matrix(), Eigen::ComputeEigenvectors);
	const RVector& p = solver.eigenvalues();
	const CMatrix& w = solver.eigenvectors();
	const CMatrix mk = w.adjoint() * generator.matrix() * w;

	QfiResult out;
	bool kept = false;
	for(Eigen::Index j = 0; j < p.size(); ++j) {
		for(Eigen::Index k = 0; k < p.size(); ++k) {
			const double den = p(j) + p(k);
			if(den > pol.eigen_floor) {
				out.value += 2.0 * std::norm(mk(j, k)) / den;
				kept = true;
			}
		}
	}
	out.all_truncated = !kept;
	return out;
}

namespace detail
{

// Eigenvalues below this fraction of the largest are rounding noise; their
// square roots would otherwise leak ~1e-8 into fidelities of pure states.
inline constexpr double kSqrtNoise = 1e-14;

inline RVector noise_free_roots(const RVector& ev)
{
	const double cut = kSqrtNoise * std::max(ev.maxCoeff(), 0.0);
	return ev.unaryExpr([cut](double x) { return x > cut ? std::sqrt(x) : 0.0; });
}

inline CMatrix psd_sqrt(const CMatrix& m)
{
	Eigen::SelfAdjointEigenSolver<CMatrix> solver(m, Eigen::ComputeEigenvectors);
	const RVector roots = noise_free_roots(solver.eigenvalues());
	return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().adjoint();
}

} // namespace detail

/// Uhlmann root fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)).
inline double root_fidelity(const DensityMatrix& rho, const DensityMatrix& sigma)
{
	if(rho.dim() != sigma.dim()) {
		throw std::invalid_argument("root_fidelity: dimension mismatch");
	}
	const CMatrix s = detail::psd_sqrt(rho.matrix());
	CMatrix inner = s * sigma.matrix() * s;
	inner = (inner + inner.adjoint()).eval() / 2.0;
	Eigen::SelfAdjointEigenSolver<CMatrix> solver(inner, Eigen::EigenvaluesOnly);
	return detail::noise_free_roots(solver.eigenvalues()).sum();
}

/// Finite-difference QFI from the Bures distance: 8 (1 - F) / dt^2.
inline double qfi_bures_oracle(const DensityMatrix& rho_t, const DensityMatrix& rho_tdt, double dt)
{
	if(!(dt > 0.0)) {
		throw std::invalid_argument("qfi_bures_oracle: dt must be positive");
	}
	const double f = root_fidelity(rho_t, rho_tdt);
	if(f > 1.0 + 1e-10) {
		throw std::runtime_error("qfi_bures_oracle: fidelity exceeds 1 (" + std::to_string(f) + ")");
	}
	return 8.0 * (1.0 - std::min(f, 1.0)) / (dt * dt);
}

/// (Delta rho)^2 = tr rho^3 - (tr rho^2)^2, rho used as its own observable.
inline double variance_rho(const DensityMatrix& rho)
{
	const CMatrix r2 = rho.matrix() * rho.matrix();
	const double p2 = r2.trace().real();
	const double p3 = (r2 * rho.matrix()).trace().real();
	return p3 - p2 * p2;
}

/// Qubit form of variance_rho in terms of the purity p: (3p - 1)/2 - p^2.
inline double qubit_variance_from_purity(double p) { return 0.5 * (3.0 * p - 1.0) - p * p; }

struct SandwichBounds
{
	double lower = 0.0;
	double upper = 0.0; // +inf when rho is singular and M != 0
};

/// ||M||_2^2 / p_max <= I_F <= ||M||_2^2 / p_min. The factor follows from
/// 2 p_min <= p_j + p_k <= 2 p_max applied to the prefactor-2 spectral sum;
/// the looser lower bound with 2 p_max is implied.
inline SandwichBounds sandwich_bounds(const DensityMatrix& rho, const Hermitian<cplx>& generator, double eigen_floor = 1e-12)
{
	if(generator.dim() != rho.dim()) {
		throw std::invalid_argument("sandwich_bounds: generator and state dimensions differ");
	}
	const double hs = generator.matrix().squaredNorm();
	const RVector p = rho.eigenvalues();
	const double pmin = p.minCoeff();
	const double pmax = p.maxCoeff();
	SandwichBounds out;
	out.lower = hs / pmax;
	if(hs == 0.0) {
		out.upper = 0.0;
	} else if(pmin > eigen_floor) {
		out.upper = hs / pmin;
	} else {
		out.upper = std::numeric_limits<double>::infinity();
	}
	return out;
}

/// m_A^2 = ||M_A||_2^2 / L for a chain of L sites.
inline double intensive_ma2(const Hermitian<cplx>& generator, int n_sites)
{
	if(n_sites < 1) {
		throw std::invalid_argument("intensive_ma2: n_sites must be >= 1");
	}
	return generator.matrix().squaredNorm() / static_cast<double>(n_sites);
}

/// Running trapezoidal integral of sqrt(I_F) on the sample grid.
inline std::vector<double> cumulative_action(const TimeSeries& qfi)
{
	qfi.validate();
	std::vector<double> out(qfi.size(), 0.0);
	for(std::size_t k = 1; k < qfi.size(); ++k) {
		const double a = std::sqrt(std::max(qfi.values[k - 1], 0.0));
		const double b = std::sqrt(std::max(qfi.values[k], 0.0));
		out[k] = out[k - 1] + 0.5 * (a + b) * (qfi.times[k] - qfi.times[k - 1]);
	}
	return out;
}

/// Integral of sqrt(I_F) from times[0] to t_end (trapezoidal; sqrt(I_F) is
/// interpolated linearly inside the last partial interval).
inline double qsl_action(const TimeSeries& qfi, double t_end)
{
	qfi.validate();
	if(qfi.empty()) {
		throw std::invalid_argument("qsl_action: empty series");
	}
	const double t0 = qfi.times.front();
	const double t1 = qfi.times.back();
	const double slack = 1e-12 * std::max(1.0, std::abs(t1));
	if(t_end < t0 - slack || t_end > t1 + slack) {
		throw std::out_of_range("qsl_action: t_end outside the sampled grid");
	}
	t_end = std::clamp(t_end, t0, t1);
	double acc = 0.0;
	for(std::size_t k = 1; k < qfi.size(); ++k) {
		const double ta = qfi.times[k - 1];
		if(ta >= t_end) {
			break;
		}
		const double tb = qfi.times[k];
		const double a = std::sqrt(std::max(qfi.values[k - 1], 0.0));
		const double b = std::sqrt(std::max(qfi.values[k], 0.0));
		if(tb <= t_end) {
			acc += 0.5 * (a + b) * (tb - ta);
		} else {
			const double frac = (t_end - ta) / (tb - ta);
			const double bm = a + frac * (b - a);
			acc += 0.5 * (a + bm) * (t_end - ta);
		}
	}
	return acc;
}

/// d/dt on the sample grid: central differences inside, one-sided at the ends.
inline TimeSeries central_derivative(const TimeSeries& s)
{
	s.validate();
	const auto n = s.size();
	std::vector<double> d(n, 0.0);
	if(n >= 2) {
		d.front() = (s.values[1] - s.values[0]) / (s.times[1] - s.times[0]);
		d.back() = (s.values[n - 1] - s.values[n - 2]) / (s.times[n - 1] - s.times[n - 2]);
		for(std::size_t k = 1; k + 1 < n; ++k) {
			d[k] = (s.values[k + 1] - s.values[k - 1]) / (s.times[k + 1] - s.times[k - 1]);
		}
	}
	return {s.times, std::move(d)};
}

} // namespace stopwatch
