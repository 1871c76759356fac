#pragma once

// Scrambling diagnostics: four-point OTOCs, the purity form of the averaged
// OTOC, a Haar Monte-Carlo estimate of the averaged correlator, Lyapunov
// fits, and the chaos bounds built from the subsystem QFI.

#include "metrology.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace stopwatch
{

/// exp(iHt_k) B exp(-iHt_k) v for every t_k, as columns.
template <typename Scalar>
CMatrix heisenberg_apply_batch(const SpectralDecomposition<Scalar>& spec, const LocalOperator& b,
                               std::span<const double> times, const CVector& v)
{
	const int n = spec.n_sites();
	const auto nt = static_cast<Eigen::Index>(times.size());
	const CVector c = spec.to_eigenbasis(v).col(0);
	CMatrix z(spec.dim(), nt);
	for(Eigen::Index k = 0; k < nt; ++k) {
		z.col(k) = phases(spec.energies, times[static_cast<std::size_t>(k)]).cwiseProduct(c);
	}
	CMatrix x = spec.from_eigenbasis(z);
	for(Eigen::Index k = 0; k < nt; ++k) {
		x.col(k) = apply(b, x.col(k), n);
	}
	CMatrix y = spec.to_eigenbasis(x);
	for(Eigen::Index k = 0; k < nt; ++k) {
		y.col(k) = phases(spec.energies, times[static_cast<std::size_t>(k)]).conjugate().cwiseProduct(y.col(k));
	}
	return spec.from_eigenbasis(y);
}

/// <psi| B^dag(t) A^dag B(t) A |psi> at each time. Overlapping supports are
/// allowed (the correlator is still defined) and reported by `otoc_4pt`.
template <typename Scalar>
std::vector<cplx> otoc_series(const SpectralDecomposition<Scalar>& spec, const PureState& psi, const LocalOperator& a,
                              const LocalOperator& b, std::span<const double> times)
{
	const int n = spec.n_sites();
	if(psi.dim() != spec.dim()) {
		throw std::invalid_argument("otoc: state and spectrum dimensions differ");
	}
	// <A B(t) psi | B(t) A psi>
	const CMatrix right = heisenberg_apply_batch(spec, b, times, apply(a, psi.amplitudes(), n));
	const CMatrix bt_psi = heisenberg_apply_batch(spec, b, times, psi.amplitudes());
	std::vector<cplx> out(times.size());
	for(Eigen::Index k = 0; k < right.cols(); ++k) {
		const CVector left = apply(a, bt_psi.col(k), n);
		out[static_cast<std::size_t>(k)] = left.dot(right.col(k));
	}
	return out;
}

struct OtocPoint
{
	cplx value;
	bool overlapping_support = false;
};

template <typename Scalar>
OtocPoint otoc_4pt(const SpectralDecomposition<Scalar>& spec, const PureState& psi, const LocalOperator& a,
                   const LocalOperator& b, double t)
{
	const double ts[] = {t};
	return {otoc_series(spec, psi, a, b, ts).front(), a.overlaps(b)};
}

/// O_t = exp(-S_2(rho_A(t))) = tr rho_A(t)^2.
inline double averaged_otoc(const PureState& psi_t, const Bipartition& part)
{
	return purity(partial_trace(psi_t, part));
}

// ---------------------------------------------------------------------------
// Haar Monte-Carlo

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x)
{
	x += 0x9e3779b97f4a7c15ULL;
	x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
	x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
	return x ^ (x >> 31U);
}

/// Independent seed for stream `stream` of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
	return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of diag(R) moved into Q.
template <typename Rng>
CMatrix haar_unitary(Eigen::Index dim, Rng& rng)
{
	std::normal_distribution<double> normal(0.0, M_SQRT1_2);
	CMatrix z(dim, dim);
	for(Eigen::Index j = 0; j < dim; ++j) {
		for(Eigen::Index i = 0; i < dim; ++i) {
			const double re = normal(rng);
			const double im = normal(rng);
			z(i, j) = cplx{re, im};
		}
	}
	Eigen::HouseholderQR<CMatrix> qr(z);
	CMatrix q = qr.householderQ() * CMatrix::Identity(dim, dim);
	const CMatrix& r = qr.matrixQR();
	for(Eigen::Index j = 0; j < dim; ++j) {
		const double mag = std::abs(r(j, j));
		const cplx ph = mag > 0.0 ? r(j, j) / mag : cplx{1.0, 0.0};
		q.col(j) *= ph;
	}
	return q;
}

struct HaarEstimate
{
	double mean = 0.0;
	double std_error = 0.0;
	int samples = 0;
};

/// Monte-Carlo average over Haar-random unitaries B on subsystem B of
/// Re <psi| B^dag(t) A^dag B(t) A |psi>, one estimate per time. Sample k
/// draws from its own stream derive_seed(seed, k), so any partition of the
/// samples reproduces the serial result.
template <typename Scalar>
std::vector<HaarEstimate> haar_otoc_estimate(const SpectralDecomposition<Scalar>& spec, const PureState& psi,
                                             const LocalOperator& a, const Bipartition& part,
                                             std::span<const double> times, int n_samples, std::uint64_t seed)
{
	if(n_samples < 100) {
		throw std::invalid_argument("haar_otoc_estimate: need at least 100 samples");
	}
	if(part.sites_b().empty()) {
		throw std::invalid_argument("haar_otoc_estimate: subsystem B is empty");
	}
	for(int s : a.support()) {
		if(std::find(part.sites_a().begin(), part.sites_a().end(), s) == part.sites_a().end()) {
			throw std::invalid_argument("haar_otoc_estimate: A must act inside subsystem A");
		}
	}
	if(!a.is_unitary()) {
		throw std::invalid_argument("haar_otoc_estimate: A must be unitary");
	}

	const auto nt = times.size();
	std::vector<double> sum(nt, 0.0);
	std::vector<double> sum_sq(nt, 0.0);
	for(int k = 0; k < n_samples; ++k) {
		std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
		const LocalOperator b(part.sites_b(), haar_unitary(part.dim_b(), rng));
		const auto vals = otoc_series(spec, psi, a, b, times);
		for(std::size_t j = 0; j < nt; ++j) {
			const double v = vals[j].real();
			sum[j] += v;
			sum_sq[j] += v * v;
		}
	}
	std::vector<HaarEstimate> out(nt);
	const double n = n_samples;
	for(std::size_t j = 0; j < nt; ++j) {
		const double mean = sum[j] / n;
		const double var = std::max(sum_sq[j] / n - mean * mean, 0.0) * n / (n - 1.0);
		out[j] = {mean, std::sqrt(var / n), n_samples};
	}
	return out;
}

/// Same average with the initial state itself in the A slot, A = |psi><psi|,
/// scaled by d_B: d_B E_B |<psi| B(t) |psi>|^2. Its expectation is exactly
/// tr rho_A(t)^2, because the Haar twirl of B gives tr_B(.) (x) I / d_B.
template <typename Scalar>
std::vector<HaarEstimate> haar_otoc_estimate(const SpectralDecomposition<Scalar>& spec, const PureState& psi,
                                             const Bipartition& part, std::span<const double> times, int n_samples,
                                             std::uint64_t seed)
{
	if(n_samples < 100) {
		throw std::invalid_argument("haar_otoc_estimate: need at least 100 samples");
	}
	if(part.sites_b().empty()) {
		throw std::invalid_argument("haar_otoc_estimate: subsystem B is empty");
	}
	const int n = spec.n_sites();
	const CMatrix psi_t = evolve_batch(spec, psi.amplitudes(), times);
	const double d_b = static_cast<double>(part.dim_b());
	const auto nt = times.size();
	std::vector<double> sum(nt, 0.0);
	std::vector<double> sum_sq(nt, 0.0);
	for(int k = 0; k < n_samples; ++k) {
		std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
		const LocalOperator b(part.sites_b(), haar_unitary(part.dim_b(), rng));
		for(std::size_t j = 0; j < nt; ++j) {
			const CVector col = psi_t.col(static_cast<Eigen::Index>(j));
			const double v = d_b * std::norm(col.dot(apply(b, col, n)));
			sum[j] += v;
			sum_sq[j] += v * v;
		}
	}
	std::vector<HaarEstimate> out(nt);
	const double m = n_samples;
	for(std::size_t j = 0; j < nt; ++j) {
		const double mean = sum[j] / m;
		const double var = std::max(sum_sq[j] / m - mean * mean, 0.0) * m / (m - 1.0);
		out[j] = {mean, std::sqrt(var / m), n_samples};
	}
	return out;
}

// ---------------------------------------------------------------------------
// Lyapunov fits and bounds

struct FitPolicy
{
	double fit_lo = 0.35;
	double fit_hi = 0.9;
	int min_points = 5;
	double min_r_squared = 0.97;
};

struct LyapunovFit
{
	double lambda_q = std::numeric_limits<double>::quiet_NaN();
	double t_lo = 0.0;
	double t_hi = 0.0;
	double r_squared = 0.0;
	int points = 0;
	bool valid = false;

	[[nodiscard]] double midpoint() const { return 0.5 * (t_lo + t_hi); }
};

/// Least-squares fit of ln O_t against t over the first contiguous run of
/// samples with O_t in [fit_lo, fit_hi]; lambda_Q = -slope.
inline LyapunovFit fit_lyapunov(const TimeSeries& otoc, const FitPolicy& policy = {})
{
	otoc.validate();
	if(!(policy.fit_lo > 0.0) || !(policy.fit_hi > policy.fit_lo)) {
		throw std::invalid_argument("fit_lyapunov: need 0 < fit_lo < fit_hi");
	}
	auto inside = [&](double v) { return v >= policy.fit_lo && v <= policy.fit_hi; };

	std::size_t first = 0;
	while(first < otoc.size() && !inside(otoc.values[first])) {
		++first;
	}
	std::size_t last = first;
	while(last < otoc.size() && inside(otoc.values[last])) {
		++last;
	}

	LyapunovFit fit;
	fit.points = static_cast<int>(last - first);
	if(fit.points < 2) {
		return fit;
	}
	fit.t_lo = otoc.times[first];
	fit.t_hi = otoc.times[last - 1];

	const double n = fit.points;
	double mt = 0.0;
	double my = 0.0;
	for(std::size_t k = first; k < last; ++k) {
		mt += otoc.times[k];
		my += std::log(otoc.values[k]);
	}
	mt /= n;
	my /= n;
	double stt = 0.0;
	double sty = 0.0;
	double syy = 0.0;
	for(std::size_t k = first; k < last; ++k) {
		const double dt = otoc.times[k] - mt;
		const double dy = std::log(otoc.values[k]) - my;
		stt += dt * dt;
		sty += dt * dy;
		syy += dy * dy;
	}
	const double slope = sty / stt;
	double ss_res = 0.0;
	for(std::size_t k = first; k < last; ++k) {
		const double r = std::log(otoc.values[k]) - (my + slope * (otoc.times[k] - mt));
		ss_res += r * r;
	}
	fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 0.0;
	fit.lambda_q = -slope;
	fit.valid = fit.points >= policy.min_points && fit.r_squared >= policy.min_r_squared;
	if(!fit.valid) {
		fit.lambda_q = std::numeric_limits<double>::quiet_NaN();
	}
	return fit;
}

struct Envelope
{
	double value = 1.0;
	bool valid = true; // 2 * action <= pi/2
};

/// O_t <= cos(2 int_0^t sqrt(I_F)) / 4 + 3/4 for a single-qubit subsystem.
inline Envelope cosine_envelope(const TimeSeries& qfi, double t)
{
	const double action = qsl_action(qfi, t);
	return {0.25 * std::cos(2.0 * action) + 0.75, 2.0 * action <= std::numbers::pi / 2.0};
}

/// (int_0^t sqrt(I_F))^2 / (2t), i.e. 2 v_QSL^2 / t with v_QSL = action / 2.
inline double lyapunov_lower_bound(const TimeSeries& qfi, double t)
{
	if(!(t > 0.0)) {
		throw std::invalid_argument("lyapunov_lower_bound: t must be positive");
	}
	const double action = qsl_action(qfi, t);
	return action * action / (2.0 * t);
}

struct GqcrbReport
{
	std::vector<double> slack;          // NaN at skipped points
	std::vector<std::size_t> violations; // slack < -tolerance
	std::vector<std::size_t> skipped;    // I_F ~ 0: the 0/0 case
	double tolerance = 1e-9;

	[[nodiscard]] bool ok() const noexcept { return violations.empty(); }
};

/// Per-point slack (Delta rho_A)^2 - dO/dt^2 / (4 I_F). The rate defaults to
/// central differences of `otoc`; pass `otoc_rate` when it is known exactly.
inline GqcrbReport check_gqcrb(const TimeSeries& variance, const TimeSeries& otoc, const TimeSeries& qfi,
                               const std::optional<TimeSeries>& otoc_rate = std::nullopt, double tolerance = 1e-9,
                               double qfi_floor = 1e-12)
{
	variance.validate();
	otoc.validate();
	qfi.validate();
	const TimeSeries rate = otoc_rate ? *otoc_rate : central_derivative(otoc);
	if(variance.size() != otoc.size() || qfi.size() != otoc.size() || rate.size() != otoc.size()) {
		throw std::invalid_argument("check_gqcrb: series are not aligned");
	}
	for(std::size_t k = 0; k < otoc.size(); ++k) {
		if(variance.times[k] != otoc.times[k] || qfi.times[k] != otoc.times[k] || rate.times[k] != otoc.times[k]) {
			throw std::invalid_argument("check_gqcrb: series are not aligned");
		}
	}
	GqcrbReport report;
	report.tolerance = tolerance;
	report.slack.assign(otoc.size(), std::numeric_limits<double>::quiet_NaN());
	for(std::size_t k = 0; k < otoc.size(); ++k) {
		const double f = qfi.values[k];
		if(f <= qfi_floor) {
			report.skipped.push_back(k);
			continue;
		}
		const double d = rate.values[k];
		report.slack[k] = variance.values[k] - d * d / (4.0 * f);
		if(report.slack[k] < -tolerance) {
			report.violations.push_back(k);
		}
	}
	return report;
}

} // namespace stopwatch
