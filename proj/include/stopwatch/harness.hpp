#pragma once

// Sweep configuration, per-point computation over the (t, h) grid, the
// threaded sweep with a keyed merge, and CSV / JSON emitters.

#include "clock.hpp"
#include "scrambling.hpp"

#include <json.hpp>

#include <atomic>
#include <bit>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace stopwatch
{

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Shortest text of `v` with 17 significant digits.
inline std::string fmt17(double v)
{
	char buf[64];
	const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
	return {buf, res.ptr};
}

inline double parse_double(std::string_view s)
{
	double v = 0.0;
	const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
	if(res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
		throw std::invalid_argument("not a number: '" + std::string(s) + "'");
	}
	return v;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(std::string_view s)
{
	std::uint64_t h = 0xcbf29ce484222325ULL;
	for(unsigned char c : s) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	return h;
}

inline std::string hex64(std::uint64_t v)
{
	std::ostringstream os;
	os << std::hex;
	os.width(16);
	os.fill('0');
	os << v;
	return os.str();
}

/// Grid from {"start", "stop", "step"} or an explicit array. Values are
/// rounded to 12 decimals so that h and -h grids are exact mirrors.
inline std::vector<double> parse_grid(const json& j, const std::string& name)
{
	std::vector<double> out;
	if(j.is_array()) {
		out = j.get<std::vector<double>>();
	} else if(j.is_object()) {
		const double start = j.at("start").get<double>();
		const double stop = j.at("stop").get<double>();
		const double step = j.at("step").get<double>();
		if(!(step > 0.0) || stop < start) {
			throw std::invalid_argument(name + ": need step > 0 and stop >= start");
		}
		const auto count = static_cast<long>(std::lround((stop - start) / step)) + 1;
		for(long k = 0; k < count; ++k) {
			out.push_back(std::round((start + static_cast<double>(k) * step) * 1e12) / 1e12);
		}
	} else {
		throw std::invalid_argument(name + ": expected an array or {start, stop, step}");
	}
	return out;
}

struct OperatorSpec
{
	Axis axis = Axis::x;
	int site = 0;

	[[nodiscard]] LocalOperator op() const { return pauli(axis, site); }

	[[nodiscard]] json to_json() const
	{
		const char* names[] = {"x", "y", "z"};
		return {{"axis", names[static_cast<int>(axis)]}, {"site", site}};
	}

	static OperatorSpec from_json(const json& j)
	{
		return {parse_axis(j.at("axis").get<std::string>()), j.at("site").get<int>()};
	}
};

/// Settings for the ancilla-clock report.
struct ClockSettings
{
	int n_sites = 6;
	double transverse = 1.05;
	double dt = 1e-3;
	double t_end = 1.5;
};

struct SweepConfig
{
	int n_sites = 11;
	double coupling = 1.0;
	double longitudinal = 0.4;
	std::vector<double> h_grid;
	std::vector<double> t_grid;
	std::vector<int> subsystem{0};
	OperatorSpec quench_op{Axis::x, 0};
	OperatorSpec otoc_a{Axis::x, 0};
	OperatorSpec otoc_b{Axis::z, 1};
	FitPolicy fit;
	std::uint64_t seed = 0;
	int worker_count = 1;
	std::string output_dir = "out";
	ClockSettings clock;

	void validate() const
	{
		ChainParams{.n_sites = n_sites, .coupling = coupling, .transverse = 0.0, .longitudinal = longitudinal}.validate();
		auto increasing = [](const std::vector<double>& g, const char* name) {
			if(g.empty()) {
				throw std::invalid_argument(std::string(name) + " is empty");
			}
			for(std::size_t k = 0; k < g.size(); ++k) {
				if(!std::isfinite(g[k]) || (k > 0 && !(g[k] > g[k - 1]))) {
					throw std::invalid_argument(std::string(name) + " must be finite and strictly increasing");
				}
			}
		};
		increasing(h_grid, "h_grid");
		increasing(t_grid, "t_grid");
		if(t_grid.front() != 0.0) {
			throw std::invalid_argument("t_grid must start at 0");
		}
		if(subsystem.empty() || static_cast<int>(subsystem.size()) >= n_sites) {
			throw std::invalid_argument("subsystem must be a non-empty proper subset of the sites");
		}
		Bipartition(subsystem, n_sites);
		for(const auto* o : {&quench_op, &otoc_a, &otoc_b}) {
			detail::check_support(o->op(), n_sites);
		}
		if(otoc_a.site == otoc_b.site) {
			throw std::invalid_argument("otoc_ops: A and B must act on different sites");
		}
		if(worker_count < 1) {
			throw std::invalid_argument("worker_count must be >= 1");
		}
		if(clock.n_sites < 2 || clock.n_sites > kDefaultMaxSites || !(clock.dt > 0.0) || !(clock.t_end > clock.dt)) {
			throw std::invalid_argument("clock: need n_sites >= 2, dt > 0 and t_end > dt");
		}
	}

	/// Everything that determines the numbers; worker_count and output_dir
	/// are excluded.
	[[nodiscard]] json to_json() const
	{
		return {
		    {"n_sites", n_sites},
		    {"coupling", coupling},
		    {"longitudinal", longitudinal},
		    {"h_grid", h_grid},
		    {"t_grid", t_grid},
		    {"subsystem", subsystem},
		    {"quench_op", quench_op.to_json()},
		    {"otoc_ops", {{"a", otoc_a.to_json()}, {"b", otoc_b.to_json()}}},
		    {"fit_policy",
		     {{"fit_lo", fit.fit_lo}, {"fit_hi", fit.fit_hi}, {"min_points", fit.min_points}, {"min_r_squared", fit.min_r_squared}}},
		    {"seed", seed},
		    {"clock", {{"n_sites", clock.n_sites}, {"transverse", clock.transverse}, {"dt", clock.dt}, {"t_end", clock.t_end}}},
		};
	}

	[[nodiscard]] std::string canonical() const { return to_json().dump(); }
	[[nodiscard]] std::uint64_t hash() const { return fnv1a64(canonical()); }

	static SweepConfig from_json(const json& j)
	{
		SweepConfig c;
		c.n_sites = j.value("n_sites", c.n_sites);
		c.coupling = j.value("coupling", c.coupling);
		c.longitudinal = j.value("longitudinal", c.longitudinal);
		c.h_grid = parse_grid(j.at("h_grid"), "h_grid");
		c.t_grid = parse_grid(j.at("t_grid"), "t_grid");
		c.subsystem = j.value("subsystem", c.subsystem);
		if(j.contains("quench_op")) {
			c.quench_op = OperatorSpec::from_json(j.at("quench_op"));
		}
		if(j.contains("otoc_ops")) {
			c.otoc_a = OperatorSpec::from_json(j.at("otoc_ops").at("a"));
			c.otoc_b = OperatorSpec::from_json(j.at("otoc_ops").at("b"));
		}
		if(j.contains("fit_policy")) {
			const auto& f = j.at("fit_policy");
			c.fit.fit_lo = f.value("fit_lo", c.fit.fit_lo);
			c.fit.fit_hi = f.value("fit_hi", c.fit.fit_hi);
			c.fit.min_points = f.value("min_points", c.fit.min_points);
			c.fit.min_r_squared = f.value("min_r_squared", c.fit.min_r_squared);
		}
		c.seed = j.value("seed", c.seed);
		c.worker_count = j.value("worker_count", c.worker_count);
		c.output_dir = j.value("output_dir", c.output_dir);
		if(j.contains("clock")) {
			const auto& k = j.at("clock");
			c.clock.n_sites = k.value("n_sites", c.clock.n_sites);
			c.clock.transverse = k.value("transverse", c.clock.transverse);
			c.clock.dt = k.value("dt", c.clock.dt);
			c.clock.t_end = k.value("t_end", c.clock.t_end);
		}
		c.validate();
		return c;
	}

	static SweepConfig load(const std::filesystem::path& path)
	{
		std::ifstream in(path);
		if(!in) {
			throw std::runtime_error("cannot read config " + path.string());
		}
		return from_json(json::parse(in));
	}

	[[nodiscard]] ChainParams chain(double h) const
	{
		return {.n_sites = n_sites, .coupling = coupling, .transverse = h, .longitudinal = longitudinal};
	}
};

/// Seed for the point at field h: derived from the global seed and the bit
/// pattern of h, so it does not depend on grid position or scheduling.
inline std::uint64_t point_seed(std::uint64_t seed, double h)
{
	return derive_seed(seed, std::bit_cast<std::uint64_t>(h == 0.0 ? 0.0 : h));
}

/// Spectrum of H(h), solved sector by sector under the chain reflection.
inline RealSpectrum chain_spectrum(const Hermitian<double>& h, int n_sites)
{
	const auto perm = reflection_permutation(n_sites);
	return eigendecompose(h, perm);
}

struct Violation
{
	double h = 0.0;
	std::string check;
	double t = 0.0;
	double slack = 0.0; // negative: by how much the inequality fails

	[[nodiscard]] json to_json() const { return {{"h", h}, {"check", check}, {"t", t}, {"slack", slack}}; }
};

struct PointResult
{
	double h = 0.0;
	std::uint64_t seed = 0;
	bool failed = false;
	std::string error;
	bool degenerate = false;
	double gap = 0.0;

	std::vector<double> qfi;
	std::vector<double> purity;
	std::vector<double> variance;
	std::vector<double> purity_rate;
	std::vector<double> sandwich_lower;
	std::vector<double> sandwich_upper; // +inf stored where rho_A is singular
	std::vector<double> p_min;
	std::vector<double> ma2;
	std::vector<double> bound;
	std::vector<double> otoc_re;
	std::vector<double> otoc_im;
	LyapunovFit fit;
	double bound_at_fit_midpoint = std::numeric_limits<double>::quiet_NaN();

	std::vector<Violation> violations;
	// diagnostics that are reported but not counted as violations
	std::size_t gqcrb_skipped = 0;
	std::size_t gqcrb_fd_violations = 0;      // same check with central-difference rate
	std::size_t envelope_checked = 0;
	std::size_t envelope_printed_exceedances = 0; // O_t above cos(2A)/4 + 3/4
	double envelope_printed_max_excess = 0.0;
	std::size_t sandwich_checked = 0;
};

struct PointOptions
{
	double sandwich_pmin = 1e-6;
	double tolerance = 1e-9;
};

/// I_F(t), O_t and friends for one field value, plus every inequality check.
inline PointResult run_point(const SweepConfig& cfg, double h, PointOptions opt = {})
{
	PointResult r;
	r.h = h;
	r.seed = point_seed(cfg.seed, h);
	const auto& t = cfg.t_grid;
	const auto nt = t.size();

	const auto ham = build_hamiltonian(cfg.chain(h));
	const auto spec = chain_spectrum(ham, cfg.n_sites);
	const auto gs = ground_state(spec);
	r.degenerate = gs.degenerate;
	r.gap = gs.gap;
	const PureState psi0 = quench(gs.state, cfg.quench_op.op());
	const Bipartition part(cfg.subsystem, cfg.n_sites);

	// psi(t) and -iH psi(t) for every t: two products with the eigenvectors
	const CVector c0 = spec.to_eigenbasis(psi0.amplitudes()).col(0);
	CMatrix z(spec.dim(), static_cast<Eigen::Index>(nt));
	for(std::size_t k = 0; k < nt; ++k) {
		z.col(static_cast<Eigen::Index>(k)) = phases(spec.energies, t[k]).cwiseProduct(c0);
	}
	const CMatrix states = spec.from_eigenbasis(z);
	const CVector minus_i_e = spec.energies.cast<cplx>() * cplx{0.0, -1.0};
	const CMatrix actions = spec.from_eigenbasis(minus_i_e.asDiagonal() * z);

	for(auto* v : {&r.qfi, &r.purity, &r.variance, &r.purity_rate, &r.sandwich_lower, &r.sandwich_upper, &r.p_min, &r.ma2,
	               &r.bound}) {
		v->resize(nt);
	}
	for(std::size_t k = 0; k < nt; ++k) {
		const auto col = static_cast<Eigen::Index>(k);
		const CVector psi = states.col(col);
		const auto rho = partial_trace(psi, part);
		const auto m = reduced_generator_from_action(psi, actions.col(col), part);
		r.qfi[k] = qfi_spectral(rho, m).value;
		r.purity[k] = purity(rho);
		r.variance[k] = variance_rho(rho);
		r.purity_rate[k] = purity_rate(rho, m);
		const auto sb = sandwich_bounds(rho, m);
		r.sandwich_lower[k] = sb.lower;
		r.sandwich_upper[k] = sb.upper;
		r.p_min[k] = rho.eigenvalues().minCoeff();
		r.ma2[k] = intensive_ma2(m, cfg.n_sites);
	}
	const TimeSeries qfi(t, r.qfi);
	const TimeSeries otoc_avg(t, r.purity);
	for(std::size_t k = 0; k < nt; ++k) {
		// the t -> 0 limit of action^2 / 2t is 0 for bounded I_F
		r.bound[k] = t[k] > 0.0 ? lyapunov_lower_bound(qfi, t[k]) : 0.0;
	}

	const auto otoc = otoc_series(spec, gs.state, cfg.otoc_a.op(), cfg.otoc_b.op(), t);
	r.otoc_re.resize(nt);
	r.otoc_im.resize(nt);
	for(std::size_t k = 0; k < nt; ++k) {
		r.otoc_re[k] = otoc[k].real();
		r.otoc_im[k] = otoc[k].imag();
	}
	if(!r.degenerate) {
		r.fit = fit_lyapunov(TimeSeries(t, r.otoc_re), cfg.fit);
	}

	auto flag = [&](const char* check, double tk, double slack) { r.violations.push_back({h, check, tk, slack}); };

	// generalized Cramer-Rao bound with the exact purity rate
	const auto gq = check_gqcrb(TimeSeries(t, r.variance), otoc_avg, qfi, TimeSeries(t, r.purity_rate), opt.tolerance);
	for(auto k : gq.violations) {
		flag("gqcrb", t[k], gq.slack[k]);
	}
	r.gqcrb_skipped = gq.skipped.size();
	r.gqcrb_fd_violations = check_gqcrb(TimeSeries(t, r.variance), otoc_avg, qfi, std::nullopt, opt.tolerance).violations.size();

	// sandwich bounds where rho_A is safely full rank
	for(std::size_t k = 0; k < nt; ++k) {
		if(r.p_min[k] <= opt.sandwich_pmin) {
			continue;
		}
		++r.sandwich_checked;
		const double lo = r.sandwich_lower[k] - r.qfi[k];
		const double hi = r.qfi[k] - r.sandwich_upper[k];
		if(lo > opt.tolerance * std::max(1.0, r.qfi[k])) {
			flag("sandwich_lower", t[k], -lo);
		}
		if(hi > opt.tolerance * std::max(1.0, r.qfi[k])) {
			flag("sandwich_upper", t[k], -hi);
		}
	}

	// cosine envelope for a single-qubit subsystem: the derived direction
	// O_t >= cos(theta_0 + 2A)/4 + 3/4 is counted, the printed direction
	// O_t <= cos(2A)/4 + 3/4 is only tallied
	if(part.dim_a() == 2) {
		const double theta0 = std::acos(std::clamp(4.0 * r.purity.front() - 3.0, -1.0, 1.0));
		const auto action = cumulative_action(qfi);
		for(std::size_t k = 0; k < nt; ++k) {
			if(2.0 * action[k] <= std::numbers::pi / 2.0) {
				++r.envelope_checked;
				const double printed = 0.25 * std::cos(2.0 * action[k]) + 0.75;
				const double excess = r.purity[k] - printed;
				if(excess > opt.tolerance) {
					++r.envelope_printed_exceedances;
				}
				r.envelope_printed_max_excess = std::max(r.envelope_printed_max_excess, excess);
			}
			const double theta = theta0 + 2.0 * action[k];
			if(theta <= std::numbers::pi) {
				const double derived = 0.25 * std::cos(theta) + 0.75;
				if(r.purity[k] < derived - opt.tolerance) {
					flag("envelope", t[k], r.purity[k] - derived);
				}
			}
		}
	}

	// small-t bound against the fitted exponent at the fit window midpoint
	if(r.fit.valid) {
		const double mid = r.fit.midpoint();
		r.bound_at_fit_midpoint = mid > 0.0 ? lyapunov_lower_bound(qfi, mid) : 0.0;
		if(r.bound_at_fit_midpoint > r.fit.lambda_q + opt.tolerance) {
			flag("lyapunov_bound", mid, r.fit.lambda_q - r.bound_at_fit_midpoint);
		}
	}
	return r;
}

struct SweepResult
{
	SweepConfig config;
	std::vector<PointResult> points; // in h_grid order

	[[nodiscard]] const std::vector<double>& times() const { return config.t_grid; }
	[[nodiscard]] const std::vector<double>& fields() const { return config.h_grid; }

	/// Column j holds the series `member` of point j; failed points give NaN.
	[[nodiscard]] RMatrix heatmap(std::vector<double> PointResult::*member) const
	{
		const auto nt = static_cast<Eigen::Index>(times().size());
		RMatrix m(nt, static_cast<Eigen::Index>(points.size()));
		m.setConstant(std::numeric_limits<double>::quiet_NaN());
		for(std::size_t j = 0; j < points.size(); ++j) {
			const auto& v = points[j].*member;
			if(points[j].failed) {
				continue;
			}
			for(Eigen::Index k = 0; k < nt; ++k) {
				m(k, static_cast<Eigen::Index>(j)) = v[static_cast<std::size_t>(k)];
			}
		}
		return m;
	}

	[[nodiscard]] std::vector<Violation> violations() const
	{
		std::vector<Violation> out;
		for(const auto& p : points) {
			out.insert(out.end(), p.violations.begin(), p.violations.end());
		}
		return out;
	}
};

inline PointResult run_point_guarded(const SweepConfig& cfg, double h, PointOptions opt = {})
{
	try {
		return run_point(cfg, h, opt);
	} catch(const std::exception& e) {
		PointResult r;
		r.h = h;
		r.seed = point_seed(cfg.seed, h);
		r.failed = true;
		r.error = e.what();
		return r;
	}
}

/// Every h point on `workers` threads; results are stored by grid index, so
/// the outcome does not depend on scheduling.
inline SweepResult run_sweep(const SweepConfig& cfg, int workers, const std::function<void(const PointResult&)>& on_point = {},
                             PointOptions opt = {})
{
	cfg.validate();
	SweepResult res;
	res.config = cfg;
	res.points.resize(cfg.h_grid.size());
	std::atomic<std::size_t> next{0};
	std::mutex report;
	auto work = [&] {
		for(std::size_t i = next++; i < cfg.h_grid.size(); i = next++) {
			res.points[i] = run_point_guarded(cfg, cfg.h_grid[i], opt);
			if(on_point) {
				const std::lock_guard lock(report);
				on_point(res.points[i]);
			}
		}
	};
	const auto n = static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(std::max<std::size_t>(1, cfg.h_grid.size()))));
	std::vector<std::thread> pool;
	for(std::size_t w = 1; w < n; ++w) {
		pool.emplace_back(work);
	}
	work();
	for(auto& th : pool) {
		th.join();
	}
	return res;
}

// ---------------------------------------------------------------------------
// Output

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if(!out) {
		throw std::runtime_error("cannot write " + path.string());
	}
	out << text;
	if(!out) {
		throw std::runtime_error("write failed: " + path.string());
	}
}

/// Rows are t, columns are h; the header row carries the h grid.
inline std::string heatmap_csv(const std::vector<double>& times, const std::vector<double>& fields, const RMatrix& m)
{
	std::string s = "t\\h";
	for(double h : fields) {
		s += ',' + fmt17(h);
	}
	s += '\n';
	for(std::size_t k = 0; k < times.size(); ++k) {
		s += fmt17(times[k]);
		for(std::size_t j = 0; j < fields.size(); ++j) {
			s += ',' + fmt17(m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)));
		}
		s += '\n';
	}
	return s;
}

struct Heatmap
{
	std::vector<double> times;
	std::vector<double> fields;
	RMatrix values;
};

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
	std::vector<std::string_view> out;
	std::size_t start = 0;
	for(std::size_t i = 0; i <= line.size(); ++i) {
		if(i == line.size() || line[i] == sep) {
			out.push_back(line.substr(start, i - start));
			start = i + 1;
		}
	}
	return out;
}

inline Heatmap parse_heatmap_csv(const std::string& text)
{
	Heatmap hm;
	std::vector<std::vector<double>> rows;
	std::istringstream in(text);
	std::string line;
	bool header = true;
	while(std::getline(in, line)) {
		const auto cells = split(line, ',');
		if(header) {
			for(std::size_t j = 1; j < cells.size(); ++j) {
				hm.fields.push_back(parse_double(cells[j]));
			}
			header = false;
			continue;
		}
		if(cells.size() != hm.fields.size() + 1) {
			throw std::invalid_argument("heatmap csv: ragged row");
		}
		hm.times.push_back(parse_double(cells[0]));
		std::vector<double> row;
		for(std::size_t j = 1; j < cells.size(); ++j) {
			row.push_back(cells[j] == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(cells[j]));
		}
		rows.push_back(std::move(row));
	}
	hm.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(hm.fields.size()));
	for(std::size_t k = 0; k < rows.size(); ++k) {
		for(std::size_t j = 0; j < rows[k].size(); ++j) {
			hm.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[k][j];
		}
	}
	return hm;
}

/// JSON number, or null for non-finite values.
inline json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json num_array(const std::vector<double>& v)
{
	json a = json::array();
	for(double x : v) {
		a.push_back(num(x));
	}
	return a;
}

inline json fit_json(const LyapunovFit& f)
{
	return {{"lambda_q", num(f.lambda_q)}, {"t_lo", f.t_lo},     {"t_hi", f.t_hi},
	        {"r_squared", f.r_squared},   {"points", f.points}, {"valid", f.valid}};
}

inline json point_json(const PointResult& p, const std::vector<double>& times)
{
	json j;
	j["h"] = p.h;
	j["seed"] = p.seed;
	j["failed"] = p.failed;
	if(p.failed) {
		j["error"] = p.error;
		return j;
	}
	j["degenerate_ground_state"] = p.degenerate;
	j["gap"] = p.gap;
	j["t"] = times;
	j["qfi"] = num_array(p.qfi);
	j["averaged_otoc"] = num_array(p.purity);
	j["variance_rho"] = num_array(p.variance);
	j["averaged_otoc_rate"] = num_array(p.purity_rate);
	j["sandwich_lower"] = num_array(p.sandwich_lower);
	j["sandwich_upper"] = num_array(p.sandwich_upper); // null where rho_A is singular
	j["p_min"] = num_array(p.p_min);
	j["ma2"] = num_array(p.ma2);
	j["lyapunov_bound"] = num_array(p.bound);
	j["otoc_re"] = num_array(p.otoc_re);
	j["otoc_im"] = num_array(p.otoc_im);
	j["fit"] = fit_json(p.fit);
	j["bound_at_fit_midpoint"] = num(p.bound_at_fit_midpoint);
	json v = json::array();
	for(const auto& x : p.violations) {
		v.push_back(x.to_json());
	}
	j["violations"] = v;
	j["diagnostics"] = {
	    {"gqcrb_skipped", p.gqcrb_skipped},
	    {"gqcrb_central_difference_violations", p.gqcrb_fd_violations},
	    {"envelope_checked", p.envelope_checked},
	    {"envelope_printed_exceedances", p.envelope_printed_exceedances},
	    {"envelope_printed_max_excess", p.envelope_printed_max_excess},
	    {"sandwich_checked", p.sandwich_checked},
	};
	return j;
}

/// Argmax over h of the mean of column j restricted to t in [t_lo, t_hi].
inline std::size_t argmax_mean(const RMatrix& m, const std::vector<double>& times, double t_lo, double t_hi)
{
	std::size_t best = 0;
	double best_v = -std::numeric_limits<double>::infinity();
	for(Eigen::Index j = 0; j < m.cols(); ++j) {
		double acc = 0.0;
		int n = 0;
		for(std::size_t k = 0; k < times.size(); ++k) {
			if(times[k] >= t_lo && times[k] <= t_hi) {
				acc += m(static_cast<Eigen::Index>(k), j);
				++n;
			}
		}
		const double mean = n > 0 ? acc / n : std::numeric_limits<double>::quiet_NaN();
		if(mean > best_v) {
			best_v = mean;
			best = static_cast<std::size_t>(j);
		}
	}
	return best;
}

inline json manifest_json(const SweepResult& res)
{
	json j;
	j["config"] = res.config.to_json();
	j["config_hash"] = hex64(res.config.hash());
	j["version"] = kVersion;
	j["seed"] = res.config.seed;
	json v = json::array();
	for(const auto& x : res.violations()) {
		v.push_back(x.to_json());
	}
	j["violations"] = v;
	json flags = json::array();
	for(const auto& p : res.points) {
		if(p.failed) {
			flags.push_back({{"h", p.h}, {"flag", "failed"}, {"error", p.error}});
		} else if(p.degenerate) {
			flags.push_back({{"h", p.h}, {"flag", "degenerate_ground_state"}});
		}
	}
	j["flags"] = flags;
	json lam = json::array();
	for(const auto& p : res.points) {
		lam.push_back({{"h", p.h}, {"lambda_q", num(p.fit.lambda_q)}, {"valid", p.fit.valid}});
	}
	j["lambda_curve"] = lam;
	return j;
}

inline std::string lambda_csv(const SweepResult& res)
{
	std::string s = "h,lambda_q,r_squared,t_lo,t_hi,points,valid\n";
	for(const auto& p : res.points) {
		s += fmt17(p.h) + ',' + fmt17(p.fit.lambda_q) + ',' + fmt17(p.fit.r_squared) + ',' + fmt17(p.fit.t_lo) + ','
		     + fmt17(p.fit.t_hi) + ',' + std::to_string(p.fit.points) + ',' + (p.fit.valid ? "1" : "0") + '\n';
	}
	return s;
}

/// Writes qfi.csv, averaged_otoc.csv, bound.csv, ma2.csv, lambda.csv,
/// manifest.json and points/point_<k>.json under `dir`.
inline void emit(const SweepResult& res, const std::filesystem::path& dir)
{
	std::filesystem::create_directories(dir / "points");
	const auto& t = res.times();
	const auto& h = res.fields();
	write_text(dir / "qfi.csv", heatmap_csv(t, h, res.heatmap(&PointResult::qfi)));
	write_text(dir / "averaged_otoc.csv", heatmap_csv(t, h, res.heatmap(&PointResult::purity)));
	write_text(dir / "bound.csv", heatmap_csv(t, h, res.heatmap(&PointResult::bound)));
	write_text(dir / "ma2.csv", heatmap_csv(t, h, res.heatmap(&PointResult::ma2)));
	write_text(dir / "lambda.csv", lambda_csv(res));
	write_text(dir / "manifest.json", manifest_json(res).dump(2) + '\n');
	for(std::size_t j = 0; j < res.points.size(); ++j) {
		char name[32];
		std::snprintf(name, sizeof(name), "point_%04zu.json", j);
		write_text(dir / "points" / name, point_json(res.points[j], t).dump(1) + '\n');
	}
}

} // namespace stopwatch
