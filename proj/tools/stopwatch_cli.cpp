// Command-line front end: spectrum, quench, heatmap, otoc, clock, verify.

#include "stopwatch/harness.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

using namespace stopwatch;

namespace
{

struct Common
{
	std::string config;
	std::optional<std::uint64_t> seed;
	std::optional<int> workers;
	std::optional<std::string> out;
	double h = 1.0;
	bool quiet = false;

	[[nodiscard]] SweepConfig load() const
	{
		auto c = SweepConfig::load(config);
		if(seed) {
			c.seed = *seed;
		}
		if(workers) {
			c.worker_count = *workers;
		}
		if(out) {
			c.output_dir = *out;
		}
		c.validate();
		return c;
	}

	[[nodiscard]] std::filesystem::path out_dir(const SweepConfig& c) const
	{
		std::filesystem::path p = c.output_dir;
		std::filesystem::create_directories(p);
		return p;
	}
};

void add_common(CLI::App* sub, Common& c, bool with_h)
{
	sub->add_option("config", c.config, "sweep configuration (JSON)")->required()->check(CLI::ExistingFile);
	sub->add_option("--seed", c.seed, "override the config seed");
	sub->add_option("--workers", c.workers, "override worker_count")->check(CLI::PositiveNumber);
	sub->add_option("--out", c.out, "override output_dir");
	sub->add_flag("-q,--quiet", c.quiet, "no progress on stderr");
	if(with_h) {
		sub->add_option("--field", c.h, "transverse field h")->capture_default_str();
	}
}

int cmd_spectrum(const Common& o)
{
	const auto c = o.load();
	const auto spec = chain_spectrum(build_hamiltonian(c.chain(o.h)), c.n_sites);
	const auto gs = ground_state(spec);
	std::string s = "index,energy\n";
	for(Eigen::Index k = 0; k < spec.dim(); ++k) {
		s += std::to_string(k) + ',' + fmt17(spec.energies(k)) + '\n';
	}
	const auto path = o.out_dir(c) / "spectrum.csv";
	write_text(path, s);
	std::cout << "E0 = " << fmt17(spec.energies(0)) << "  gap = " << fmt17(gs.gap)
	          << (gs.degenerate ? "  (degenerate ground state)" : "") << "\nwrote " << path.string() << '\n';
	return 0;
}

int cmd_quench(const Common& o)
{
	const auto c = o.load();
	const auto p = run_point_guarded(c, o.h);
	const auto path = o.out_dir(c) / "point.json";
	write_text(path, point_json(p, c.t_grid).dump(1) + '\n');
	if(p.failed) {
		std::cerr << "point failed: " << p.error << '\n';
		return 1;
	}
	std::cout << "lambda_q = " << (p.fit.valid ? fmt17(p.fit.lambda_q) : std::string("n/a")) << "  violations = " << p.violations.size()
	          << "\nwrote " << path.string() << '\n';
	return 0;
}

SweepResult sweep(const SweepConfig& c, bool quiet)
{
	const auto start = std::chrono::steady_clock::now();
	std::size_t done = 0;
	auto progress = [&](const PointResult& p) {
		++done;
		if(!quiet) {
			const double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
			std::cerr << "[" << done << "/" << c.h_grid.size() << "] h = " << fmt17(p.h) << (p.failed ? " FAILED" : "") << "  "
			          << el << " s\n";
		}
	};
	return run_sweep(c, c.worker_count, progress);
}

int cmd_heatmap(const Common& o)
{
	const auto c = o.load();
	const auto res = sweep(c, o.quiet);
	const auto dir = o.out_dir(c);
	emit(res, dir);
	std::cout << "wrote " << dir.string() << "  (config " << hex64(c.hash()) << ", " << res.violations().size() << " violations)\n";
	return 0;
}

int cmd_otoc(const Common& o)
{
	const auto c = o.load();
	const auto spec = chain_spectrum(build_hamiltonian(c.chain(o.h)), c.n_sites);
	const auto gs = ground_state(spec);
	const auto v = otoc_series(spec, gs.state, c.otoc_a.op(), c.otoc_b.op(), c.t_grid);
	std::string s = "t,re,im\n";
	std::vector<double> re;
	for(std::size_t k = 0; k < v.size(); ++k) {
		s += fmt17(c.t_grid[k]) + ',' + fmt17(v[k].real()) + ',' + fmt17(v[k].imag()) + '\n';
		re.push_back(v[k].real());
	}
	const auto path = o.out_dir(c) / "otoc.csv";
	write_text(path, s);
	const auto fit = fit_lyapunov(TimeSeries(c.t_grid, re), c.fit);
	if(fit.valid) {
		std::cout << "lambda_q = " << fmt17(fit.lambda_q) << " on [" << fit.t_lo << ", " << fit.t_hi << "], r^2 = " << fit.r_squared << '\n';
	} else {
		std::cout << "no valid exponential window\n";
	}
	std::cout << "wrote " << path.string() << '\n';
	return 0;
}

int cmd_clock(const Common& o, bool h_given)
{
	const auto c = o.load();
	const auto& k = c.clock;
	const auto proto = ClockProtocol::standard(
	    {.n_sites = k.n_sites, .coupling = c.coupling, .transverse = h_given ? o.h : k.transverse, .longitudinal = c.longitudinal});
	const auto ham = build_hamiltonian(proto.chain);
	const auto spec = eigendecompose(ham);
	std::vector<double> times;
	const auto n = static_cast<std::size_t>(std::lround(k.t_end / k.dt)) + 1;
	for(std::size_t i = 0; i < n; ++i) {
		times.push_back(static_cast<double>(i) * k.dt);
	}
	const auto traj = clock_trajectory(spec, ham, proto, times);
	const auto coherence = real_part(traj.times, traj.coherence);
	const auto qfi = ancilla_qfi_series(traj);
	const auto id = clock_qfi_identity(coherence);
	const auto cos_id = clock_cosine_identity(qfi, coherence);
	json j = {
	    {"n_sites", k.n_sites},
	    {"h", proto.chain.transverse},
	    {"dt", k.dt},
	    {"qfi_identity_max_relative_deviation", num(id.max_relative_deviation)},
	    {"cosine_identity_max_deviation", num(cos_id.max_deviation)},
	    {"cosine_window_end", cos_id.window_end},
	    {"cosine_window_points", cos_id.window_points},
	    {"lambda_estimate", num(cos_id.lambda_estimate)},
	    {"lambda_from_action", num(cos_id.lambda_from_action)},
	    {"t", times},
	    {"coherence", num_array(coherence.values)},
	    {"ancilla_qfi", num_array(qfi.values)},
	};
	const auto path = o.out_dir(c) / "clock.json";
	write_text(path, j.dump(1) + '\n');
	std::cout << "QFI identity max rel. deviation = " << id.max_relative_deviation
	          << "\ncosine identity max deviation = " << cos_id.max_deviation << " (window end " << cos_id.window_end
	          << ")\nwrote " << path.string() << '\n';
	return 0;
}

int cmd_verify(const Common& o)
{
	const auto c = o.load();
	const auto res = sweep(c, o.quiet);
	std::map<std::string, std::size_t> counts;
	std::size_t failed = 0;
	std::size_t printed_envelope = 0;
	for(const auto& p : res.points) {
		failed += p.failed ? 1 : 0;
		printed_envelope += p.envelope_printed_exceedances;
		for(const auto& v : p.violations) {
			++counts[v.check];
		}
	}
	for(const char* check : {"gqcrb", "sandwich_lower", "sandwich_upper", "envelope", "lyapunov_bound"}) {
		std::cout << check << ": " << counts[check] << " violations\n";
	}
	std::cout << "printed-direction envelope exceedances (informational): " << printed_envelope << '\n';
	if(failed > 0) {
		std::cout << failed << " points failed\n";
	}
	const auto total = res.violations().size();
	std::cout << (total == 0 && failed == 0 ? "OK" : "VIOLATIONS FOUND") << '\n';
	return total == 0 && failed == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Scrambling and metrology sweeps for the mixed-field Ising chain"};
	app.require_subcommand(1);
	Common o;
	auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of H(h)");
	auto* quench_cmd = app.add_subcommand("quench", "one quench point: I_F, O_t, OTOC, fit, checks");
	auto* heatmap = app.add_subcommand("heatmap", "full (t, h) sweep with CSV and JSON output");
	auto* otoc = app.add_subcommand("otoc", "4-point OTOC series and exponent fit");
	auto* clock = app.add_subcommand("clock", "ancilla clock identities");
	auto* verify = app.add_subcommand("verify", "sweep and inequality checks; exit 1 on any violation");
	add_common(spectrum, o, true);
	add_common(quench_cmd, o, true);
	add_common(heatmap, o, false);
	add_common(otoc, o, true);
	add_common(clock, o, true);
	add_common(verify, o, false);
	CLI11_PARSE(app, argc, argv);

	try {
		if(spectrum->parsed()) {
			return cmd_spectrum(o);
		}
		if(quench_cmd->parsed()) {
			return cmd_quench(o);
		}
		if(heatmap->parsed()) {
			return cmd_heatmap(o);
		}
		if(otoc->parsed()) {
			return cmd_otoc(o);
		}
		if(clock->parsed()) {
			return cmd_clock(o, clock->count("--field") > 0);
		}
		return cmd_verify(o);
	} catch(const std::exception& e) {
		std::cerr << "error: " << e.what() << '\n';
		return 2;
	}
}
