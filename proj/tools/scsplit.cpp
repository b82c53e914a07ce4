#include "scsplit/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace
{

constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

std::string error_kind(const scsplit::Error& e)
{
	using namespace scsplit;
	if(dynamic_cast<const ParseError*>(&e))
	{
		return "ParseError";
	}
	if(dynamic_cast<const StabilityError*>(&e))
	{
		return "StabilityError";
	}
	if(dynamic_cast<const ConsistencyError*>(&e))
	{
		return "ConsistencyError";
	}
	if(dynamic_cast<const DomainError*>(&e))
	{
		return "DomainError";
	}
	if(dynamic_cast<const ValidationError*>(&e))
	{
		return "ValidationError";
	}
	if(dynamic_cast<const InstabilityError*>(&e))
	{
		return "InstabilityError";
	}
	if(dynamic_cast<const OverflowError*>(&e))
	{
		return "OverflowError";
	}
	if(dynamic_cast<const ControllerError*>(&e))
	{
		return "ControllerError";
	}
	if(dynamic_cast<const LogarithmError*>(&e))
	{
		return "LogarithmError";
	}
	return "NumericalError";
}

template <class F>
int guarded(F&& f)
{
	try
	{
		return f();
	}
	catch(const scsplit::ValidationError& e)
	{
		std::cerr << "scsplit: " << error_kind(e) << ": " << e.what() << "\n";
		return exit_validation;
	}
	catch(const scsplit::Error& e)
	{
		std::cerr << "scsplit: " << error_kind(e) << ": " << e.what() << "\n";
		return exit_numerical;
	}
	catch(const std::filesystem::filesystem_error& e)
	{
		std::cerr << "scsplit: " << e.what() << "\n";
		return exit_validation;
	}
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{"Splitting methods for linear parabolic and Schroedinger type problems"};
	app.require_subcommand(1);
	app.fallthrough();

	std::optional<std::string> out_dir;
	std::optional<unsigned> threads;
	bool allow_unstable = false;
	std::optional<std::uint64_t> seed;
	std::string scheme_dir = SCSPLIT_DATA_DIR;
	app.add_option("--out", out_dir, "output directory");
	app.add_option("--threads", threads, "worker threads for convergence studies")->check(CLI::Range(1u, 1024u));
	app.add_flag("--allow-unstable", allow_unstable, "run schemes with Re(a_j) < 0 on parabolic problems");
	app.add_option("--seed", seed, "seed for random test matrices");
	app.add_option("--scheme-dir", scheme_dir, "directory searched for *.scheme files");

	auto* list = app.add_subcommand("list-schemes", "print the scheme catalogue");
	auto* run = app.add_subcommand("run", "run an experiment config");
	std::string config_path;
	run->add_option("config", config_path, "config file")->required();
	auto* repro = app.add_subcommand("reproduce", "regenerate the data behind a figure");
	std::string figure;
	repro->add_option("figure", figure, "figure id")->required();
	auto* check = app.add_subcommand("check", "run the invariant smoke suite");

	CLI11_PARSE(app, argc, argv);

	if(*list)
	{
		return guarded([&] {
			scsplit::print_scheme_table(scsplit::list_schemes(std::filesystem::path(scheme_dir)), std::cout);
			return 0;
		});
	}
	if(*run)
	{
		return guarded([&] {
			const auto cfg = scsplit::ExperimentConfig::load(config_path);
			scsplit::RunContext ctx;
			if(out_dir)
			{
				ctx.out_dir = *out_dir;
			}
			ctx.threads = threads;
			ctx.allow_unstable = allow_unstable;
			ctx.seed = seed;
			ctx.log = &std::cout;
			// Everything is resolved before the first file is written.
			const auto prepared = scsplit::prepare_run(cfg, ctx);
			scsplit::execute_run(prepared, std::cout);
			return 0;
		});
	}
	if(*repro)
	{
		return guarded([&] {
			scsplit::reproduce(figure, out_dir.value_or("results/" + figure), threads.value_or(1), std::cout);
			return 0;
		});
	}
	if(*check)
	{
		return guarded([&] {
			bool ok = true;
			for(const auto& r : scsplit::run_checks(seed.value_or(1)))
			{
				std::cout << (r.passed ? "PASS " : "FAIL ") << r.name;
				if(!r.detail.empty())
				{
					std::cout << " (" << r.detail << ")";
				}
				std::cout << "\n";
				ok = ok && r.passed;
			}
			return ok ? 0 : 1;
		});
	}
	return 0;
}
