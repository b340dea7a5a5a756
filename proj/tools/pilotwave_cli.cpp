// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

// pilotwave: command-line front end.
//
//   pilotwave simulate <scenario.json>... [--out DIR] [--threads N] [--seed S]
//   pilotwave check [--full] [--threads N]
//   pilotwave list-models [--json]
//
// Exit codes: 0 pass, 1 monitor or check failure, 2 usage or validation error.

#include <pilotwave/experiments.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

namespace ex = pilotwave::experiments;

namespace {

int simulate(const std::vector<std::string>& files, const ex::RunOptions& opts) {
    std::vector<ex::Scenario> scenarios;
    for (const auto& f : files) {
        try {
            scenarios.push_back(ex::load_scenario(f));
            ex::validate_monitors(scenarios.back());
        } catch (const ex::ValidationError& e) {
            std::cerr << f << ": " << e.what() << "\n";
            return 2;
        }
    }
    int status = 0;
    for (const auto& s : scenarios) {
        ex::RunResult r;
        try {
            r = ex::run_scenario(s, opts);
        } catch (const ex::ValidationError& e) {
            std::cerr << s.name << ": " << e.what() << "\n";
            return 2;
        }
        std::cout << "scenario " << s.name << "\n";
        for (const auto& m : r.monitors) {
            std::printf("  %-26s %-4s measured %-12.6g %-2s %.3g\n", m.name.c_str(), m.passed ? "PASS" : "FAIL", m.measured,
                        m.comparison.c_str(), m.threshold);
        }
        nlohmann::json failures = {{"scenario", s.name}, {"failures", r.failures()}};
        std::cout << failures.dump() << "\n";
        status = std::max(status, r.exit_code);
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pilotwave: pilot-wave trajectories for identical particles"};
    app.require_subcommand(1);
    app.fallthrough();

    ex::RunOptions run;
    run.threads = std::max(1u, std::thread::hardware_concurrency());
    std::string out = "out";
    std::uint64_t seed = 0;
    auto* seed_opt = app.add_option("--seed", seed, "override the scenario sampling seed");
    app.add_option("--threads", run.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out", out, "artifact directory")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "run scenario files and their monitors");
    std::vector<std::string> files;
    sim->add_option("scenario", files, "scenario JSON files")->required();

    auto* check = app.add_subcommand("check", "run the invariant battery");
    bool full = false;
    double bias = 0.0;
    check->add_flag("--full", full, "full-size ensembles");
    check->add_option("--inject-bias", bias, "test hook: bias the phase-gradient term of particle 0")->group("");

    auto* list = app.add_subcommand("list-models", "list the wavefunction catalogue");
    bool json = false;
    list->add_flag("--json", json, "machine-readable listing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (*sim) {
            run.out_dir = out;
            if (*seed_opt) run.seed = seed;
            return simulate(files, run);
        }
        if (*check) {
            ex::CheckOptions co;
            co.full = full;
            co.threads = run.threads;
            co.perturbation.phase_gradient_bias = bias;
            const auto rep = ex::check_suite(ex::default_check_registry(), co);
            std::cout << ex::format_check_table(rep);
            return rep.passed() ? 0 : 1;
        }
        if (*list) {
            if (json) {
                std::cout << ex::models_json().dump(2) << "\n";
            } else {
                std::cout << ex::models_text();
            }
            return 0;
        }
    } catch (const pilotwave::ConfigurationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
