// fracpme: solve / cascade / verify / kernels / convergence front end.

#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

#include "fracpme/errors.hpp"
#include "fracpme/stepper.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/opensslv.h>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#ifndef FRACPME_VERSION
#define FRACPME_VERSION "unknown"
#endif

using namespace fracpme;
using namespace fracpme::cli;

namespace {

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string output;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config, "INI run configuration")->check(CLI::ExistingFile);
    sub->add_option("--set", c.sets, "override a config field, e.g. --set time.N_t=128")
        ->type_name("SECTION.KEY=VALUE");
    sub->add_option("-o,--output", c.output, "output directory (relative to $FRACPME_OUTPUT_ROOT)");
}

Json versions() {
    return {{"fracpme", FRACPME_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION},
            {"openssl", OPENSSL_VERSION_TEXT},
            {"compiler", __VERSION__}};
}

Json seeds(const RunConfig& cfg) {
    return {{"initial.seed", cfg.initial.profile.seed},
            {"forcing.seed", cfg.forcing.profile.seed},
            {"pair_initial.seed", cfg.pair_initial.profile.seed},
            {"pair_forcing.seed", cfg.pair_forcing.profile.seed},
            {"verify.battery_seed", cfg.verify.battery_seed}};
}

Json failure(const std::string& kind, const std::string& message) {
    return {{"kind", kind}, {"message", message}};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Nonlocal-in-time porous-medium solver and verification harness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FRACPME_VERSION);

    Common common;
    std::string m_ladder, n_ladder, tol, threads;
    std::string checks, battery_seed, delta_list;
    std::string family, alpha, gamma, ladder, expected_order;
    bool dump_steps = false;
    KernelsArgs kargs;

    auto* solve = app.add_subcommand("solve", "run one problem and write the solution history");
    add_common(solve, common);
    solve->add_flag("--dump-steps", dump_steps, "also write one CSV per time step");

    auto* cascade = app.add_subcommand("cascade", "truncation cascade and limit certificate");
    add_common(cascade, common);
    cascade->add_option("--m-ladder", m_ladder, "upper clip levels, e.g. 1,2,4,8");
    cascade->add_option("--n-ladder", n_ladder, "lower clip levels, e.g. 1,2,4,8");
    cascade->add_option("--tol", tol, "limit tolerance relative to the data norm");
    cascade->add_option("--threads", threads, "worker threads (0 = hardware)");

    auto* verify = app.add_subcommand("verify", "contraction, entropy, weak-form and energy audits");
    add_common(verify, common);
    verify->add_option("--checks", checks,
                       "comma list of contraction,entropy_contraction,entropy,weak,energy");
    verify->add_option("--battery-seed", battery_seed, "0 = fixed battery, else random psi bumps");
    verify->add_option("--delta-list", delta_list, "kernel split points as fractions of T");

    auto* kernels = app.add_subcommand("kernels", "tabulate a kernel pair and audit it");
    add_common(kernels, common);
    kernels->add_option("--family", family, "fractional, tempered or ultraslow");
    kernels->add_option("--alpha", alpha, "order in (0,1)");
    kernels->add_option("--gamma", gamma, "tempering rate >= 0");
    kernels->add_flag("--sonine-check", kargs.sonine_check, "check k*l = 1 on a log grid");
    kernels->add_option("--sonine-tol", kargs.sonine_tol, "pass threshold for --sonine-check");
    kernels->add_option("--points", kargs.points, "number of log-spaced sample points");
    kernels->add_flag("--weights", kargs.weights, "write the convolution weights of the time grid");
    kernels->add_flag("--soe", kargs.soe, "write the sum-of-exponentials compression");

    auto* convergence = app.add_subcommand("convergence", "refinement ladder and fitted orders");
    add_common(convergence, common);
    convergence->add_option("--ladder", ladder, "NxxNt entries, e.g. 16x32,32x64,64x128");
    convergence->add_option("--expected-order", expected_order, "fail unless the fit is within order_tol");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    const CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    RunConfig cfg;
    try {
        KeyValues kv;
        if (!common.config.empty()) kv = KeyValues::from_file(common.config);
        const auto flag = [&](const std::string& key, const std::string& value) {
            if (!value.empty()) kv.set(key + "=" + value);
        };
        flag("cascade.m_ladder", m_ladder);
        flag("cascade.n_ladder", n_ladder);
        flag("cascade.tol", tol);
        flag("cascade.threads", threads);
        flag("verify.checks", checks);
        flag("verify.battery_seed", battery_seed);
        flag("verify.delta_list", delta_list);
        flag("kernel.family", family);
        flag("kernel.alpha", alpha);
        flag("kernel.gamma", gamma);
        flag("convergence.ladder", ladder);
        flag("convergence.expected_order", expected_order);
        if (dump_steps) kv.set("output.dump_steps=true");
        flag("output.dir", common.output);
        for (const auto& s : common.sets) kv.set(s);
        cfg = parse_config(kv, name);
    } catch (const Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    std::optional<OutputDir> out;
    try {
        out.emplace(cfg.output_dir);
    } catch (const Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    int code = kExitInternal;
    try {
        if (name == "solve") code = run_solve(cfg, *out);
        else if (name == "cascade") code = run_cascade(cfg, *out);
        else if (name == "verify") code = run_verify(cfg, *out);
        else if (name == "kernels") code = run_kernels(cfg, kargs, *out);
        else code = run_convergence(cfg, *out);
    } catch (const HypothesisViolation& e) {
        std::cerr << "hypothesis violation " << e.what() << "\n";
        Json report = failure("hypothesis", e.what());
        report["hypothesis"] = e.hypothesis();
        out->write_json("hypothesis.json", report);
        code = kExitHypothesis;
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        out->write_json("failure.json", failure("config", e.what()));
        code = kExitUsage;
    } catch (const StepFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        Json report = failure("step", e.what());
        report["step"] = e.step();
        out->write_json("failure.json", report);
        code = kExitNumerical;
    } catch (const AccuracyError& e) {
        std::cerr << "accuracy failure: " << e.what() << "\n";
        Json report = failure("accuracy", e.what());
        report["achieved"] = number(e.achieved());
        out->write_json("failure.json", report);
        code = kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        out->write_json("failure.json", failure("internal", e.what()));
        code = kExitInternal;
    }

    Json manifest{{"tool", "fracpme"},
                  {"subcommand", name},
                  {"arguments", std::vector<std::string>(argv + 1, argv + argc)},
                  {"exit_code", code},
                  {"config_sha256", sha256_hex(cfg.canonical)},
                  {"config", cfg.canonical},
                  {"seeds", seeds(cfg)},
                  {"versions", versions()}};
    out->write_manifest(std::move(manifest));
    std::cout << "outputs in " << out->path().string() << " (exit " << code << ")\n";
    return code;
}
