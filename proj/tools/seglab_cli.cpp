// seglab: batch driver for the segregation solver and its property suites.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "seglab/seglab.hpp"

namespace {

int dump_barrier(const std::string& kind, double a, double b, double alpha, double lambda, double Lambda, int n,
                 double h) {
    using namespace seglab;
    BarrierKind k;
    if (kind == "sub") k = BarrierKind::Sub;
    else if (kind == "super") k = BarrierKind::Super;
    else {
        std::cerr << "error: barrier kind must be sub or super\n";
        return exit_config;
    }
    try {
        BarrierSpec spec{1.0, 1.0, a, b, alpha, Ellipticity(lambda, Lambda), n};
        const auto profile = k == BarrierKind::Sub ? subsolution_barrier(spec, Admissibility::Unchecked)
                                                   : supersolution_barrier(spec, Admissibility::Unchecked);
        const auto rep = verify_barrier(profile, spec, h);
        std::cout << barrier_report_header() << '\n' << to_csv(rep) << '\n';
        return rep.pass ? exit_ok : exit_diagnostic;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
}

int verify(const seglab::VerifyOptions& opt, double lambda, double Lambda) {
    using namespace seglab;
    VerifyOptions o = opt;
    try {
        o.ell = Ellipticity(lambda, Lambda);
        const auto rep = verify_suite(o);
        rep.print(std::cout);
        return rep.all_pass() ? exit_ok : exit_diagnostic;
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"seglab: segregated competition systems with Pucci operators"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "solve the epsilon sweep of a config and write artifacts");
    run_cmd->add_option("config", config_path, "path to a key=value config file")->required();

    seglab::VerifyOptions vopt;
    double v_lambda = 1.0, v_Lambda = 2.0;
    auto* verify_cmd = app.add_subcommand("verify", "run the operator algebra and barrier property suites");
    verify_cmd->add_option("--seed", vopt.seed, "random seed");
    verify_cmd->add_option("--samples", vopt.samples, "random matrix samples");
    verify_cmd->add_option("--alpha-scale", vopt.alpha_scale, "multiplies every barrier preset exponent");
    verify_cmd->add_option("--lambda", v_lambda, "lower ellipticity bound of the barrier presets");
    verify_cmd->add_option("--Lambda", v_Lambda, "upper ellipticity bound of the barrier presets");
    verify_cmd->add_option("--spacing", vopt.barrier_h, "grid spacing of the barrier checks");

    std::string kind;
    double a = 1, b = 2, alpha = 1, lambda = 1, Lambda = 2, h = 1.0 / 128.0;
    int n = 2;
    auto* dump_cmd = app.add_subcommand("dump-barrier", "verify one barrier and print its report record");
    dump_cmd->add_option("kind", kind, "sub or super")->required();
    dump_cmd->add_option("a", a)->required();
    dump_cmd->add_option("b", b)->required();
    dump_cmd->add_option("alpha", alpha)->required();
    dump_cmd->add_option("lambda", lambda)->required();
    dump_cmd->add_option("Lambda", Lambda)->required();
    dump_cmd->add_option("n", n)->required();
    dump_cmd->add_option("--spacing", h, "grid spacing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : seglab::exit_config;
    }

    if (*run_cmd) {
        try {
            return seglab::run_file(config_path, std::cerr);
        } catch (const seglab::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return seglab::exit_config;
        }
    }
    if (*verify_cmd) return verify(vopt, v_lambda, v_Lambda);
    return dump_barrier(kind, a, b, alpha, lambda, Lambda, n, h);
}
