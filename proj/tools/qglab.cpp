// qglab: command-line driver for the sectorial Borel-Laplace laboratory.
//
//   qglab validate <config>   check problem hypotheses + sector admissibility
//   qglab solve    <config>   build the solution family, dump coefficients
//   qglab asym     <config>   cocycle flatness, coefficient growth, remainder
//   qglab selftest            randomized transform/fit/classifier batteries
//
// Exit codes: 0 success, 1 contract failure, 2 usage/config error, 3 missing
// solve artifacts.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qg/pipeline.hpp"

namespace {

std::string default_out_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("QGLAB_OUT"); env && *env) return env;
    return "out";
}

void print_result(const qg::RunResult& res) {
    std::printf("%s\n", res.message.c_str());
    for (const std::string& f : res.files) std::printf("  wrote %s\n", f.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qglab: sectorial Borel-Laplace solution laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_flag, variant_flag, norm_flag;
    bool solve_inline = false, quick = false;
    std::optional<int> n_override;
    double gamma_scale = 1.0;

    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        if (needs_config)
            cmd->add_option("config", config_path, "lab configuration (JSON)")
                ->required();
        cmd->add_option("--out", out_flag,
                        "output directory (default: $QGLAB_OUT or ./out)");
    };

    CLI::App* c_validate = app.add_subcommand(
        "validate", "check problem hypotheses and sector admissibility");
    add_common(c_validate, true);

    CLI::App* c_solve = app.add_subcommand(
        "solve", "solve the coefficient families and assemble the sectors");
    add_common(c_solve, true);
    c_solve->add_option("--N", n_override, "override the truncation order");
    c_solve->add_option("--variant", variant_flag, "eps | t (default: config)")
        ->check(CLI::IsMember({"eps", "t"}));

    CLI::App* c_asym = app.add_subcommand(
        "asym", "measure cocycle flatness, growth class, and remainder bounds");
    add_common(c_asym, true);
    c_asym->add_option("--N", n_override, "override the truncation order");
    c_asym->add_option("--variant", variant_flag, "eps | t (default: config)")
        ->check(CLI::IsMember({"eps", "t"}));
    c_asym->add_option("--norm", norm_flag, "q-relative | sup (default: config)")
        ->check(CLI::IsMember({"q-relative", "sup"}));
    c_asym->add_flag("--solve-inline", solve_inline,
                     "build the solutions in-process instead of requiring solve "
                     "artifacts");

    CLI::App* c_selftest =
        app.add_subcommand("selftest", "run the randomized verification batteries");
    add_common(c_selftest, false);
    c_selftest->add_flag("--quick", quick, "reduced draw count (a few seconds)");
    c_selftest
        ->add_option("--gamma-scale", gamma_scale,
                     "scale the kernel normalization (test hook: != 1 must fail)")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : qg::exit_usage;
    }

    try {
        if (app.got_subcommand(c_selftest)) {
            qg::SelftestOptions so;
            so.quick = quick;
            so.gamma_scale = gamma_scale;
            if (!out_flag.empty() || std::getenv("QGLAB_OUT"))
                so.out_dir = default_out_dir(out_flag);
            std::string json_text;
            const qg::RunResult res = qg::run_selftest(so, &json_text);
            std::fputs(json_text.c_str(), stdout);
            print_result(res);
            return res.exit_code;
        }

        qg::PipelineOptions po;
        po.out_dir = default_out_dir(out_flag);
        po.solve_inline = solve_inline;
        if (variant_flag == "eps") po.variant = qg::Variant::eps_family;
        if (variant_flag == "t") po.variant = qg::Variant::t_family;
        if (norm_flag == "q-relative") po.norm_variant = qg::NormSpec::Variant::q_relative;
        if (norm_flag == "sup") po.norm_variant = qg::NormSpec::Variant::sup;
        po.N = n_override;

        const qg::LabConfig cfg = qg::load_config(config_path);
        qg::RunResult res;
        if (app.got_subcommand(c_validate))
            res = qg::run_validate(cfg, po);
        else if (app.got_subcommand(c_solve))
            res = qg::run_solve(cfg, po);
        else
            res = qg::run_asym(cfg, po);
        print_result(res);
        return res.exit_code;
    } catch (const qg::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return qg::exit_usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return qg::exit_usage;
    }
}
