#include <gtest/gtest.h>

#include <cstdlib>

#include "support.hpp"

using namespace seglab;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

const std::string cli = SEGLAB_CLI_PATH;

std::string small_pair(const fs::path& out, const std::string& extra = "") {
    return "domain.h = 0.0625\npopulations.d = 2\nepsilon.schedule = 1, 0.1\noutput.dir = " + out.string() + "\n" + extra;
}

int run_text(const std::string& text, std::string* log_out = nullptr) {
    std::istringstream in(text);
    std::ostringstream log;
    const int code = run(parse_run_config(in), log);
    if (log_out) *log_out = log.str();
    return code;
}

/// Unsets the output override for the lifetime of a test.
struct EnvGuard {
    EnvGuard() { ::unsetenv(output_dir_env); }
    ~EnvGuard() { ::unsetenv(output_dir_env); }
};

} // namespace

TEST(Run, WritesFieldsLogAndSummary) {
    EnvGuard env;
    const auto out = scratch_dir("run_basic");
    ASSERT_EQ(run_text(small_pair(out)), exit_ok);
    for (const char* f : {"field_e00_u0.csv", "field_e00_u1.csv", "field_e01_u0.csv", "field_e01_u1.csv",
                          "convergence.csv", "summary.csv"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
    const auto log = slurp(out / "convergence.csv");
    EXPECT_EQ(log.substr(0, log.find('\n')), "epsilon,outer_iter,component,residual,inner_iters");
    const auto summary = slurp(out / "summary.csv");
    EXPECT_NE(summary.find("status=ok"), std::string::npos);
    EXPECT_NE(summary.find("file,kind,key,value,verdict"), std::string::npos);

    std::ifstream in(out / "field_e01_u0.csv");
    const auto dump = read_field_dump(in);
    const auto mask = build_disk_domain(1.0, 0.0625);
    EXPECT_TRUE(dump.grid == mask.grid());
    for (std::size_t k = 0; k < dump.field.size(); ++k) {
        const Node n = mask.grid().node(k);
        EXPECT_EQ(dump.classes[k], mask.at(n.i, n.j));
        EXPECT_GE(dump.field[k], 0.0);
    }
}

TEST(Run, OutputIsDeterministic) {
    EnvGuard env;
    const auto a = scratch_dir("run_det_a"), b = scratch_dir("run_det_b");
    const std::string extra = "diagnostics.enabled = overlap, subharmonic, limit\n";
    ASSERT_EQ(run_text(small_pair(a, extra)), exit_ok);
    std::string text = small_pair(b, extra);
    ASSERT_EQ(run_text(text), exit_ok);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
    }
    EXPECT_EQ(files, 9u);
}

TEST(Run, EnvironmentOverridesOutputDir) {
    EnvGuard env;
    const auto cfg_dir = scratch_dir("run_env_cfg");
    const auto over = scratch_dir("run_env_over");
    ::setenv(output_dir_env, over.c_str(), 1);
    ASSERT_EQ(run_text(small_pair(cfg_dir)), exit_ok);
    EXPECT_TRUE(fs::exists(over / "summary.csv"));
    EXPECT_FALSE(fs::exists(cfg_dir / "summary.csv"));
}

TEST(Run, ConfigErrorsWriteNothing) {
    EnvGuard env;
    const auto out = scratch_dir("run_cfg_err");
    const auto conf = out / "bad.conf";
    write_file(conf, "populations.segments = 0:0:1:1, 1:0.5:2:1\noutput.dir = " + (out / "res").string() + "\n");
    std::ostringstream log;
    EXPECT_EQ(run_file(conf.string(), log), exit_config);
    EXPECT_NE(log.str().find("line 1"), std::string::npos);
    EXPECT_FALSE(fs::exists(out / "res"));
    EXPECT_EQ(run_file((out / "missing.conf").string(), log), exit_config);
}

TEST(Run, UnwritableOutputIsAConfigError) {
    EnvGuard env;
    const auto out = scratch_dir("run_unwritable");
    write_file(out / "file", "x");
    EXPECT_EQ(run_text(small_pair(out / "file" / "sub")), exit_config);
}

TEST(Run, NonConvergenceStillWritesArtifacts) {
    EnvGuard env;
    const auto out = scratch_dir("run_unconverged");
    std::string log;
    EXPECT_EQ(run_text(small_pair(out, "solver.max_outer = 1\nsolver.outer_tol = 1e-14\ndiagnostics.enabled = all\n"), &log),
              exit_unconverged);
    EXPECT_TRUE(fs::exists(out / "field_e01_u1.csv"));
    EXPECT_TRUE(fs::exists(out / "convergence.csv"));
    EXPECT_NE(slurp(out / "summary.csv").find("status=not_converged"), std::string::npos);
    EXPECT_FALSE(fs::exists(out / "overlap.csv"));
    EXPECT_NE(log.find("not converged"), std::string::npos);
}

TEST(Run, DiagnosticWithoutHypothesesFails) {
    EnvGuard env;
    const auto out = scratch_dir("run_diag_fail");
    const std::string text = "domain.h = 0.0625\npopulations.d = 1\ndiagnostics.enabled = acf\noutput.dir = " + out.string() + "\n";
    EXPECT_EQ(run_text(text), exit_diagnostic);
    const auto acf = slurp(out / "acf.csv");
    EXPECT_NE(acf.find("error"), std::string::npos);
    EXPECT_NE(slurp(out / "summary.csv").find("status=diagnostic_failure"), std::string::npos);
}

TEST(Run, AllDiagnosticsOnTheSmallSweep) {
    EnvGuard env;
    const auto out = scratch_dir("run_all_diag");
    const std::string text = "domain.h = 0.03125\npopulations.d = 2\nepsilon.schedule = 1, 0.3, 0.1\n"
                             "diagnostics.enabled = all\noutput.dir = " + out.string() + "\n";
    std::string log;
    EXPECT_EQ(run_text(text, &log), exit_ok) << log;
    for (const char* f : {"overlap.csv", "mass.csv", "subharmonic.csv", "limit.csv", "holder.csv", "growth.csv",
                          "lipschitz.csv", "acf.csv"})
        EXPECT_TRUE(fs::exists(out / f)) << f;
}

TEST(Verify, DefaultSuitePassesAndControlIsPresent) {
    const auto rep = verify_suite();
    EXPECT_TRUE(rep.all_pass());
    EXPECT_EQ(rep.rows.size(), 7u + 8u + 1u);
    EXPECT_TRUE(rep.rows.back().control);
    EXPECT_GT(rep.rows.back().worst, rep.rows.back().tolerance);
    std::ostringstream os;
    rep.print(os);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "# verify rows=16 status=PASS");
}

TEST(Verify, SubFloorExponentsFail) {
    VerifyOptions opt;
    opt.alpha_scale = 0.5;
    const auto rep = verify_suite(opt);
    EXPECT_FALSE(rep.all_pass());
    int failing = 0;
    for (const auto& r : rep.rows) failing += !r.pass;
    EXPECT_GE(failing, 1);
    opt.alpha_scale = 0.0;
    EXPECT_THROW(verify_suite(opt), InvalidArgument);
}

TEST(Binary, ExitCodes) {
    const auto out = scratch_dir("bin_codes");
    const std::string quiet = " > " + (out / "stdout.txt").string() + " 2>&1";
    write_file(out / "ok.conf", small_pair(out / "ok"));
    write_file(out / "bad.conf", "domain.h = nope\n");
    write_file(out / "stuck.conf", small_pair(out / "stuck", "solver.max_outer = 1\nsolver.outer_tol = 1e-14\n"));
    write_file(out / "diag.conf", "domain.h = 0.0625\npopulations.d = 1\ndiagnostics.enabled = holder\noutput.dir = " +
                                      (out / "diag").string() + "\n");
    const std::string env = "env -u SEGLAB_OUTPUT_DIR ";
    EXPECT_EQ(shell(env + cli + " run " + (out / "ok.conf").string() + quiet), 0);
    EXPECT_EQ(shell(env + cli + " run " + (out / "bad.conf").string() + quiet), 2);
    EXPECT_EQ(shell(env + cli + " run " + (out / "stuck.conf").string() + quiet), 3);
    EXPECT_EQ(shell(env + cli + " run " + (out / "diag.conf").string() + quiet), 4);
    EXPECT_EQ(shell(cli + " verify" + quiet), 0);
    EXPECT_EQ(shell(cli + " verify --alpha-scale 0.5" + quiet), 4);
    EXPECT_EQ(shell(cli + " verify --lambda 3 --Lambda 1" + quiet), 2);
    EXPECT_EQ(shell(cli + quiet), 2);
    EXPECT_EQ(shell(cli + " frobnicate" + quiet), 2);
    EXPECT_EQ(shell(cli + " --help" + quiet), 0);
}

TEST(Binary, OutputDirFromEnvironment) {
    const auto out = scratch_dir("bin_env");
    write_file(out / "ok.conf", small_pair(out / "from_config"));
    EXPECT_EQ(shell("SEGLAB_OUTPUT_DIR=" + (out / "from_env").string() + " " + cli + " run " + (out / "ok.conf").string() +
                    " > /dev/null 2>&1"),
              0);
    EXPECT_TRUE(fs::exists(out / "from_env" / "summary.csv"));
    EXPECT_FALSE(fs::exists(out / "from_config"));
}

TEST(Binary, DumpBarrier) {
    const auto out = scratch_dir("bin_barrier");
    const auto file = out / "b.csv";
    EXPECT_EQ(shell(cli + " dump-barrier sub 1 2 1 1 2 2 > " + file.string()), 0);
    const auto text = slurp(file);
    EXPECT_EQ(text.substr(0, text.find('\n')), "kind,a,b,alpha,lambda,Lambda,n,h,worst_violation,pass");
    EXPECT_NE(text.find("\nsub,1,2,1,1,2,2,"), std::string::npos);
    EXPECT_NE(text.find(",PASS"), std::string::npos);
    EXPECT_EQ(shell(cli + " dump-barrier super 1 5 3 1 2 3 > /dev/null"), 0);
    EXPECT_EQ(shell(cli + " dump-barrier sub 1 2 2 1 2 3 > /dev/null"), 4);
    EXPECT_EQ(shell(cli + " dump-barrier sub 2 1 1 1 2 2 > /dev/null 2>&1"), 2);
    EXPECT_EQ(shell(cli + " dump-barrier diagonal 1 2 1 1 2 2 > /dev/null 2>&1"), 2);
    EXPECT_EQ(shell(cli + " dump-barrier sub 1 2 1 1 2 > /dev/null 2>&1"), 2);
}

TEST(Binary, ShippedConfigsRun) {
    const auto out = scratch_dir("bin_shipped");
    EXPECT_EQ(shell("SEGLAB_OUTPUT_DIR=" + out.string() + " " + cli + " run " + SEGLAB_CONFIG_DIR + "/minimal.conf > /dev/null"), 0);
    EXPECT_TRUE(fs::exists(out / "field_e00_u0.csv"));
}
