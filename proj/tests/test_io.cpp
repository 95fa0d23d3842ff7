#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"

using namespace seglab;
using namespace testing_support;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_run_config(in);
}

int error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    ADD_FAILURE() << "no ConfigError for:\n" << text;
    return -1;
}

} // namespace

TEST(FieldDump, RoundTripIsBitwise) {
    const auto mask = build_disk_domain(1.0, 1.0 / 16, {0.3, -0.2});
    const auto f = ScalarField::sample(mask, [](Point p) { return std::sin(7 * p.x) * std::exp(p.y) / 3.0; });
    std::stringstream ss;
    write_field_dump(ss, f, mask);
    const auto back = read_field_dump(ss);
    ASSERT_TRUE(back.grid == mask.grid());
    for (std::size_t k = 0; k < f.size(); ++k) {
        EXPECT_EQ(back.field[k], f[k]);
        EXPECT_EQ(back.classes[k], mask.at(mask.grid().node(k).i, mask.grid().node(k).j));
    }
    std::stringstream again;
    write_field_dump(again, back.field, mask);
    EXPECT_EQ(again.str(), [&] { std::stringstream s; write_field_dump(s, f, mask); return s.str(); }());
}

TEST(FieldDump, HeaderAndRowOrder) {
    const auto mask = build_disk_domain(1.0, 0.5, {}, Sizing::Coarse);
    const ScalarField f(mask.grid());
    std::stringstream ss;
    write_field_dump(ss, f, mask);
    std::string line;
    std::getline(ss, line);
    EXPECT_EQ(line, "i,j,x,y,class,value");
    std::getline(ss, line);
    EXPECT_EQ(line, "0,0,-1,-1,boundary,0"); // the corner touches an interior diagonal neighbour
    std::getline(ss, line);
    EXPECT_EQ(line.substr(0, 4), "1,0,");
    int rows = 3;
    while (std::getline(ss, line)) ++rows;
    EXPECT_EQ(rows, 1 + mask.grid().nx() * mask.grid().ny());
    EXPECT_NE(ss.str().find(",interior,"), std::string::npos);
    EXPECT_NE(ss.str().find(",boundary,"), std::string::npos);
}

TEST(FieldDump, MalformedInputIsRejected) {
    auto reject = [](const std::string& s) {
        std::istringstream in(s);
        EXPECT_THROW(read_field_dump(in), InvalidArgument) << s;
    };
    reject("");
    reject("i,j,x,y,value\n");
    reject("i,j,x,y,class,value\n0,0,0,0,interior\n");
    reject("i,j,x,y,class,value\n0,0,0,0,inside,1\n");
    reject("i,j,x,y,class,value\n0,0,0,0,interior,abc\n");
    reject("i,j,x,y,class,value\n0,0,0,0,interior,1\n1,0,1,0,interior,1\n");
    std::string swapped = "i,j,x,y,class,value\n";
    for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
            const int ii = (j == 1 && i < 2) ? 1 - i : i;
            swapped += std::to_string(ii) + "," + std::to_string(j) + "," + std::to_string(ii) + "," + std::to_string(j) + ",exterior,0\n";
        }
    reject(swapped);
}

TEST(ConvergenceLog, HeaderAndRecords) {
    SystemState a, b;
    a.log = {{1.0, 0, 0, 0.5, 0}, {1.0, 1, 0, 1e-3, 4}};
    b.log = {{0.1, 1, 1, 2.5e-8, 7}};
    std::ostringstream os;
    write_convergence_log(os, {a, b});
    EXPECT_EQ(os.str(), "epsilon,outer_iter,component,residual,inner_iters\n"
                        "1,0,0,0.5,0\n"
                        "1,1,0,0.001,4\n"
                        "0.10000000000000001,1,1,2.4999999999999999e-08,7\n");
}

TEST(CsvBlock, Layout) {
    CsvBlock b("holder", {"k", "r", "osc"});
    b.param("alpha", 0.5).param("center", "0;0");
    b.row({"1", "0.5", "0.25"});
    EXPECT_EQ(b.str(), "# holder alpha=0.5 center=0;0\nk,r,osc\n1,0.5,0.25\n");
    EXPECT_THROW(b.row({"1"}), InvalidArgument);
}

TEST(FormatReal, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.02214076e23}) EXPECT_EQ(std::stod(format_real(v)), v);
}

TEST(Config, DefaultsFromEmptyFile) {
    const auto cfg = parse("# nothing\n\n");
    EXPECT_EQ(cfg.radius, 1.0);
    EXPECT_EQ(cfg.h, 1.0 / 64);
    EXPECT_EQ(cfg.populations(), 2);
    EXPECT_EQ(cfg.schedule, std::vector<double>{1.0});
    EXPECT_EQ(cfg.ell.lambda, 1.0);
    EXPECT_EQ(cfg.ell.Lambda, 2.0);
    EXPECT_TRUE(cfg.diagnostics.enabled.empty());
    EXPECT_EQ(cfg.output_dir, "seglab_out");
}

TEST(Config, EveryKeyIsRead) {
    const auto cfg = parse(R"(domain.radius = 2
domain.h = 0.125
domain.center = 0.5, -1
populations.d = 3
populations.amplitude = 4   # trailing comment
populations.holder_exponent = 0.5
ellipticity.lambda = 0.5
ellipticity.Lambda = 3
epsilon.schedule = 2, 0.5, 1e-2
solver.inner_tol = 1e-8
solver.outer_tol = 1e-5
solver.max_inner = 1000
solver.max_outer = 40
solver.max_newton = 12
solver.cfl_safety = 0.5
solver.damping = 0.8
solver.method = relaxation
solver.sweep = jacobi
diagnostics.enabled = overlap, acf
diagnostics.delta = 1e-4
diagnostics.limit_delta = 0.1
diagnostics.holder_kmax = 4
diagnostics.growth_radii = 2, 4
diagnostics.growth_points = 5
diagnostics.lipschitz_radius = 0.25
diagnostics.acf_radii = 8, 16
output.dir = somewhere/else
seed = 42
)");
    EXPECT_EQ(cfg.radius, 2.0);
    EXPECT_EQ(cfg.h, 0.125);
    EXPECT_EQ(cfg.center.x, 0.5);
    EXPECT_EQ(cfg.center.y, -1.0);
    ASSERT_EQ(cfg.segments.size(), 3u);
    EXPECT_EQ(cfg.segments[2].amplitude, 4.0);
    EXPECT_EQ(cfg.holder_exponent, 0.5);
    EXPECT_EQ(cfg.ell.lambda, 0.5);
    EXPECT_EQ(cfg.ell.Lambda, 3.0);
    EXPECT_EQ(cfg.schedule, (std::vector<double>{2, 0.5, 1e-2}));
    EXPECT_EQ(cfg.solver.inner_tol, 1e-8);
    EXPECT_EQ(cfg.solver.outer_tol, 1e-5);
    EXPECT_EQ(cfg.solver.max_inner, 1000);
    EXPECT_EQ(cfg.solver.max_outer, 40);
    EXPECT_EQ(cfg.solver.max_newton, 12);
    EXPECT_EQ(cfg.solver.cfl_safety, 0.5);
    EXPECT_EQ(cfg.solver.damping, 0.8);
    EXPECT_EQ(cfg.solver.method, InnerMethod::Relaxation);
    EXPECT_EQ(cfg.solver.sweep, OuterSweep::Jacobi);
    EXPECT_EQ(cfg.diagnostics.enabled, (std::set<Diagnostic>{Diagnostic::Overlap, Diagnostic::Acf}));
    EXPECT_EQ(cfg.diagnostics.delta, 1e-4);
    EXPECT_EQ(cfg.diagnostics.limit_delta, 0.1);
    EXPECT_EQ(cfg.diagnostics.holder_kmax, 4);
    EXPECT_EQ(cfg.diagnostics.growth_radii_h, (std::vector<double>{2, 4}));
    EXPECT_EQ(cfg.diagnostics.growth_points, 5);
    EXPECT_EQ(cfg.diagnostics.lipschitz_radius, 0.25);
    EXPECT_EQ(cfg.diagnostics.acf_radii_h, (std::vector<double>{8, 16}));
    EXPECT_EQ(cfg.output_dir, "somewhere/else");
    EXPECT_EQ(cfg.seed, 42u);
}

TEST(Config, AntipodalLayoutMatchesEvenHalves) {
    const auto a = parse("populations.layout = antipodal\npopulations.amplitude = 2\n");
    const auto e = even_arcs(2, 2.0);
    ASSERT_EQ(a.segments.size(), 2u);
    for (int i = 0; i < 2; ++i) {
        EXPECT_DOUBLE_EQ(a.segments[i].theta0, e[i].theta0);
        EXPECT_DOUBLE_EQ(a.segments[i].theta1, e[i].theta1);
    }
}

TEST(Config, ExplicitSegmentsAndPiSuffix) {
    const auto cfg = parse("populations.segments = 0:-0.25pi:0.25pi:1, 1:0.5pi:pi:2\n");
    ASSERT_EQ(cfg.segments.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.segments[0].theta0, -0.25 * pi);
    EXPECT_DOUBLE_EQ(cfg.segments[1].theta1, pi);
    EXPECT_EQ(cfg.segments[1].population, 1);
    EXPECT_EQ(cfg.segments[1].amplitude, 2.0);
    EXPECT_EQ(cfg.populations(), 2);
}

TEST(Config, AllAndNoneDiagnostics) {
    EXPECT_EQ(parse("diagnostics.enabled = all\n").diagnostics.enabled.size(), diagnostic_names().size());
    EXPECT_TRUE(parse("diagnostics.enabled = none\n").diagnostics.enabled.empty());
}

TEST(Config, ErrorsCarryLineNumbers) {
    EXPECT_EQ(error_line("domain.h = 0.1\nbogus.key = 1\n"), 2);
    EXPECT_EQ(error_line("seed = 1\n\nseed = 2\n"), 3);
    EXPECT_EQ(error_line("# c\ndomain.h = abc\n"), 2);
    EXPECT_EQ(error_line("domain.h 0.1\n"), 1);
    EXPECT_EQ(error_line("domain.h =\n"), 1);
    EXPECT_EQ(error_line("ellipticity.lambda = 3\nellipticity.Lambda = 1\n"), 2);
    EXPECT_EQ(error_line("x=1\n"), 1);
    EXPECT_EQ(error_line("\n\npopulations.segments = 0:0:1:1, 1:0.5:2:1\n"), 3);
    EXPECT_EQ(error_line("epsilon.schedule = 1, 0.1, 0.3\n"), 1);
    EXPECT_EQ(error_line("epsilon.schedule = 1, -1\n"), 1);
    EXPECT_EQ(error_line("solver.method = magic\n"), 1);
    EXPECT_EQ(error_line("solver.sweep = sideways\n"), 1);
    EXPECT_EQ(error_line("diagnostics.enabled = overlap, nope\n"), 1);
    EXPECT_EQ(error_line("populations.d = 3\npopulations.layout = antipodal\n"), 1);
    EXPECT_EQ(error_line("populations.d = 0\n"), 1);
    EXPECT_EQ(error_line("domain.radius = 1\ndomain.h = 0.3\n"), 2);
    EXPECT_EQ(error_line("solver.inner_tol = 0\n"), 1);
    EXPECT_EQ(error_line("populations.segments = 0:0:1\n"), 1);
    EXPECT_EQ(error_line("domain.center = 1\n"), 1);
    EXPECT_EQ(error_line("solver.max_outer = 2.5\n"), 1);
}

TEST(Config, MissingFileIsAConfigError) {
    EXPECT_THROW(load_run_config("/nonexistent/seglab.conf"), ConfigError);
}

TEST(Config, ShippedConfigsParse) {
    for (const char* name : {"minimal.conf", "sweep.conf"})
        EXPECT_NO_THROW(load_run_config(std::string(SEGLAB_CONFIG_DIR) + "/" + name)) << name;
}
