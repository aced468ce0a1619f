#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <sys/wait.h>

#include <orbit_bergman/harness.hpp>

using namespace orbit_bergman;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("ob_harness_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

RunConfig config(const std::string& command, std::initializer_list<std::pair<const char*, const char*>> kv = {}) {
    RunConfig c;
    c.command = command;
    for (const auto& [k, v] : kv) c.set(k, v);
    return c;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        else if (ch == ',' && !quoted) {
            out.push_back(cell);
            cell.clear();
        } else cell += ch;
    }
    out.push_back(cell);
    return out;
}

}  // namespace

TEST(Text, ComplexParsing) {
    EXPECT_EQ(parse_complex("2i"), Complex(0.0, 2.0));
    EXPECT_EQ(parse_complex("i"), Complex(0.0, 1.0));
    EXPECT_EQ(parse_complex("-i"), Complex(0.0, -1.0));
    EXPECT_EQ(parse_complex("-0.5+0.866i"), Complex(-0.5, 0.866));
    EXPECT_EQ(parse_complex("1e-3-2i"), Complex(1e-3, -2.0));
    EXPECT_EQ(parse_complex("0.25+1e+2i"), Complex(0.25, 100.0));
    EXPECT_EQ(parse_complex("3"), Complex(3.0, 0.0));
    EXPECT_THROW(parse_complex("2j"), ConfigError);
    EXPECT_THROW(parse_complex(""), ConfigError);
    const Complex z(0.1, -1.0 / 3.0);
    EXPECT_EQ(parse_complex(format_complex(z)), z);
}

TEST(Text, DoublesRoundTripWithSeventeenDigits) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> e(-300.0, 300.0);
    for (int k = 0; k < 2000; ++k) {
        const double x = std::pow(10.0, e(gen)) * (k % 2 ? -1.0 : 1.0);
        const std::string t = format_double(x);
        EXPECT_EQ(std::stod(t), x) << t;
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(2.0), "2.0");
    EXPECT_EQ(format_double(-1e300), "-1.0000000000000001e+300");
    EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Config, TextAndJsonRoundTrip) {
    RunConfig c = config("density", {{"preset", "pslz"}, {"s", "2.5"}, {"z", "0.1+2i"}, {"budget-norm", "80"},
                                     {"radii", "0.5,0.9,0.99"}, {"format", "csv"}, {"seed", "17"}, {"w", "2000"}});
    c.validate();
    const RunConfig from_text = RunConfig::from_text(c.to_text());
    EXPECT_EQ(from_text, c);
    EXPECT_EQ(from_text.radii, c.radii);
    EXPECT_EQ(*from_text.z, *c.z);
    const RunConfig from_json = RunConfig::from_json(Json::parse(c.to_json().dump()));
    EXPECT_EQ(from_json, c);
    EXPECT_EQ(from_json.param_double("w", 0.0), 2000.0);
}

TEST(Config, FileWithCommentsAndOverrides) {
    const auto path = scratch("run.cfg");
    std::ofstream(path) << "# a density run\ncommand = density\npreset = PSL2Z\n\nz = 2i   # base point\nbudget-norm=40\n";
    RunConfig c = RunConfig::from_file(path.string());
    EXPECT_EQ(c.command, "density");
    EXPECT_EQ(*c.budget_norm, 40);
    c.set("budget-norm", "60");
    EXPECT_EQ(*c.budget_norm, 60);
    EXPECT_NO_THROW(c.validate());
    EXPECT_THROW(RunConfig::from_text("command density\n"), ConfigError);
    EXPECT_THROW(RunConfig::from_file((path.parent_path() / "missing.cfg").string()), Error);
}

TEST(Config, Validation) {
    EXPECT_THROW(config("vndim", {{"s", "0.5"}}).validate(), ConfigError);
    EXPECT_THROW(config("vndim", {{"s", "1"}}).validate(), ConfigError);
    EXPECT_THROW(config("orbit", {{"budget-norm", "-1"}}).validate(), ConfigError);
    EXPECT_THROW(config("orbit", {{"budget-word", "-2"}}).validate(), ConfigError);
    EXPECT_THROW(config("density", {{"radii", "0.9,0.5"}}).validate(), ConfigError);
    EXPECT_THROW(config("density", {{"radii", "0.5,1.0"}}).validate(), ConfigError);
    EXPECT_THROW(config("orbit", {{"format", "xml"}}).validate(), ConfigError);
    EXPECT_THROW(config("orbit", {{"z", "1-2i"}}).validate(), ConfigError);
    EXPECT_THROW(config("orbit", {{"preset", "Gamma3"}}).validate(), ConfigError);
    EXPECT_THROW(config("plot").validate(), ConfigError);
    EXPECT_THROW(config("orbit", {{"s", "abc"}}), ConfigError);
    EXPECT_NO_THROW(config("vndim", {{"s", "1.0000001"}}).validate());
}

TEST(Run, VnDimReportsOneSixth) {
    const auto r = run_experiment(config("vndim", {{"preset", "pslz"}, {"s", "3"}}));
    EXPECT_NEAR(r.payload["formula"].get<double>(), 1.0 / 6.0, 1e-16);
    EXPECT_EQ(r.payload["critical_exponent"], "13/1");
    const double partial = r.payload["partial_sum"].get<double>();
    EXPECT_LT(partial, 1.0 / 6.0);
    EXPECT_LE(1.0 / 6.0 - partial, r.payload["cusp_bound"].get<double>() * 1.01);
    EXPECT_FALSE(r.warnings.empty());  // the cusp tail is reported
    EXPECT_EQ(r.config.preset, "pslz");
}

TEST(Run, DensitySlopeNearSix) {
    const auto r = run_experiment(config("density", {{"preset", "pslz"}, {"z", "2i"}}));
    EXPECT_NEAR(r.payload["target"].get<double>(), 6.0, 1e-12);
    EXPECT_LT(std::abs(r.payload["slope"].get<double>() - 6.0), 0.6);
    EXPECT_TRUE(r.payload["covered"].get<bool>());
}

TEST(Run, InvalidWeightIsAValidationError) {
    const auto out = execute(config("vndim", {{"s", "0.5"}}));
    EXPECT_EQ(out.exit_code, 2);
    EXPECT_EQ(out.record.status, "error");
    EXPECT_EQ(out.record.payload["error"]["kind"], "validation");
    EXPECT_EQ(out.record.config.s, 0.5);  // the offending config is echoed
}

TEST(Run, ModuleErrorsAreStructured) {
    const auto cov = execute(config("density", {{"budget-norm", "10"}, {"radii", "0.5,0.999999"}}));
    EXPECT_EQ(cov.exit_code, 1);
    EXPECT_EQ(cov.record.payload["error"]["kind"], "coverage");
    const auto bnd = execute(config("eval", {{"z", "0.1+0.001i"}, {"form", "Delta"}}));
    EXPECT_EQ(bnd.exit_code, 1);
    EXPECT_EQ(bnd.record.payload["error"]["kind"], "truncation");
    const auto pre = execute(config("petersson", {{"k", "10"}}));
    EXPECT_EQ(pre.exit_code, 1);
    EXPECT_EQ(pre.record.payload["error"]["kind"], "precondition");
    const auto relaxed = execute(config("density", {{"budget-norm", "10"}, {"radii", "0.5,0.999999"}, {"strict", "0"}}));
    EXPECT_EQ(relaxed.exit_code, 0);
    EXPECT_FALSE(relaxed.record.warnings.empty());
}

TEST(Run, WarningsSurviveIntoEmittedRecord) {
    const auto r = run_experiment(config("poincare", {{"budget-norm", "8"}}));
    ASSERT_FALSE(r.payload["converged"].get<bool>());
    ASSERT_EQ(r.warnings.size(), 1u);
    const auto path = scratch("warn.json");
    emit_results(r, path.string(), "json");
    EXPECT_EQ(read_record(path.string()).warnings, r.warnings);
}

TEST(Emit, ByteIdenticalAndRoundTrip) {
    const RunConfig c = config("extremal", {{"budget-norm", "12"}, {"max-points", "60"}});
    const auto r1 = run_experiment(c), r2 = run_experiment(c);
    const auto p1 = scratch("a.json"), p2 = scratch("b.json");
    emit_results(r1, p1.string(), "json");
    emit_results(r2, p2.string(), "json");
    const std::string bytes = slurp(p1);
    EXPECT_FALSE(bytes.empty());
    EXPECT_EQ(bytes, slurp(p2));
    // timings differ between the runs but are not part of the default output
    EXPECT_EQ(bytes.find("timings"), std::string::npos);

    const ResultRecord back = read_record(p1.string());
    EXPECT_EQ(back.config, r1.config);
    EXPECT_EQ(back.version, r1.version);
    EXPECT_EQ(back.payload, r1.payload);
    const auto p3 = scratch("c.json");
    emit_results(back, p3.string(), "json");
    EXPECT_EQ(slurp(p3), bytes);

    EXPECT_THROW(emit_results(r1, "/nonexistent-dir/x.json", "json"), Error);
}

TEST(Emit, CsvAndJsonCarryEqualNumbers) {
    const auto r = run_experiment(config("density", {{"z", "i"}, {"budget-norm", "60"}}));
    const auto pj = scratch("d.json"), pc = scratch("d.csv");
    emit_results(r, pj.string(), "json");
    emit_results(r, pc.string(), "csv");
    const auto rows = read_record(pj.string()).payload["table"]["rows"];
    std::ifstream in(pc);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "radius,log_inv_gap,partial_sum");
    std::size_t k = 0;
    while (std::getline(in, line)) {
        const auto cells = split_csv_line(line);
        ASSERT_LT(k, rows.size());
        ASSERT_EQ(cells.size(), rows[k].size());
        for (std::size_t j = 0; j < cells.size(); ++j) EXPECT_EQ(std::stod(cells[j]), rows[k][j].get<double>());
        ++k;
    }
    EXPECT_EQ(k, rows.size());
    // a payload without a table becomes key,value rows
    const auto v = run_experiment(config("vndim", {{"basis-n", "0"}}));
    EXPECT_EQ(render_csv(v).substr(0, 10), "key,value\n");
}

TEST(Run, EveryCommandProducesARecord) {
    const std::vector<RunConfig> runs{
        config("orbit", {{"budget-norm", "6"}}),
        config("reduce", {{"z", "0.3+0.01i"}}),
        config("forms", {{"form", "G2"}, {"basis-n", "10"}}),
        config("eval", {{"form", "j"}, {"z", "i"}}),
        config("petersson"),
        config("dims"),
        config("poincare", {{"budget-norm", "16"}}),
        config("tracelike", {{"budget-norm", "16"}, {"grid", "3"}}),
        config("gram", {{"basis-n", "8"}}),
        config("vndim", {{"preset", "gamma2"}, {"s", "2"}}),
        config("density", {{"budget-norm", "40"}}),
        config("extremal", {{"budget-norm", "10"}, {"max-points", "40"}}),
        config("wandering", {{"basis-n", "20"}, {"m", "5"}}),
    };
    for (const auto& c : runs) {
        const auto out = execute(c);
        EXPECT_EQ(out.exit_code, 0) << c.command << ": " << out.record.payload.dump();
        EXPECT_EQ(out.record.config, c);
        EXPECT_FALSE(out.record.payload.empty()) << c.command;
    }
    const auto e = run_experiment(config("eval", {{"form", "j"}, {"z", "i"}}));
    EXPECT_NEAR(e.payload["value"][0].get<double>(), 1728.0, 1e-6);
    const auto f = run_experiment(config("forms", {{"form", "Delta"}, {"basis-n", "3"}}));
    EXPECT_EQ(f.payload["table"]["rows"][2][1], "-24");
    const auto d = run_experiment(config("dims"));
    EXPECT_EQ(d.payload["table"]["rows"].back(), Json::array({12, 2, 1}));
    const auto g = run_experiment(config("vndim", {{"preset", "gamma2"}, {"s", "2"}}));
    EXPECT_EQ(g.payload["formula"].get<double>(), 0.5);
    EXPECT_EQ(g.payload["critical_exponent"], "3/1");
}

TEST(Suite, TamperedDeltaFailsA6) {
    const auto& entries = acceptance::entries();
    const auto a6 = std::find_if(entries.begin(), entries.end(), [](const auto& e) { return std::string(e.id) == "A6"; });
    ASSERT_NE(a6, entries.end());
    SuiteOptions o;
    EXPECT_TRUE(acceptance::run_one(*a6, o).passed);
    o.tamper_delta = true;
    const auto bad = acceptance::run_one(*a6, o);
    EXPECT_FALSE(bad.passed);
    EXPECT_FALSE(bad.measured["identity_to_50"].get<bool>());
}

TEST(Suite, RecordListsFailures) {
    std::vector<CriterionResult> rs{{"A1", "x", true, Json::object(), "", 1.0}, {"A2", "y", false, Json::object(), "", 2.0}};
    const auto rec = suite_record(rs, {});
    EXPECT_EQ(rec.payload["failed"], Json::array({"A2"}));
    EXPECT_EQ(rec.payload["passed"], 1);
    EXPECT_EQ(rec.timings.at("A2"), 2.0);
    EXPECT_EQ(render_json(rec.to_json()).find("timings"), std::string::npos);
    EXPECT_NE(render_json(rec.to_json(true)).find("timings"), std::string::npos);
}

#ifdef ORBIT_BERGMAN_CLI
namespace {

int run_cli(const std::string& args) {
    const int st = std::system((std::string(ORBIT_BERGMAN_CLI) + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

}  // namespace

TEST(Cli, ExitStatusAndOutput) {
    const auto out = scratch("cli.json");
    EXPECT_EQ(run_cli("vndim --preset pslz --s 3 --out " + out.string()), 0);
    const auto r = read_record(out.string());
    EXPECT_NEAR(r.payload["formula"].get<double>(), 1.0 / 6.0, 1e-16);
    EXPECT_EQ(r.config.command, "vndim");
    EXPECT_EQ(run_cli("vndim --s 0.5 --out " + out.string()), 2);
    EXPECT_EQ(read_record(out.string()).payload["error"]["kind"], "validation");
    EXPECT_EQ(run_cli("vndim --bogus-flag"), 2);
    EXPECT_EQ(run_cli("density --budget-norm 10 --radii 0.5,0.999999 --out " + out.string()), 1);

    const auto cfg = scratch("cli.cfg");
    std::ofstream(cfg) << "s = 5\nbasis-n = 0\n";
    EXPECT_EQ(run_cli("vndim --config " + cfg.string() + " --s 3 --out " + out.string()), 0);
    EXPECT_NEAR(read_record(out.string()).payload["formula"].get<double>(), 1.0 / 6.0, 1e-16);

    const auto csv = scratch("cli.csv");
    EXPECT_EQ(run_cli("dims --format csv --out " + csv.string()), 0);
    EXPECT_EQ(slurp(csv).substr(0, 21), "k,dim_modular,dim_cus");
}
#endif
