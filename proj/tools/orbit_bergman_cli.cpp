// orbit-bergman: command-line front end to the experiment harness.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <orbit_bergman/harness.hpp>

using namespace orbit_bergman;

namespace {

struct Flags {
    std::string config_file;
    std::vector<std::string> sets;
    bool timings = false;
    // raw text of each flag, applied through RunConfig::set so files and flags share one parser
    std::vector<std::pair<std::string, std::string>> values;
};

void add_common(CLI::App* sub, Flags& f) {
    for (const char* key : {"preset", "s", "z", "budget-word", "budget-norm", "basis-n", "grid", "radii", "out",
                            "format", "seed", "level"}) {
        sub->add_option_function<std::string>(
            std::string("--") + key, [&f, key](const std::string& v) { f.values.emplace_back(key, v); });
    }
    sub->add_option("--config", f.config_file, "key = value file; flags given on the command line override it");
    sub->add_option("--set", f.sets, "extra parameter key=value (form, k, w, r, s0, m, s-grid, z-star, ...)");
    sub->add_flag("--timings", f.timings, "include wall-clock timings in JSON output (not byte-stable)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weighted Bergman spaces, Fuchsian groups and orbit zero sets"};
    app.require_subcommand(1);
    Flags flags;
    const std::vector<std::pair<const char*, const char*>> commands{
        {"orbit", "orbit sample of z under the preset group"},
        {"reduce", "reduce z to the standard fundamental domain"},
        {"forms", "q-expansion coefficients of E4, E6 or Delta"},
        {"eval", "evaluate E4, E6, Delta, j or eta at z"},
        {"petersson", "Petersson norm of the first cusp form of weight k"},
        {"dims", "dimensions of M_k and S_k"},
        {"poincare", "Poincare sums of the transported constant"},
        {"tracelike", "tracelike deviation on a row of sample points"},
        {"gram", "Gram matrix of translates of e_0"},
        {"vndim", "von Neumann dimension, formula and numeric check"},
        {"density", "Blaschke partial sums and their growth rate"},
        {"extremal", "extremal values over a certified orbit ball"},
        {"wandering", "wandering candidate on the Gamma(2) orbit"},
        {"verify", "run the acceptance suite"},
    };
    for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig config;
    try {
        if (!flags.config_file.empty()) config = RunConfig::from_file(flags.config_file);
        config.command = app.get_subcommands().front()->get_name();
        for (const auto& [k, v] : flags.values) config.set(k, v);
        for (const auto& kv : flags.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == ErrorKind::io ? 1 : 2;
    }

    const RunOutcome outcome = execute(config);
    if (outcome.exit_code != 0 && outcome.record.status == "error")
        std::fprintf(stderr, "error: %s\n", outcome.record.payload["error"]["message"].get<std::string>().c_str());
    for (const auto& w : outcome.record.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    try {
        const std::string format = config.format == "csv" && outcome.record.status != "error" ? "csv" : "json";
        EmitOptions opts;
        opts.with_timings = flags.timings;
        emit_results(outcome.record, config.out, format, opts);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return outcome.exit_code;
}
