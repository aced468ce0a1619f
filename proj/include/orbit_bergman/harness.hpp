#pragma once

// Dispatch from a RunConfig to the module operations, producing result records.

#include <chrono>
#include <string>
#include <vector>

#include "acceptance.hpp"
#include "bergman.hpp"
#include "dimension.hpp"
#include "fuchsian.hpp"
#include "io.hpp"
#include "modular.hpp"
#include "poincare.hpp"
#include "zero_lab.hpp"

namespace orbit_bergman {

namespace harness {

inline Json table(std::vector<std::string> columns, Json rows) {
    Json t = Json::object();
    t["columns"] = std::move(columns);
    t["rows"] = std::move(rows);
    return t;
}

inline Json element_json(const GroupElement& g) { return Json::array({g.a(), g.b(), g.c(), g.d()}); }

inline Budget budget_of(const RunConfig& c, std::int64_t default_norm) {
    Budget b;
    b.max_word_len = static_cast<int>(c.budget_word.value_or(-1));
    b.max_entry = c.budget_norm.value_or(default_norm);
    return b;
}

inline Point point_of(const RunConfig& c, Complex fallback) { return Point::half_plane(c.z.value_or(fallback)); }

inline const QSeries& named_form(const std::string& name) {
    const auto canonical = canonical_form_name(name);
    if (!canonical) throw ConfigError("unknown form '" + name + "' (use E4, E6, Delta or G2, G3)");
    const auto& t = FormTable::get();
    if (*canonical == "E4") return t.e4;
    if (*canonical == "E6") return t.e6;
    return t.delta;
}

inline void orbit(const RunConfig& c, ResultRecord& r) {
    const GroupPreset p = preset_from_string(c.preset);
    const Budget b = budget_of(c, 20);
    const auto o = orbit_sample(p, point_of(c, Complex(0.0, 2.0)), b);
    const double rc = certified_radius(o);
    r.payload["preset"] = p.label();
    r.payload["base"] = json_complex(o.base.value());
    r.payload["stabilizer_order"] = o.stabilizer_order;
    r.payload["enumerated"] = o.enumerated;
    r.payload["points"] = o.entries.size();
    r.payload["certified_radius"] = rc;
    if (rc == 0.0) r.warn("coverage: the budget certifies no disc radius");
    Json rows = Json::array();
    for (const auto& e : o.entries) {
        const Complex w = to_disc(e.image).value();
        rows.push_back(Json::array({e.element.a(), e.element.b(), e.element.c(), e.element.d(), to_string(e.element.word()),
                                    e.image.value().real(), e.image.value().imag(), w.real(), w.imag()}));
    }
    r.payload["table"] = table({"a", "b", "c", "d", "word", "re", "im", "disc_re", "disc_im"}, rows);
}

inline void reduce(const RunConfig& c, ResultRecord& r) {
    if (!c.z) throw ConfigError("reduce needs --z");
    const auto red = reduce_to_fundamental_domain(Point::half_plane(*c.z));
    r.payload["z"] = json_complex(*c.z);
    r.payload["reduced"] = json_complex(red.point.value());
    r.payload["element"] = element_json(red.element);
    r.payload["word"] = to_string(red.element.word());
}

inline void forms(const RunConfig& c, ResultRecord& r) {
    const std::string name = c.param_string("form", "Delta");
    const auto n = static_cast<std::size_t>(c.basis_n.value_or(20));
    const auto canonical = canonical_form_name(name);
    if (!canonical) throw ConfigError("unknown form '" + name + "'");
    const QSeries f = *canonical == "E4" ? eisenstein_q(4, n) : *canonical == "E6" ? eisenstein_q(6, n) : delta_q(n);
    r.payload["form"] = *canonical;
    r.payload["weight"] = f.weight();
    r.payload["envelope"] = Json::array({f.envelope_c(), f.envelope_p()});
    Json rows = Json::array();
    for (std::size_t k = 0; k <= n; ++k) rows.push_back(Json::array({k, f[k].str()}));
    r.payload["table"] = table({"n", "coefficient"}, rows);
}

inline void eval(const RunConfig& c, ResultRecord& r) {
    const Complex z = c.z.value_or(I);
    const std::string name = c.param_string("form", "Delta");
    r.payload["form"] = name;
    r.payload["z"] = json_complex(z);
    if (name == "j") {
        r.payload["value"] = json_complex(j_eval(z));
    } else if (name == "eta") {
        r.payload["log_value"] = json_complex(log_eta(z));
        r.payload["value"] = json_complex(std::exp(log_eta(z)));
    } else {
        const auto v = qseries_eval(named_form(name), z);
        r.payload["value"] = json_complex(v.value);
        r.payload["tail_bound"] = v.tail_bound;
    }
}

inline void petersson_cmd(const RunConfig& c, ResultRecord& r) {
    const int k = static_cast<int>(c.param_int("k", 12));
    const auto dims = space_dims(k, static_cast<std::size_t>(c.basis_n.value_or(60)));
    if (dims.cusp_basis.empty()) throw Error(ErrorKind::precondition, "no cusp forms of weight " + std::to_string(k));
    QuadratureSpec q;
    const auto p = petersson(dims.cusp_basis[0], dims.cusp_basis[0], q);
    r.payload["weight"] = k;
    r.payload["form_leading"] = dims.cusp_basis[0][1].str();
    r.payload["value"] = json_complex(p.value);
    r.payload["tail_bound"] = p.tail_bound;
    r.payload["refinement_delta"] = p.refinement_delta;
    r.payload["cutoff"] = p.cutoff;
}

inline void dims(const RunConfig& c, ResultRecord& r) {
    const auto weights = c.param_list("k", {2, 4, 6, 8, 10, 12});
    const auto n = static_cast<std::size_t>(c.basis_n.value_or(60));
    Json rows = Json::array();
    for (double kd : weights) {
        const int k = static_cast<int>(kd);
        if (k != kd) throw ConfigError("weights must be integers");
        const auto d = space_dims(k, n);
        rows.push_back(Json::array({k, d.dim_modular, d.dim_cusp}));
    }
    r.payload["table"] = table({"k", "dim_modular", "dim_cusp"}, rows);
}

inline const std::vector<GroupElement>& elements_for(const RunConfig& c, std::int64_t default_norm) {
    if (c.budget_word) throw ConfigError("Poincare sums need a pure sup-norm budget (no --budget-word)");
    return acceptance::psl2z_ball(c.budget_norm.value_or(default_norm));
}

inline void poincare_cmd(const RunConfig& c, ResultRecord& r) {
    const double s = c.s.value_or(2.5);
    const Point z = point_of(c, Complex(0.21, 1.07));
    const auto sums = poincare_sums(transported_e0(s), z, s, elements_for(c, 64));
    const double ys = std::pow(z.value().imag(), s);
    r.payload["s"] = s;
    r.payload["z"] = json_complex(z.value());
    r.payload["holomorphic"] = json_complex(sums.holomorphic);
    r.payload["absolute"] = sums.absolute;
    r.payload["completed"] = ys * sums.absolute;
    r.payload["shell_increment"] = sums.shell_increment;
    r.payload["max_entry"] = sums.max_entry;
    r.payload["terms"] = sums.terms;
    r.payload["converged"] = sums.converged;
    if (!sums.converged)
        r.warn("convergence: outer shell carries " + format_double(sums.shell_increment / sums.absolute) + " of the sum");
}

inline void tracelike(const RunConfig& c, ResultRecord& r) {
    const double s = c.s.value_or(2.5);
    const Complex z = c.z.value_or(Complex(0.0, 1.5));
    const auto n = c.grid.value_or(5);
    if (n < 2) throw ConfigError("tracelike needs --grid >= 2");
    std::vector<Point> pts;
    for (std::int64_t k = 0; k < n; ++k)
        pts.push_back(Point::half_plane(Complex(z.real() - 0.5 + static_cast<double>(k) / static_cast<double>(n - 1), z.imag())));
    const auto t = tracelike_deviation(transported_e0(s), s, pts, elements_for(c, 64));
    r.payload["s"] = s;
    r.payload["constant"] = t.constant;
    r.payload["deviation"] = t.deviation;
    r.payload["max_entry"] = t.max_entry;
    Json rows = Json::array();
    for (const auto& p : t.samples) {
        rows.push_back(Json::array({p.z.real(), p.z.imag(), p.completed, p.shell_increment, p.converged}));
        if (!p.converged) r.warn("convergence: Poincare sum at " + format_complex(p.z) + " not converged");
    }
    r.payload["table"] = table({"re", "im", "completed", "shell_increment", "converged"}, rows);
}

inline void gram(const RunConfig& c, ResultRecord& r) {
    const double s = c.s.value_or(2.5);
    const auto n = static_cast<std::size_t>(c.basis_n.value_or(16));
    Budget b;
    b.max_word_len = static_cast<int>(c.budget_word.value_or(1));
    b.max_entry = c.budget_norm.value_or(4);
    const auto elems = enumerate_group(preset_from_string(c.preset), b);
    const auto g = gram_matrix(BergmanElement::basis(s, 0, n), elems, s);
    r.payload["s"] = s;
    r.payload["elements"] = elems.size();
    r.payload["wandering_deviation"] = g.wandering_deviation;
    r.payload["min_eigenvalue"] = g.min_eigenvalue;
    r.payload["max_truncation_loss"] = g.max_truncation_loss;
    r.payload["truncation"] = g.truncation;
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < g.matrix.rows(); ++i)
        for (Eigen::Index j = 0; j < g.matrix.cols(); ++j)
            rows.push_back(Json::array({i, j, to_string(elems[i].word()), to_string(elems[j].word()),
                                        g.matrix(i, j).real(), g.matrix(i, j).imag()}));
    r.payload["table"] = table({"i", "j", "g_i", "g_j", "re", "im"}, rows);
}

inline void vndim(const RunConfig& c, ResultRecord& r) {
    const GroupPreset p = preset_from_string(c.preset);
    const double s = c.s.value_or(3.0);
    const Rational crit = critical_exponent_exact(p);
    r.payload["preset"] = p.label();
    r.payload["s"] = s;
    r.payload["formula"] = vn_dimension(s, p);
    r.payload["critical_exponent"] = std::to_string(crit.num) + "/" + std::to_string(crit.den);
    const auto n = c.basis_n.value_or(400);
    if (n == 0) return;
    if (p.name != PresetName::PSL2Z) {
        r.warn("numeric dimension check is implemented for the PSL2Z domain only");
        return;
    }
    QuadratureSpec q;
    q.cusp_cutoff = c.param_double("cusp-cutoff", 1e-2);
    const auto d = vn_dimension_numeric(s, p, static_cast<std::size_t>(n), q, c.param_double("cusp-tolerance", 1e-2));
    r.payload["partial_sum"] = d.partial_sums.back();
    r.payload["cusp_bound"] = d.cusp_bound;
    r.payload["refinement_delta"] = d.refinement_delta;
    r.warn("tail: the dropped cusp region carries up to " + format_double(d.cusp_bound));
    Json rows = Json::array();
    const std::size_t stride = std::max<std::size_t>(1, d.partial_sums.size() / 50);
    for (std::size_t k = 0; k < d.partial_sums.size(); k += stride) rows.push_back(Json::array({k, d.partial_sums[k]}));
    if ((d.partial_sums.size() - 1) % stride) rows.push_back(Json::array({d.partial_sums.size() - 1, d.partial_sums.back()}));
    r.payload["table"] = table({"n", "partial_sum"}, rows);
}

inline void density_cmd(const RunConfig& c, ResultRecord& r) {
    const GroupPreset p = preset_from_string(c.preset);
    const auto orbit = orbit_sample(p, point_of(c, Complex(0.0, 2.0)), budget_of(c, 120));
    const auto radii = c.radii.empty() ? certified_radii(orbit, static_cast<std::size_t>(c.grid.value_or(12))) : c.radii;
    const auto d = density_estimate(orbit, p, radii, c.param_int("strict", 1) != 0);
    r.payload["preset"] = p.label();
    r.payload["slope"] = d.slope;
    r.payload["intercept"] = d.intercept;
    r.payload["target"] = d.target;
    r.payload["certified_radius"] = d.certified_radius;
    r.payload["covered"] = d.covered;
    r.payload["points"] = d.points;
    if (!d.covered) r.warn("coverage: radii extend past the certified radius " + format_double(d.certified_radius));
    Json rows = Json::array();
    for (std::size_t k = 0; k < radii.size(); ++k)
        rows.push_back(Json::array({radii[k], -std::log1p(-radii[k]), d.partial_sums[k]}));
    r.payload["table"] = table({"radius", "log_inv_gap", "partial_sum"}, rows);
}

inline void extremal(const RunConfig& c, ResultRecord& r) {
    const GroupPreset p = preset_from_string(c.preset);
    const auto s_grid = c.s ? std::vector<double>{*c.s} : c.param_list("s-grid", {12.0, 14.0});
    for (double s : s_grid)
        if (!(s > 1.0)) throw ConfigError("every weight in s-grid must exceed 1");
    ExtremalBudget b;
    b.max_entry = c.budget_norm.value_or(24);
    b.max_points = static_cast<std::size_t>(c.param_int("max-points", 800));
    const Point z_star = Point::half_plane(parse_complex(c.param_string("z-star", "i")));
    const auto d = extremal_profile(p, point_of(c, Complex(0.0, 2.0)), z_star, s_grid, b);
    r.payload["preset"] = p.label();
    r.payload["critical"] = d.critical;
    r.payload["certified_radius"] = d.certified_radius;
    Json regimes = Json::array();
    for (const auto& g : d.regimes) {
        Json e = Json::object();
        e["s"] = g.s;
        e["M"] = g.m;
        e["lambda_M"] = g.lambda_m;
        e["lambda_half"] = g.lambda_half;
        e["relative_change"] = g.relative_change;
        regimes.push_back(e);
    }
    r.payload["regimes"] = regimes;
    std::vector<std::string> cols{"M"};
    for (const auto& pr : d.profiles) {
        cols.push_back("lambda_s" + format_double(pr.s));
        if (pr.skipped) r.warn("rank: " + std::to_string(pr.skipped) + " points skipped at s = " + format_double(pr.s));
    }
    Json rows = Json::array();
    const std::size_t m = d.profiles.front().lambda.size();
    for (std::size_t k = 0; k < m; ++k) {
        Json row = Json::array({k});
        for (const auto& pr : d.profiles) row.push_back(pr.lambda[k]);
        rows.push_back(row);
    }
    r.payload["table"] = table(cols, rows);
}

inline void wandering_cmd(const RunConfig& c, ResultRecord& r) {
    const double w = c.param_double("w", 2000.0);
    const TransportedVanishing tv(w, c.param_double("r", 24.0), c.param_double("s0", 4.0));
    const auto m = static_cast<std::size_t>(c.param_int("m", 11));
    const auto n = static_cast<std::size_t>(c.basis_n.value_or(40));
    const Complex z0 = j_preimage(w);
    const auto pts = magnus_ordered_orbit(Point::half_plane(z0), m, c.budget_norm.value_or(100));
    const auto cand = wandering_truncated(pts, tv.evaluator(), tv.weight, n);
    r.payload["order"] = cand.order;
    r.payload["weight"] = tv.weight;
    r.payload["z0"] = json_complex(z0);
    r.payload["truncation"] = cand.truncation;
    r.payload["constraints"] = cand.constraints;
    r.payload["constraint_residual"] = cand.constraint_residual;
    r.payload["gram_offdiag"] = cand.gram_offdiag;
    r.payload["orthogonality"] = cand.orthogonality;
    r.payload["f_residual"] = cand.f_residual;
    Json rows = Json::array();
    for (const auto& p : cand.points) rows.push_back(Json::array({p.word.str(), p.sign, p.w.real(), p.w.imag()}));
    r.payload["table"] = table({"word", "sign", "re", "im"}, rows);
}

inline void verify(const RunConfig& c, ResultRecord& r) {
    SuiteOptions o;
    o.level = c.level;
    o.seed = c.seed;
    o.tamper_delta = c.param_string("tamper", "") == "delta";
    o.on_result = [](const CriterionResult& res) { std::fprintf(stderr, "%s\n", criterion_line(res).c_str()); };
    const auto results = verify_suite(o);
    const ResultRecord suite = suite_record(results, o);
    r.payload = suite.payload;
    r.timings = suite.timings;
    for (const auto& res : results)
        if (!res.passed) r.warn("criterion " + res.id + " failed");
}

}  // namespace harness

/// Runs the configured experiment. Configuration problems raise ConfigError, module
/// failures raise Error; both propagate.
inline ResultRecord run_experiment(const RunConfig& config) {
    config.validate();
    ResultRecord r;
    r.config = config;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string& cmd = config.command;
    if (cmd == "orbit") harness::orbit(config, r);
    else if (cmd == "reduce") harness::reduce(config, r);
    else if (cmd == "forms") harness::forms(config, r);
    else if (cmd == "eval") harness::eval(config, r);
    else if (cmd == "petersson") harness::petersson_cmd(config, r);
    else if (cmd == "dims") harness::dims(config, r);
    else if (cmd == "poincare") harness::poincare_cmd(config, r);
    else if (cmd == "tracelike") harness::tracelike(config, r);
    else if (cmd == "gram") harness::gram(config, r);
    else if (cmd == "vndim") harness::vndim(config, r);
    else if (cmd == "density") harness::density_cmd(config, r);
    else if (cmd == "extremal") harness::extremal(config, r);
    else if (cmd == "wandering") harness::wandering_cmd(config, r);
    else if (cmd == "verify") harness::verify(config, r);
    r.timings["total"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cmd == "verify") {
        r.status = r.warnings.empty() ? "ok" : "failed";
    }
    return r;
}

struct RunOutcome {
    ResultRecord record;
    int exit_code;  // 0 success, 1 module error or failed criteria, 2 invalid configuration
};

/// run_experiment with every error turned into a structured payload {kind, message}.
inline RunOutcome execute(const RunConfig& config) {
    RunOutcome out{{}, 0};
    out.record.config = config;
    auto fail = [&](const char* kind, const std::string& msg, int code) {
        out.record.status = "error";
        out.record.payload = Json::object();
        out.record.payload["error"] = {{"kind", kind}, {"message", msg}};
        out.exit_code = code;
    };
    try {
        out.record = run_experiment(config);
        if (out.record.status != "ok") out.exit_code = 1;
    } catch (const ConfigError& e) {
        fail("validation", e.what(), 2);
    } catch (const Error& e) {
        fail(to_string(e.kind()), e.what(), 1);
    } catch (const std::exception& e) {
        fail("internal", e.what(), 1);
    }
    return out;
}

}  // namespace orbit_bergman
