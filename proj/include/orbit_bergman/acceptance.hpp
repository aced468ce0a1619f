#pragma once

// The acceptance suite: criteria A1..A14 with measured values, at a fast or full level.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "bergman.hpp"
#include "dimension.hpp"
#include "io.hpp"
#include "modular.hpp"
#include "poincare.hpp"
#include "zero_lab.hpp"

namespace orbit_bergman {

struct CriterionResult {
    std::string id;
    std::string title;
    bool passed = false;
    Json measured = Json::object();
    std::string detail;  // error message when the criterion could not be evaluated
    double seconds = 0.0;
};

struct SuiteOptions {
    std::string level = "fast";
    std::uint64_t seed = 1;
    bool tamper_delta = false;            // perturb one coefficient of Delta; A6 must then fail
    bool determinism_pass = true;         // run the suite a second time for A14
    std::filesystem::path output_dir;     // where A14 writes its two result files, default a temp dir
    std::function<void(const CriterionResult&)> on_result;
};

namespace acceptance {

using Clock = std::chrono::steady_clock;

inline bool full(const SuiteOptions& o) { return o.level == "full"; }

/// Delta to 200 terms, or with a_5 off by one when tampering.
inline QSeries delta_source(const SuiteOptions& o) {
    QSeries d = delta_q(200);
    if (!o.tamper_delta) return d;
    std::vector<BigInt> c = d.coefficients();
    c[5] += 1;
    return {12, c, d.envelope_c(), d.envelope_p()};
}

inline BergmanElement random_element(std::mt19937_64& gen, double s, std::size_t degree) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Complex> c(degree + 1);
    for (auto& v : c) v = {u(gen), u(gen)};
    return {s, c};
}

inline Point random_disc_point(std::mt19937_64& gen, double radius) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(gen));
    return Point::disc(std::polar(r, 2.0 * pi * u(gen)));
}

inline std::vector<Complex> form_grid(double y_min) {
    std::vector<Complex> out;
    for (double x : {-0.5, -0.25, 0.0, 0.25, 0.5})
        for (double y : {y_min, y_min + 0.3, y_min + 0.7, y_min + 1.5}) out.emplace_back(x, y);
    return out;
}

inline const std::vector<GroupElement>& psl2z_ball(std::int64_t b) {
    static std::map<std::int64_t, std::vector<GroupElement>> cache;
    auto it = cache.find(b);
    if (it == cache.end()) it = cache.emplace(b, enumerate_group(psl2z(), -1, b)).first;
    return it->second;
}

// A1
inline bool orthonormality(const SuiteOptions&, Json& m) {
    double worst = 0.0;
    for (double s : {2.0, 2.5, 13.0}) {
        double dev = 0.0;
        for (std::size_t i = 0; i <= 20; ++i)
            for (std::size_t j = i; j <= 20; ++j) {
                const auto f = [i, s](Complex w) { return basis_eval(i, s, Point::disc(w)); };
                const auto g = [j, s](Complex w) { return basis_eval(j, s, Point::disc(w)); };
                const Complex v = quad_inner(f, g, s, {}).value;
                dev = std::max(dev, std::abs(v - (i == j ? 1.0 : 0.0)));
            }
        m["max_deviation_s" + format_double(s)] = dev;
        worst = std::max(worst, dev);
    }
    m["max_deviation"] = worst;
    return worst < 1e-8;
}

// A2
inline bool reproducing(const SuiteOptions& o, Json& m) {
    std::mt19937_64 gen(o.seed);
    double worst = 0.0;
    std::size_t checks = 0;
    for (double s : {2.0, 2.5, 13.0}) {
        std::vector<Point> zs;
        for (int k = 0; k < 10; ++k) zs.push_back(random_disc_point(gen, 0.8));
        for (int t = 0; t < 50; ++t) {
            // a random polynomial, evaluated by Horner from its power-series coefficients
            std::uniform_int_distribution<int> deg(0, 10);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            std::vector<Complex> a(static_cast<std::size_t>(deg(gen)) + 1);
            for (auto& v : a) v = {u(gen), u(gen)};
            const auto f = BergmanElement::from_taylor(s, a);
            for (const auto& z : zs) {
                Complex want = 0.0;
                for (std::size_t n = a.size(); n-- > 0;) want = want * z.value() + a[n];
                const Complex got = inner_product(f, kernel_element(s, z, 10));
                worst = std::max(worst, std::abs(got - want));
                ++checks;
            }
        }
    }
    m["max_error"] = worst;
    m["checks"] = checks;
    return worst < 1e-9;
}

// A3
inline bool unitarity(const SuiteOptions& o, Json& m) {
    std::mt19937_64 gen(o.seed + 1);
    const GroupElement S = GroupElement::generator(Generator::S), T = GroupElement::generator(Generator::T);
    double norm_dev = 0.0;
    for (double s : {2.0, 2.5, 13.0}) {
        const auto f = random_element(gen, s, 10);
        for (const auto& g : {S, T, S * T}) {
            const auto r = pi_action_adaptive(g, f, 1e-9);
            norm_dev = std::max(norm_dev, std::abs(r.image.norm() / f.norm() - 1.0));
        }
    }
    const std::vector<GroupElement> sample{S, T, S * T, GroupElement(2, 1, 1, 1), GroupElement(1, 0, 3, 1)};
    const Point z = Point::half_plane(Complex(0.3, 1.2));
    double modulus_dev = 0.0, even_dev = 0.0;
    for (const auto& g : sample)
        for (const auto& h : sample) {
            for (double s : {2.5, 13.0, 7.3}) modulus_dev = std::max(modulus_dev, std::abs(std::abs(cocycle_defect(g, h, z, s)) - 1.0));
            even_dev = std::max(even_dev, std::abs(cocycle_defect(g, h, z, 2.0) - 1.0));
        }
    m["norm_deviation"] = norm_dev;
    m["defect_modulus_deviation"] = modulus_dev;
    m["defect_s2_deviation"] = even_dev;
    return norm_dev < 1e-6 && modulus_dev < 1e-10 && even_dev < 1e-10;
}

// A4
inline bool vn_numeric(const SuiteOptions&, Json& m) {
    QuadratureSpec q;
    q.cusp_cutoff = 1e-3;
    q.angular_points = 48;
    const auto r = vn_dimension_numeric(3.0, psl2z(), 4000, q);
    bool monotone = true;
    for (std::size_t n = 1; n < r.partial_sums.size(); ++n) monotone = monotone && r.partial_sums[n] >= r.partial_sums[n - 1];
    const double rel = std::abs(r.partial_sums.back() - r.formula) / r.formula;
    m["formula"] = r.formula;
    m["partial_sum"] = r.partial_sums.back();
    m["relative_gap"] = rel;
    m["cusp_bound"] = r.cusp_bound;
    m["monotone"] = monotone;
    return monotone && rel < 0.01;
}

// A5
inline bool critical(const SuiteOptions&, Json& m) {
    const Rational c = critical_exponent_exact(psl2z());
    const Rational d = vn_dimension_exact(c, psl2z());
    bool ok = c.num == 13 && c.den == 1 && d.num == 1 && d.den == 1 && vn_dimension(13.0, psl2z()) == 1.0;
    const Rational c2 = critical_exponent_exact(gamma2());
    const Rational d2 = vn_dimension_exact(c2, gamma2());
    ok = ok && c2.num == 3 && c2.den == 1 && d2.num == 1 && d2.den == 1;
    for (std::int64_t num = 3; num < 60; num += 7)
        for (std::int64_t den : {1, 2, 3, 5}) {
            if (num <= den) continue;
            const Rational a = vn_dimension_exact({num, den}, psl2z()), b = vn_dimension_exact({num, den}, gamma2());
            ok = ok && b.num * a.den == 6 * a.num * b.den;
        }
    m["critical_psl2z"] = std::to_string(c.num) + "/" + std::to_string(c.den);
    m["vn_at_critical"] = std::to_string(d.num) + "/" + std::to_string(d.den);
    m["critical_gamma2"] = std::to_string(c2.num) + "/" + std::to_string(c2.den);
    return ok;
}

// A6
inline bool modular_identities(const SuiteOptions& o, Json& m) {
    const QSeries d = delta_source(o);
    const QSeries e4 = eisenstein_q(4, 50), e6 = eisenstein_q(6, 50);
    const QSeries lhs = (e4.power(3) - e6.power(2)).divided_exact(1728);
    const bool identity = lhs == d.truncated(50);
    const bool values = d[2] == -24 && d[3] == 252;
    double eta_err = 0.0;
    for (const auto z : form_grid(0.5)) {
        const Complex want = qseries_eval(d, z).value;
        eta_err = std::max(eta_err, std::abs(std::exp(24.0 * log_eta(z)) - want) / std::abs(want));
    }
    m["identity_to_50"] = identity;
    m["a2"] = d[2].str();
    m["a3"] = d[3].str();
    m["eta_relative_error"] = eta_err;
    return identity && values && eta_err < 1e-9;
}

// A7
inline bool weight_dims(const SuiteOptions&, Json& m) {
    bool ok = space_dims(2, 60).dim_modular == 0;
    for (int k : {4, 6, 8, 10}) ok = ok && space_dims(k, 60).dim_cusp == 0;
    const auto d12 = space_dims(12, 60);
    ok = ok && d12.dim_cusp == 1 && d12.dim_modular == 2;
    Json t = Json::array();
    for (int k = 2; k <= 12; k += 2) {
        const auto d = space_dims(k, 60);
        t.push_back(Json::array({k, d.dim_modular, d.dim_cusp}));
    }
    m["weight_modular_cusp"] = t;
    return ok;
}

// A8
inline bool special_values(const SuiteOptions& o, Json& m) {
    const auto& t = FormTable::get();
    const QSeries d = delta_source(o);
    const double e4_rho = std::abs(qseries_eval(t.e4, std::exp(I * (pi / 3.0))).value);
    const double j_i = std::abs(j_eval(I).real() / 1728.0 - 1.0);
    const GroupElement S = GroupElement::generator(Generator::S), T = GroupElement::generator(Generator::T);
    double residual = 0.0;
    for (const auto z : form_grid(0.5))
        for (const auto& g : {S, T}) {
            const Complex gz = apply_moebius(g, Point::half_plane(z)).value();
            const Complex j = static_cast<double>(g.c()) * z + static_cast<double>(g.d());
            for (const QSeries* f : {&t.e4, &t.e6, &d}) {
                const Complex rhs = qseries_eval(*f, z).value;
                const Complex lhs = qseries_eval(*f, gz).value * std::pow(j, -f->weight());
                residual = std::max(residual, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
            }
        }
    m["e4_at_rho"] = e4_rho;
    m["j_i_relative_error"] = j_i;
    m["modularity_residual"] = residual;
    return e4_rho < 1e-6 && j_i < 1e-4 && residual < 1e-8;
}

// A9
inline bool density(const SuiteOptions&, Json& m) {
    struct Case {
        Complex z;
        double target;
    };
    bool ok = true;
    Json rows = Json::array();
    Budget b;
    b.max_entry = 120;
    for (const Case& c : {Case{Complex(0.0, 2.0), 6.0}, Case{I, 3.0}, Case{std::exp(I * (pi / 3.0)), 2.0}}) {
        const auto orbit = orbit_sample(psl2z(), Point::half_plane(c.z), b);
        const auto d = density_estimate(orbit, psl2z(), certified_radii(orbit, 12));
        const double rel = std::abs(d.slope - c.target) / c.target;
        ok = ok && rel < 0.1;
        rows.push_back(Json::array({format_complex(c.z), c.target, d.slope, rel}));
    }
    m["z_target_slope_relerr"] = rows;
    Json sums = Json::array();
    double prev = 0.0;
    for (std::int64_t bound : {30, 60, 120}) {
        Budget bb;
        bb.max_entry = bound;
        const auto orbit = orbit_sample(psl2z(), Point::half_plane(Complex(0.0, 2.0)), bb);
        const double v = density_estimate(orbit, psl2z(), {0.5, certified_radius(orbit)}).partial_sums.back();
        ok = ok && v > prev;
        prev = v;
        sums.push_back(v);
    }
    m["blaschke_sums"] = sums;
    return ok;
}

// A10
inline bool threshold(const SuiteOptions& o, Json& m) {
    ExtremalBudget b;
    b.max_entry = full(o) ? 64 : 24;
    b.max_points = full(o) ? 4096 : 800;
    const auto r = extremal_profile(psl2z(), Point::half_plane(Complex(0.0, 2.0)), Point::disc(0.0), {12.0, 14.0}, b);
    const auto& lo = r.regimes[0];
    const auto& hi = r.regimes[1];
    const double ratio = hi.lambda_m / lo.lambda_m;
    m["M"] = lo.m;
    m["lambda_s12"] = lo.lambda_m;
    m["lambda_s14"] = hi.lambda_m;
    m["ratio"] = ratio;
    m["change_s14"] = hi.relative_change;
    m["change_s12"] = lo.relative_change;
    return ratio > 100.0 && hi.relative_change < 0.05 && lo.relative_change > 0.5;
}

// A11
inline bool wandering(const SuiteOptions& o, Json& m) {
    const Complex z0 = j_preimage(2000.0);
    const TransportedVanishing tv(2000.0, 24.0, 4.0);
    std::vector<std::pair<std::size_t, std::size_t>> schedule{{20, 5}, {40, 11}, {80, 21}};
    if (full(o)) schedule.emplace_back(160, 41);
    bool ok = true;
    double prev_gram = std::numeric_limits<double>::infinity(), prev_orth = prev_gram;
    Json rows = Json::array();
    for (auto [n, count] : schedule) {
        const auto pts = magnus_ordered_orbit(Point::half_plane(z0), count, 100);
        const auto c = wandering_truncated(pts, tv.evaluator(), tv.weight, n);
        ok = ok && c.constraint_residual < 1e-10 && c.gram_offdiag < prev_gram && c.orthogonality < prev_orth;
        prev_gram = c.gram_offdiag;
        prev_orth = c.orthogonality;
        rows.push_back(Json::array({n, count, c.constraint_residual, c.gram_offdiag, c.orthogonality}));
    }
    m["N_M_residual_gram_orth"] = rows;
    return ok;
}

// A12
inline bool growth(const SuiteOptions&, Json& m) {
    const auto f = rw_function(2000.0, 0.1);
    const auto c1 = f.certificate(17, 400, 1e4);
    const auto c2 = f.certificate(33, 800, 1e4);
    const double rel = std::abs(c2.sup - c1.sup) / c2.sup;
    m["exponent"] = c1.exponent;
    m["sup_coarse"] = c1.sup;
    m["sup_fine"] = c2.sup;
    m["relative_change"] = rel;
    return std::isfinite(c1.sup) && std::isfinite(c2.sup) && rel < 0.01;
}

// A13
inline bool poincare(const SuiteOptions& o, Json& m) {
    const double s = 2.5;
    const Complex z(0.21, 1.07);
    const auto& elems = psl2z_ball(full(o) ? 128 : 64);
    const auto xi = transported_e0(s);
    const auto r0 = poincare_sums(xi, Point::half_plane(z), s, elems);
    const auto r1 = poincare_sums(xi, Point::half_plane(z + 1.0), s, elems);
    const double y_s = std::pow(z.imag(), s);
    const double gap = std::abs(y_s * r0.absolute - y_s * r1.absolute);
    const double indicator = y_s * std::max(r0.shell_increment, r1.shell_increment);
    const std::vector<Point> pts{Point::half_plane(Complex(0.1, 1.1)), Point::half_plane(Complex(-0.35, 2.3))};
    const auto tr = tracelike_deviation(xi, s, pts, elems);
    m["budget"] = r0.max_entry;
    m["completed_z"] = y_s * r0.absolute;
    m["completed_Tz"] = y_s * r1.absolute;
    m["gap"] = gap;
    m["indicator"] = indicator;
    m["tracelike_deviation"] = tr.deviation;
    return gap < indicator && tr.deviation > 0.0;
}

struct Entry {
    const char* id;
    const char* title;
    bool (*run)(const SuiteOptions&, Json&);
    double time_limit;  // seconds, 0 for none
};

inline const std::vector<Entry>& entries() {
    static const std::vector<Entry> list{
        {"A1", "orthonormality of e_0..e_20", orthonormality, 60.0},
        {"A2", "reproducing property", reproducing, 0.0},
        {"A3", "unitarity and cocycle defect", unitarity, 0.0},
        {"A4", "von Neumann dimension partial sums, s = 3", vn_numeric, 300.0},
        {"A5", "critical exponents", critical, 0.0},
        {"A6", "modular identities", modular_identities, 0.0},
        {"A7", "dimensions of M_k and S_k", weight_dims, 0.0},
        {"A8", "special values and modularity", special_values, 0.0},
        {"A9", "orbit density slopes", density, 600.0},
        {"A10", "threshold probe s = 12 vs 14", threshold, 0.0},
        {"A11", "wandering construction trends", wandering, 0.0},
        {"A12", "growth certificate stability", growth, 0.0},
        {"A13", "Poincare invariance and tracelike deviation", poincare, 0.0},
    };
    return list;
}

inline CriterionResult run_one(const Entry& e, const SuiteOptions& o) {
    CriterionResult r{e.id, e.title, false, Json::object(), "", 0.0};
    const auto t0 = Clock::now();
    try {
        r.passed = e.run(o, r.measured);
    } catch (const Error& err) {
        r.detail = std::string(to_string(err.kind())) + ": " + err.what();
    } catch (const std::exception& err) {
        r.detail = err.what();
    }
    r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (e.time_limit > 0.0 && r.seconds >= e.time_limit) {
        r.passed = false;
        r.detail = "runtime over " + format_double(e.time_limit) + " s";
    }
    return r;
}

}  // namespace acceptance

/// One summary line: id, PASS or FAIL, title, measured values.
inline std::string criterion_line(const CriterionResult& r) {
    std::string line = fmt::format("{:<4} {} {}: {}", r.id, r.passed ? "PASS" : "FAIL", r.title, r.measured.dump());
    if (!r.detail.empty()) line += " (" + r.detail + ")";
    return line + fmt::format(" [{:.1f} s]", r.seconds);
}

/// Record for a set of criterion results. Runtimes go into the timings, not the payload.
inline ResultRecord suite_record(const std::vector<CriterionResult>& results, const SuiteOptions& o) {
    ResultRecord rec;
    rec.config.command = "verify";
    rec.config.level = o.level;
    rec.config.seed = o.seed;
    if (o.tamper_delta) rec.config.params["tamper"] = "delta";
    Json rows = Json::array(), failed = Json::array(), criteria = Json::array();
    for (const auto& r : results) {
        Json c = Json::object();
        c["id"] = r.id;
        c["title"] = r.title;
        c["passed"] = r.passed;
        c["measured"] = r.measured;
        if (!r.detail.empty()) c["detail"] = r.detail;
        criteria.push_back(c);
        rows.push_back(Json::array({r.id, r.passed ? "pass" : "fail", r.measured.dump()}));
        if (!r.passed) failed.push_back(r.id);
        rec.timings[r.id] = r.seconds;
    }
    rec.payload["level"] = o.level;
    rec.payload["passed"] = results.size() - failed.size();
    rec.payload["total"] = results.size();
    rec.payload["failed"] = failed;
    rec.payload["criteria"] = criteria;
    rec.payload["table"] = {{"columns", {"criterion", "result", "measured"}}, {"rows", rows}};
    return rec;
}

/// Runs A1..A13, then for A14 a second pass with the same seed; both passes are written
/// to result files and compared byte for byte.
inline std::vector<CriterionResult> verify_suite(const SuiteOptions& o) {
    require(o.level == "fast" || o.level == "full", ErrorKind::precondition, "level must be fast or full");
    std::vector<CriterionResult> results;
    for (const auto& e : acceptance::entries()) {
        results.push_back(acceptance::run_one(e, o));
        if (o.on_result) o.on_result(results.back());
    }
    if (!o.determinism_pass) return results;

    CriterionResult a14{"A14", "determinism of result files", false, Json::object(), "", 0.0};
    const auto t0 = acceptance::Clock::now();
    try {
        std::vector<CriterionResult> second;
        for (const auto& e : acceptance::entries()) second.push_back(acceptance::run_one(e, o));
        const auto dir = o.output_dir.empty()
                             ? std::filesystem::temp_directory_path() / ("orbit_bergman_verify_" + std::to_string(::getpid()))
                             : o.output_dir;
        std::filesystem::create_directories(dir);
        const auto p1 = dir / "suite_run1.json", p2 = dir / "suite_run2.json";
        emit_results(suite_record(results, o), p1.string(), "json");
        emit_results(suite_record(second, o), p2.string(), "json");
        auto slurp = [](const std::filesystem::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        const std::string b1 = slurp(p1), b2 = slurp(p2);
        a14.passed = !b1.empty() && b1 == b2;
        a14.measured["bytes"] = b1.size();
        a14.measured["identical"] = b1 == b2;
        if (o.output_dir.empty()) std::filesystem::remove_all(dir);
    } catch (const std::exception& err) {
        a14.detail = err.what();
    }
    a14.seconds = std::chrono::duration<double>(acceptance::Clock::now() - t0).count();
    results.push_back(a14);
    if (o.on_result) o.on_result(results.back());
    return results;
}

}  // namespace orbit_bergman
