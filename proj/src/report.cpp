#include "ptcalc/report.hpp"

#include "ptcalc/errors.hpp"
#include "ptcalc/metrizability.hpp"
#include "ptcalc/sampling.hpp"
#include "ptcalc/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace ptcalc {

namespace {

using nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";

struct Setup {
    std::vector<std::vector<double>> points;
    int samples;
    unsigned seed;
    EvalOptions opts;
};

Setup make_setup(const ChartGeometry& geom, const RunFlags& flags) {
    Setup s;
    s.samples = flags.samples > 0 ? flags.samples : geom.samples;
    s.seed = flags.seed >= 0 ? static_cast<unsigned>(flags.seed) : geom.seed;
    s.points = sample_points(geom.domain, s.samples, s.seed);
    s.opts.order = flags.order;
    return s;
}

ordered_json header(const char* command, const ChartGeometry& geom, const RunFlags& flags,
                    const Setup& setup) {
    ordered_json j;
    j["tool"] = "ptcalc";
    j["version"] = kVersion;
    j["command"] = command;
    j["geometry"] = geom.name;
    j["dimension"] = geom.n;
    j["source"] = geom.has_metric ? "metric" : "connection";
    ordered_json params;
    params["samples"] = setup.samples;
    params["seed"] = setup.seed;
    params["order"] = flags.order;
    params["tolerance"] = flags.tol;
    params["witness_threshold"] = flags.witness;
    params["depth"] = flags.depth;
    params["transport_steps"] = flags.transport_steps;
    j["params"] = params;
    return j;
}

class SectionTimer {
public:
    SectionTimer(bool enabled, ordered_json& report) : enabled_(enabled), report_(report) {}
    template <class F>
    auto time(const char* name, F&& f) {
        auto t0 = std::chrono::steady_clock::now();
        auto result = f();
        auto t1 = std::chrono::steady_clock::now();
        if (enabled_) {
            timings_[name] = std::chrono::duration<double, std::milli>(t1 - t0).count();
            report_["timings_ms"] = timings_;
        }
        return result;
    }

private:
    bool enabled_;
    ordered_json& report_;
    ordered_json timings_ = ordered_json::object();
};

ordered_json json_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

RunResult run_analyze(const ChartGeometry& geom, const RunFlags& flags) {
    Setup setup = make_setup(geom, flags);
    ordered_json j = header("analyze", geom, flags, setup);
    SectionTimer timer(flags.timings, j);

    struct Sups {
        double riemann = 0, ricci = 0, schouten = 0, weyl = 0, cotton = 0;
        double ricci_asym = 0, special_trace = 0, flatness = 0;
        double det_min = std::numeric_limits<double>::infinity(), det_max = 0;
        double p_vs_g = 0;
        std::pair<int, int> sig{0, 0};
    };
    Sups s = timer.time("curvature", [&] {
        Sups acc;
        bool first = true;
        for (const auto& pt : setup.points) {
            Frame f = make_frame(geom, pt, flags.order, ScaleMode::Chart);
            CurvaturePack pack = curvature_pack(f.gamma, true);
            acc.riemann = std::max(acc.riemann, sup_value(pack.riemann));
            acc.ricci = std::max(acc.ricci, sup_value(pack.ricci));
            acc.schouten = std::max(acc.schouten, sup_value(pack.schouten));
            acc.weyl = std::max(acc.weyl, sup_value(pack.weyl));
            acc.cotton = std::max(acc.cotton, sup_value(pack.cotton));
            acc.flatness = geom.n == 2 ? acc.cotton : acc.weyl;
            for (int a = 0; a < geom.n; ++a) {
                double tr = 0;
                for (int i = 0; i < geom.n; ++i) tr += f.gamma(i, i, a).value();
                acc.special_trace = std::max(acc.special_trace, std::abs(tr));
                for (int b = 0; b < geom.n; ++b)
                    acc.ricci_asym = std::max(acc.ricci_asym,
                                              std::abs(pack.ricci(a, b).value() - pack.ricci(b, a).value()));
            }
            if (geom.has_metric) {
                double det = std::abs(determinant(f.g).value());
                acc.det_min = std::min(acc.det_min, det);
                acc.det_max = std::max(acc.det_max, det);
                if (first) {
                    Mat<double> gv(geom.n, 0.0);
                    for (int a = 0; a < geom.n; ++a)
                        for (int b = 0; b < geom.n; ++b) gv(a, b) = f.g(a, b).value();
                    acc.sig = signature_of(gv);
                }
                Frame fm = make_frame(geom, pt, flags.order, ScaleMode::Metric);
                CurvaturePack mp = curvature_pack(fm.gamma, false);
                for (int a = 0; a < geom.n; ++a)
                    for (int b = 0; b < geom.n; ++b)
                        acc.p_vs_g = std::max(acc.p_vs_g,
                                              std::abs(mp.schouten(a, b).value() - fm.g(a, b).value()));
            }
            first = false;
        }
        return acc;
    });

    j["special_connection"] = {{"trace_residual", s.special_trace}, {"tolerance", 1e-12}};
    ordered_json curv;
    curv["riemann_sup"] = s.riemann;
    curv["ricci_sup"] = s.ricci;
    curv["ricci_asymmetry"] = s.ricci_asym;
    curv["schouten_sup"] = s.schouten;
    curv["weyl_sup"] = s.weyl;
    curv["cotton_sup"] = s.cotton;
    j["curvature"] = curv;
    ordered_json flat;
    flat["residual"] = s.flatness;
    flat["tolerance"] = flags.tol;
    flat["projectively_flat"] = s.flatness <= flags.tol;
    j["projective_flatness"] = flat;
    if (geom.has_metric) {
        ordered_json m;
        m["abs_det_min"] = s.det_min;
        m["abs_det_max"] = s.det_max;
        m["signature"] = {s.sig.first, s.sig.second};
        m["schouten_matches_metric_residual"] = s.p_vs_g;
        m["schouten_matches_metric"] = s.p_vs_g <= flags.tol;
        m["tolerance"] = flags.tol;
        j["metric"] = m;
    }
    return {j, 0};
}

RunResult run_metrizability(const ChartGeometry& geom, const RunFlags& flags) {
    Setup setup = make_setup(geom, flags);
    ordered_json j = header("metrizability", geom, flags, setup);
    SectionTimer timer(flags.timings, j);

    ObstructionParams params;
    params.depth = flags.depth;
    params.transport_steps = flags.transport_steps;
    params.opts = setup.opts;
    ObstructionReport rep = timer.time("obstruction", [&] {
        return dimension_bound(geom, setup.points, params);
    });

    ordered_json ob;
    ob["N"] = rep.N;
    ob["rank"] = rep.rank;
    ob["dim_upper_bound"] = rep.dim_upper_bound;
    ob["sv_gap"] = json_or_null(rep.sv_gap);
    ob["required_gap_ratio"] = params.gap_ratio;
    ob["indeterminate"] = rep.indeterminate;
    ob["note"] = "upper bound on the global solution space; certified only by reconstruction residuals";
    ordered_json recs = ordered_json::array();
    for (const auto& r : rep.constraints) {
        ordered_json rec;
        rec["source"] = r.source;
        rec["sup"] = r.sup;
        rec["rank_added"] = r.rank_added;
        rec["skipped"] = r.skipped;
        recs.push_back(rec);
    }
    ob["constraints"] = recs;
    ordered_json svs = ordered_json::array();
    for (double v : rep.singular_values) svs.push_back(v);
    ob["singular_values"] = svs;
    j["obstruction"] = ob;

    if (geom.has_metric || geom.has_sigma) {
        auto d = timer.time("d_residual", [&] { return metrizability_residual(geom, setup.points, setup.opts); });
        auto p = timer.time("prolongation_residual", [&] { return prolongation_residual(geom, setup.points, setup.opts); });
        ordered_json sig;
        sig["provenance"] = geom.has_sigma ? "user-supplied" : "from-metric";
        sig["d_residual"] = d.sup;
        sig["solves_metrizability"] = d.sup <= flags.tol;
        sig["prolongation_residual"] = p.sup;
        sig["tolerance"] = flags.tol;
        double det_lo = std::numeric_limits<double>::infinity(), det_hi = 0.0;
        for (const auto& pt : setup.points) {
            Frame f = working_frame(geom, pt, setup.opts);
            double det = std::abs(determinant(eval_sigma(geom, f, setup.opts)).value());
            det_lo = std::min(det_lo, det);
            det_hi = std::max(det_hi, det);
        }
        sig["abs_det_sigma_min"] = det_lo;
        sig["abs_det_sigma_max"] = det_hi;
        j["sigma"] = sig;
    } else {
        j["sigma"] = {{"provenance", "none"}};
    }
    return {j, rep.indeterminate ? 4 : 0};
}

RunResult run_check_normal(const ChartGeometry& geom, const RunFlags& flags) {
    if (!geom.has_metric)
        throw Error("check-normal requires a metric geometry (Einstein verdicts need g)");
    Setup setup = make_setup(geom, flags);
    ordered_json j = header("check-normal", geom, flags, setup);
    SectionTimer timer(flags.timings, j);
    Verdict v = timer.time("verdict", [&] {
        return theorem_mt_verdict(geom, setup.points, flags.tol, flags.witness, setup.opts);
    });

    ordered_json verdict;
    verdict["solves_metrizability"] = v.solves_metrizability;
    verdict["d_residual"] = v.d_residual;
    verdict["is_normal"] = v.is_normal;
    verdict["normality_residual"] = v.normality_res;
    verdict["is_einstein"] = v.is_einstein;
    verdict["einstein_residual"] = v.einstein_res;
    verdict["is_projectively_flat"] = v.is_projectively_flat;
    verdict["flatness_residual"] = v.flatness_res;
    verdict["tolerance"] = v.tolerance;
    verdict["witness_threshold"] = v.witness_threshold;
    j["verdict"] = verdict;
    j["theorem_mt_consistent"] = v.theorem_mt_consistent;
    return {j, v.theorem_mt_consistent ? 0 : 5};
}

RunResult run_correspond(const ChartGeometry& geom, const RunFlags& flags) {
    Setup setup = make_setup(geom, flags);
    ordered_json j = header("correspond", geom, flags, setup);
    SectionTimer timer(flags.timings, j);

    try {
        struct Stats {
            double ratio_mean = 0, ratio_spread = 0, roundtrip = 0;
            int roundtrip_points = 0, roundtrip_skipped = 0;
            std::vector<double> ratios;
        };
        Stats st = timer.time("correspondence", [&] {
            Stats s;
            for (const auto& pt : setup.points) {
                Frame f = working_frame(geom, pt, setup.opts);
                CurvaturePack pack = curvature_pack(f.gamma, false);
                Mat<Jet> sigma = eval_sigma(geom, f, setup.opts);
                Jet tau_out = corresponding_tau_at(f, sigma, pack.schouten);
                double tau_s = tau_from_sigma(sigma, f.logv).value();
                s.ratios.push_back(tau_out.value() / tau_s);
                try {
                    // guaranteed to recover sigma for normal solutions only;
                    // elsewhere the tau-scale Schouten tensor may degenerate
                    Mat<Jet> back = corresponding_sigma_at(f, tau_out);
                    double scale = std::max(1.0, sup_value(sigma));
                    for (int a = 0; a < geom.n; ++a)
                        for (int b = 0; b < geom.n; ++b)
                            s.roundtrip = std::max(s.roundtrip,
                                                   std::abs(back(a, b).value() - sigma(a, b).value()) / scale);
                    ++s.roundtrip_points;
                } catch (const Error&) {
                    ++s.roundtrip_skipped;
                }
            }
            for (double r : s.ratios) s.ratio_mean += r;
            s.ratio_mean /= static_cast<double>(s.ratios.size());
            for (double r : s.ratios) s.ratio_spread = std::max(s.ratio_spread, std::abs(r - s.ratio_mean));
            return s;
        });

        DetLReport dl = timer.time("det_L", [&] { return det_L(geom, setup.points, 1e-8, setup.opts); });

        ordered_json m;
        m["tau_ratio_mean"] = st.ratio_mean;   // measured constant relating H(X,X) to tau^sigma
        m["tau_ratio_spread"] = st.ratio_spread;
        if (st.roundtrip_points > 0) m["roundtrip_residual"] = st.roundtrip;
        else m["roundtrip_residual"] = nullptr;
        m["roundtrip_points"] = st.roundtrip_points;
        m["roundtrip_skipped"] = st.roundtrip_skipped;
        j["correspondence"] = m;

        ordered_json d;
        double dmin = dl.det_values[0], dmax = dl.det_values[0];
        for (double v : dl.det_values) {
            dmin = std::min(dmin, v);
            dmax = std::max(dmax, v);
        }
        d["det_min"] = dmin;
        d["det_max"] = dmax;
        d["spread"] = dl.spread;
        d["constant"] = dl.constant;
        d["constancy_tolerance"] = 1e-8;
        double rmean = 0;
        int cnt = 0;
        double rspread = 0;
        for (std::size_t i = 0; i < dl.det_values.size(); ++i) {
            if (std::abs(dl.scalar_curvatures[i]) > 1e-10) {
                rmean += dl.det_values[i] / dl.scalar_curvatures[i];
                ++cnt;
            }
        }
        if (cnt > 0) {
            rmean /= cnt;
            for (std::size_t i = 0; i < dl.det_values.size(); ++i)
                if (std::abs(dl.scalar_curvatures[i]) > 1e-10)
                    rspread = std::max(rspread, std::abs(dl.det_values[i] / dl.scalar_curvatures[i] - rmean));
            d["scalar_curvature_ratio_mean"] = rmean;
            d["scalar_curvature_ratio_spread"] = rspread;
        } else {
            d["scalar_curvature_ratio_mean"] = nullptr;
            d["scalar_curvature_ratio_spread"] = nullptr;
        }
        j["det_L"] = d;
        return {j, 0};
    } catch (const AlgebraicDegeneracyError& e) {
        ordered_json m;
        m["algebraically_degenerate"] = true;
        m["det_L_at_failure"] = e.detL;
        m["note"] = "L(sigma) is degenerate exactly where the scalar curvature of g^sigma vanishes";
        j["correspondence"] = m;
        return {j, 6};
    }
}

std::string summary_text(const nlohmann::ordered_json& report) {
    std::ostringstream os;
    os << report.value("command", "?") << " " << report.value("geometry", "?") << " (n="
       << report.value("dimension", 0) << ")\n";
    if (report.contains("curvature")) {
        const auto& c = report["curvature"];
        os << "  |W| = " << c["weyl_sup"].dump() << ", |Y| = " << c["cotton_sup"].dump()
           << ", |P| = " << c["schouten_sup"].dump() << "\n";
        os << "  projectively flat: "
           << (report["projective_flatness"]["projectively_flat"].get<bool>() ? "yes" : "no")
           << " (residual " << report["projective_flatness"]["residual"].dump() << ")\n";
    }
    if (report.contains("obstruction")) {
        const auto& o = report["obstruction"];
        os << "  solution space dimension <= " << o["dim_upper_bound"].dump() << " (N = "
           << o["N"].dump() << ", rank " << o["rank"].dump() << ", indeterminate: "
           << (o["indeterminate"].get<bool>() ? "yes" : "no") << ")\n";
    }
    if (report.contains("sigma") && report["sigma"].contains("d_residual")) {
        const auto& s = report["sigma"];
        os << "  D(sigma) residual = " << s["d_residual"].dump() << ", prolongation residual = "
           << s["prolongation_residual"].dump() << "\n";
    }
    if (report.contains("verdict")) {
        const auto& v = report["verdict"];
        auto yn = [&](const char* k) { return v[k].get<bool>() ? "yes" : "no"; };
        os << "  solves: " << yn("solves_metrizability") << " (D = " << v["d_residual"].dump()
           << ")\n";
        os << "  normal: " << yn("is_normal") << " (residual " << v["normality_residual"].dump()
           << ")\n";
        os << "  Einstein: " << yn("is_einstein") << " (residual " << v["einstein_residual"].dump()
           << ")\n";
        os << "  theorem consistent: "
           << (report["theorem_mt_consistent"].get<bool>() ? "yes" : "no") << "\n";
    }
    if (report.contains("correspondence")) {
        const auto& m = report["correspondence"];
        if (m.contains("algebraically_degenerate")) {
            os << "  correspondence unavailable: L(sigma) degenerate (zero scalar curvature)\n";
        } else {
            os << "  tau roundtrip residual = " << m["roundtrip_residual"].dump()
               << ", measured constant = " << m["tau_ratio_mean"].dump() << "\n";
            os << "  det L constant: " << (report["det_L"]["constant"].get<bool>() ? "yes" : "no")
               << "\n";
        }
    }
    return os.str();
}

} // namespace ptcalc
