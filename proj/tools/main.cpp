// Command-line front end: every operation of the library exposed as a
// subcommand with deterministic file outputs and a run manifest.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nibm/biorth.hpp"
#include "nibm/contour.hpp"
#include "nibm/density.hpp"
#include "nibm/parametrize.hpp"
#include "nibm/scaling.hpp"
#include "nibm/simulate.hpp"
#include "nibm/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nibm;

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

/// Collects outputs, writes them atomically (temp + rename), and emits the
/// manifest last. Outputs carry no timestamps, so identical parameters yield
/// byte-identical files including the manifest itself.
class RunWriter {
public:
    RunWriter(fs::path dir, std::string subcommand, json params)
        : dir_(std::move(dir)), subcommand_(std::move(subcommand)), params_(std::move(params)) {
        fs::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& contents) {
        const fs::path target = dir_ / name;
        const fs::path tmp = dir_ / (name + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            out << contents;
            if (!out) throw std::runtime_error("failed writing " + tmp.string());
        }
        fs::rename(tmp, target);
        json entry;
        entry["file"] = name;
        entry["bytes"] = contents.size();
        entry["fnv1a64"] = hex64(fnv1a64(contents));
        outputs_.push_back(entry);
    }

    void finish() {
        json m;
        m["schema_version"] = 1;
        m["tool"] = "nibm";
        m["tool_version"] = version_string;
        m["subcommand"] = subcommand_;
        m["params"] = params_;
        Tolerances tol;
        m["tolerances"] = {{"resid", tol.resid},       {"bp_scale", tol.bp_scale},
                           {"classify", tol.classify}, {"critical", tol.critical},
                           {"period", tol.period},     {"pole", tol.pole},
                           {"mass", tol.mass}};
        m["outputs"] = outputs_;
        write("manifest.json", m.dump(2) + "\n");
    }

private:
    fs::path dir_;
    std::string subcommand_;
    json params_;
    std::vector<json> outputs_;
};

json g_active_params; // included in error objects for machine consumption

json error_json(const Error& e) {
    json j;
    j["code"] = e.exit_code();
    j["name"] = e.code_name();
    j["message"] = e.what();
    j["params"] = g_active_params;
    return j;
}

/// --out wins; otherwise NIBM_OUT_DIR/<name>, otherwise ./<name>.
std::string resolve_out(const std::string& user_out, const std::string& default_name) {
    if (user_out != default_name) return user_out; // explicitly set
    if (const char* env = std::getenv("NIBM_OUT_DIR"))
        return (fs::path(env) / default_name).string();
    return user_out;
}

struct CurveArgs {
    double a = 0, b = 0, t = 0;
    std::string segments; // "x0,y0:x1,y1:count;..."
    std::string out = "out_curve";
};

struct DensityArgs {
    double a = 0, b = 0, t = 0;
    int nodes = 2048;
    bool check_edges = false;
    std::string out = "out_density";
};

struct KernelArgs {
    double a = 0, b = 0, t = 0;
    int n = 16;
    int precision = 0;
    std::string mode = "check";
    double x0 = 0;
    bool have_x0 = false;
    std::string edge = "z1";
    std::string n_list = "16,32,64";
    std::string grid_u = "-2:2:9";
    std::string grid_v;
    std::string out = "out_kernel";
};

struct SimArgs {
    double a = 0, b = 0, t = 0.5;
    int n = 4, steps = 500, count = 100, bins = 60, max_path_bundles = 50;
    std::uint64_t seed = 1;
    int threads = 0;
    std::string out = "out_simulate";
};

struct PhaseArgs {
    double a = 0, b = 0;
    int t_count = 199;
    double levelset_t = -1;
    int levelset_grid = 61;
    std::string out = "out_phase";
};

std::vector<double> parse_grid(const std::string& spec) {
    double lo, hi;
    int count;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 || count < 1)
        throw DomainError("bad grid spec '" + spec + "' (want lo:hi:count)");
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i)
        g[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return g;
}

std::vector<int> parse_int_list(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(tok));
    if (out.empty()) throw DomainError("empty list");
    return out;
}

int run_curve(const CurveArgs& args) {
    json p = {{"a", args.a}, {"b", args.b}, {"t", args.t}, {"segments", args.segments}};
    g_active_params = p;
    auto params = ModelParams::make(args.a, args.b, args.t);
    const auto bp = branch_points(params);

    RunWriter run(resolve_out(args.out, "out_curve"), "curve", p);

    json summary;
    summary["a"] = args.a;
    summary["b"] = args.b;
    summary["t"] = args.t;
    summary["separation"] = params.separation == Separation::Sub ? "sub" : "super";
    summary["regime"] = regime_name(bp.regime);
    summary["z1"] = bp.z1;
    summary["z2"] = bp.z2;
    summary["z3"] = bp.z3;
    if (params.separation == Separation::Sub) {
        summary["t_c1"] = params.t_c1;
        summary["t_c2"] = params.t_c2;
    }
    const auto disc = discriminant_coefficients(params);
    summary["sextic"] = {{"a3", disc.a3}, {"a2", disc.a2}, {"a1", disc.a1}, {"a0", disc.a0}};
    run.write("branch_points.json", summary.dump(2) + "\n");

    if (!args.segments.empty()) {
        std::ostringstream csv;
        csv << "segment,re_z,im_z";
        for (int j = 1; j <= 4; ++j) csv << ",re_xi" << j << ",im_xi" << j;
        csv << "\n";
        std::stringstream segs(args.segments);
        std::string seg;
        int seg_id = 0;
        while (std::getline(segs, seg, ';')) {
            double x0, y0, x1, y1;
            int count;
            if (std::sscanf(seg.c_str(), "%lf,%lf:%lf,%lf:%d", &x0, &y0, &x1, &y1, &count) != 5)
                throw DomainError("bad segment spec '" + seg + "'");
            std::vector<cplx> pts;
            for (int i = 0; i < count; ++i) {
                const double s = count == 1 ? 0.0 : double(i) / (count - 1);
                pts.emplace_back(x0 + s * (x1 - x0), y0 + s * (y1 - y0));
            }
            const auto frames = march_frames(pts, params, bp);
            for (const auto& f : frames) {
                csv << seg_id << ',' << fmt17(f.z.real()) << ',' << fmt17(f.z.imag());
                for (const auto& xi : f.xi)
                    csv << ',' << fmt17(xi.real()) << ',' << fmt17(xi.imag());
                csv << "\n";
            }
            ++seg_id;
        }
        run.write("xi_samples.csv", csv.str());
    }
    run.finish();
    return 0;
}

int run_density(const DensityArgs& args) {
    json p = {{"a", args.a},
              {"b", args.b},
              {"t", args.t},
              {"nodes", args.nodes},
              {"check_edges", args.check_edges}};
    g_active_params = p;
    auto params = ModelParams::make(args.a, args.b, args.t);
    RunWriter run(resolve_out(args.out, "out_density"), "density", p);

    const auto prof = density_profile(params, args.nodes);
    std::ostringstream csv;
    csv << "x,rho,h\n";
    for (std::size_t i = 0; i < prof.grid.size(); ++i)
        csv << fmt17(prof.grid[i]) << ',' << fmt17(prof.rho[i]) << ','
            << fmt17(prof.h_grid[i]) << "\n";
    run.write("density.csv", csv.str());

    json summary;
    summary["regime"] = regime_name(prof.bp.regime);
    if (params.separation == Separation::Super)
        summary["experimental"] = true; // unvalidated above the critical separation
    json support = json::array();
    for (const auto& [lo, hi] : prof.support) support.push_back({lo, hi});
    summary["support"] = support;
    summary["mass"] = prof.mass;
    summary["c1"] = prof.c1;
    if (prof.c2) summary["c2"] = *prof.c2;
    if (args.check_edges) {
        json edges = json::array();
        auto fit1 = edge_constant(Edge::z1, params);
        edges.push_back({{"edge", "z1"},
                         {"c", fit1.c},
                         {"exponent", fit1.exponent},
                         {"c_split", fit1.c_split}});
        if (prof.bp.regime == Regime::TwoCuts) {
            auto fit2 = edge_constant(Edge::z2, params);
            edges.push_back({{"edge", "z2"},
                             {"c", fit2.c},
                             {"exponent", fit2.exponent},
                             {"c_split", fit2.c_split}});
        }
        summary["edges"] = edges;
    }
    run.write("density_summary.json", summary.dump(2) + "\n");
    run.finish();
    return 0;
}

int run_kernel(const KernelArgs& args) {
    json p0 = {{"a", args.a}, {"b", args.b}, {"t", args.t}, {"n", args.n},
               {"mode", args.mode}};
    g_active_params = p0;
    auto params = ModelParams::make(args.a, args.b, args.t, args.n);
    json p = {{"a", args.a},
              {"b", args.b},
              {"t", args.t},
              {"n", args.n},
              {"precision", args.precision},
              {"mode", args.mode},
              {"x0", args.have_x0 ? json(args.x0) : json()},
              {"edge", args.edge},
              {"n_list", args.n_list},
              {"grid_u", args.grid_u},
              {"grid_v", args.grid_v}};
    g_active_params = p;
    RunWriter run(resolve_out(args.out, "out_kernel"), "kernel", p);
    const auto bp = branch_points(params);

    if (args.mode == "check") {
        BiorthogonalSystem sys(params, args.precision);
        const double X =
            bp.z1 + 10 * std::sqrt(params.s2() / args.n) * std::sqrt(2 * std::log(1e16));
        const double trace =
            adaptive_gl([&](double x) { return sys.kernel(x, x); }, -X, X, 1e-9, 1e-11);
        // reproducing property on a fixed 5x5 grid of (x, y) pairs
        const double span = bp.regime == Regime::TwoCuts ? bp.z1 - bp.z2 : 2 * bp.z1;
        const double lo = bp.regime == Regime::TwoCuts ? bp.z2 : -bp.z1;
        double worst = 0.0, scale = 0.0;
        for (int i = 1; i <= 5; ++i)
            for (int j = 1; j <= 5; ++j) {
                const double x = lo + span * i / 6.0, y = lo + span * j / 6.0;
                const double lhs = adaptive_gl(
                    [&](double s) { return sys.kernel(x, s) * sys.kernel(s, y); }, -X, X,
                    1e-9, 1e-11);
                const double k = sys.kernel(x, y);
                worst = std::max(worst, std::abs(lhs - k));
                scale = std::max(scale, std::abs(k));
            }
        json out;
        out["n"] = args.n;
        out["precision_bits"] = sys.precision_bits();
        out["trace"] = trace;
        out["trace_abs_err"] = std::abs(trace - args.n);
        out["reproducing_abs_resid"] = worst;
        out["reproducing_rel_resid"] = worst / scale;
        out["construction_residual"] = sys.construction_residual();
        run.write("kernel_check.json", out.dump(2) + "\n");
    } else if (args.mode == "diag") {
        std::vector<double> xs;
        const auto intervals = bp.regime == Regime::TwoCuts
                                   ? std::vector<std::pair<double, double>>{{-bp.z1, -bp.z2},
                                                                            {bp.z2, bp.z1}}
                                   : std::vector<std::pair<double, double>>{{-bp.z1, bp.z1}};
        for (const auto& [lo, hi] : intervals) {
            const int m = 64;
            for (int i = 1; i < m; ++i) {
                const double x = lo + (hi - lo) * i / m;
                if (std::abs(x) > 1e-3) xs.push_back(x);
            }
        }
        auto dcomp = diag_comparison(params, args.n, xs, args.precision);
        std::ostringstream csv;
        csv << "x,k_over_n,rho,abs_err\n";
        for (std::size_t i = 0; i < dcomp.x.size(); ++i)
            csv << fmt17(dcomp.x[i]) << ',' << fmt17(dcomp.k_over_n[i]) << ','
                << fmt17(dcomp.rho[i]) << ',' << fmt17(dcomp.abs_err[i]) << "\n";
        run.write("kernel_diag.csv", csv.str());
        json out = {{"n", args.n}, {"sup_abs_err", dcomp.sup_err}};
        run.write("kernel_diag_summary.json", out.dump(2) + "\n");
    } else if (args.mode == "bulk" || args.mode == "edge") {
        const auto u = parse_grid(args.grid_u);
        const auto v = args.grid_v.empty() ? u : parse_grid(args.grid_v);
        const auto ns = parse_int_list(args.n_list);
        ScalingReport rep;
        if (args.mode == "bulk") {
            const double x0 = args.have_x0 ? args.x0
                              : bp.regime == Regime::TwoCuts ? 0.5 * (bp.z1 + bp.z2)
                                                             : 0.5 * bp.z1;
            rep = bulk_scaling_check(x0, ns, u, v, params, args.precision);
        } else {
            ScalingEdge e;
            if (args.edge == "z1")
                e = ScalingEdge::PlusZ1;
            else if (args.edge == "-z1")
                e = ScalingEdge::MinusZ1;
            else if (args.edge == "z2")
                e = ScalingEdge::PlusZ2;
            else if (args.edge == "-z2")
                e = ScalingEdge::MinusZ2;
            else
                throw DomainError("unknown edge '" + args.edge + "'");
            rep = edge_scaling_check(e, ns, u, v, params, args.precision);
        }
        json out;
        out["mode"] = rep.mode;
        if (rep.mode == "edge") out["edge"] = rep.edge_id;
        out["x0"] = rep.x0;
        out["scale_constant"] = rep.scale_constant;
        out["n_list"] = rep.n_list;
        out["sup_errors"] = rep.sup_errors;
        out["rate"] = rep.rate;
        run.write("scaling_report.json", out.dump(2) + "\n");
        std::ostringstream csv;
        csv << "n,u,v,measured,reference\n";
        for (std::size_t k = 0; k < rep.n_list.size(); ++k)
            for (std::size_t i = 0; i < u.size(); ++i)
                for (std::size_t j = 0; j < v.size(); ++j)
                    csv << rep.n_list[k] << ',' << fmt17(u[i]) << ',' << fmt17(v[j]) << ','
                        << fmt17(rep.measured[k][i * v.size() + j]) << ','
                        << fmt17(rep.reference[i * v.size() + j]) << "\n";
        run.write("scaling_data.csv", csv.str());
    } else {
        throw DomainError("unknown kernel mode '" + args.mode + "'");
    }
    run.finish();
    return 0;
}

int run_simulate(const SimArgs& args) {
    json p = {{"a", args.a},
              {"b", args.b},
              {"t", args.t},
              {"n", args.n},
              {"steps", args.steps},
              {"count", args.count},
              {"seed", args.seed},
              {"bins", args.bins},
              {"max_path_bundles", args.max_path_bundles}};
    g_active_params = p;
    RunWriter run(resolve_out(args.out, "out_simulate"), "simulate", p);

    const auto ens = sample_ensemble(args.a, args.b, args.n, args.steps, args.count,
                                     args.seed, args.threads);

    std::ostringstream paths;
    paths << "bundle_id,path_id,time,position\n";
    const int emit = std::min<int>(args.max_path_bundles, int(ens.bundles.size()));
    for (int bidx = 0; bidx < emit; ++bidx)
        for (int path = 0; path < ens.n; ++path)
            for (int j = 0; j <= ens.m; ++j)
                paths << bidx << ',' << path << ',' << fmt17(ens.times[j]) << ','
                      << fmt17(ens.bundles[bidx][std::size_t(path) * (ens.m + 1) + j])
                      << "\n";
    run.write("paths.csv", paths.str());

    const double band = std::max(args.a, args.b) + 6.0 * std::sqrt(1.0 / args.n) + 1.0;
    const auto hist = marginal_histogram(ens, args.t, args.bins, -band, band);
    std::ostringstream hcsv;
    hcsv << "bin_left,bin_right,mass\n";
    for (std::size_t i = 0; i + 1 < hist.edges.size(); ++i)
        hcsv << fmt17(hist.edges[i]) << ',' << fmt17(hist.edges[i + 1]) << ','
             << fmt17(hist.mass[i]) << "\n";
    run.write("histogram.csv", hcsv.str());

    json meta;
    meta["a"] = args.a;
    meta["b"] = args.b;
    meta["t"] = args.t;
    meta["t_snapped"] = hist.t_snapped;
    meta["n"] = args.n;
    meta["steps"] = args.steps;
    meta["count"] = int(ens.bundles.size());
    meta["seed"] = args.seed;
    meta["acceptance_rate"] = ens.acceptance_rate;
    meta["proposals"] = ens.proposals;
    run.write("simulate_summary.json", meta.dump(2) + "\n");
    run.finish();
    return 0;
}

int run_phase(const PhaseArgs& args) {
    json p = {{"a", args.a},
              {"b", args.b},
              {"t_count", args.t_count},
              {"levelset_t", args.levelset_t},
              {"levelset_grid", args.levelset_grid}};
    g_active_params = p;
    RunWriter run(resolve_out(args.out, "out_phase"), "phase", p);

    const auto [tc1, tc2] = critical_times(args.a, args.b);
    std::ostringstream csv;
    csv << "t,z1,z2_or_0,z3,regime\n";
    for (int i = 1; i <= args.t_count; ++i) {
        const double t = double(i) / (args.t_count + 1);
        if (std::abs(t - tc1) < 2e-3 || std::abs(t - tc2) < 2e-3) continue;
        auto params = ModelParams::make(args.a, args.b, t);
        const auto bp = branch_points(params);
        csv << fmt17(t) << ',' << fmt17(bp.z1) << ','
            << fmt17(bp.regime == Regime::TwoCuts ? bp.z2 : 0.0) << ',' << fmt17(bp.z3)
            << ',' << regime_name(bp.regime) << "\n";
    }
    run.write("phase.csv", csv.str());

    json summary = {{"a", args.a}, {"b", args.b}, {"t_c1", tc1}, {"t_c2", tc2}};
    run.write("phase_summary.json", summary.dump(2) + "\n");

    if (args.levelset_t > 0) {
        auto params = ModelParams::make(args.a, args.b, args.levelset_t);
        LambdaCalculator lam(params);
        const auto& bp = lam.bp();
        const double R = 1.6 * std::max(bp.z1, bp.z3);
        std::ostringstream ls;
        ls << "re,im,re_lambda3_minus_lambda4\n";
        const int g = args.levelset_grid;
        for (int iy = 0; iy < g; ++iy)
            for (int ix = 0; ix < g; ++ix) {
                const cplx z(-R + 2 * R * ix / (g - 1.0), -R + 2 * R * iy / (g - 1.0));
                double val = std::nan("");
                try {
                    val = (lam.lambda(3, z) - lam.lambda(4, z)).real();
                } catch (const Error&) {
                    // points on cuts / excluded rays stay nan
                }
                ls << fmt17(z.real()) << ',' << fmt17(z.imag()) << ',' << fmt17(val) << "\n";
            }
        run.write("levelset.csv", ls.str());
    }
    run.finish();
    return 0;
}

int dispatch(const std::string& sub, const json& params);

int run_rerun(const std::string& manifest_path, const std::string& out_override) {
    std::ifstream in(manifest_path);
    if (!in) throw DomainError("cannot open manifest '" + manifest_path + "'");
    json m = json::parse(in);
    const std::string sub = m.at("subcommand");
    json params = m.at("params");
    if (!out_override.empty()) params["__out"] = out_override;
    return dispatch(sub, params);
}

int dispatch(const std::string& sub, const json& params) {
    const std::string out = params.contains("__out") ? params["__out"].get<std::string>() : "";
    if (sub == "curve") {
        CurveArgs a;
        a.a = params.at("a");
        a.b = params.at("b");
        a.t = params.at("t");
        a.segments = params.value("segments", "");
        if (!out.empty()) a.out = out;
        return run_curve(a);
    }
    if (sub == "density") {
        DensityArgs a;
        a.a = params.at("a");
        a.b = params.at("b");
        a.t = params.at("t");
        a.nodes = params.value("nodes", 2048);
        a.check_edges = params.value("check_edges", false);
        if (!out.empty()) a.out = out;
        return run_density(a);
    }
    if (sub == "kernel") {
        KernelArgs a;
        a.a = params.at("a");
        a.b = params.at("b");
        a.t = params.at("t");
        a.n = params.at("n");
        a.precision = params.value("precision", 0);
        a.mode = params.value("mode", "check");
        if (params.contains("x0") && !params["x0"].is_null()) {
            a.x0 = params["x0"];
            a.have_x0 = true;
        }
        a.edge = params.value("edge", "z1");
        a.n_list = params.value("n_list", "16,32,64");
        a.grid_u = params.value("grid_u", "-2:2:9");
        a.grid_v = params.value("grid_v", "");
        if (!out.empty()) a.out = out;
        return run_kernel(a);
    }
    if (sub == "simulate") {
        SimArgs a;
        a.a = params.at("a");
        a.b = params.at("b");
        a.t = params.at("t");
        a.n = params.at("n");
        a.steps = params.at("steps");
        a.count = params.at("count");
        a.seed = params.at("seed").get<std::uint64_t>();
        a.bins = params.value("bins", 60);
        a.max_path_bundles = params.value("max_path_bundles", 50);
        if (!out.empty()) a.out = out;
        return run_simulate(a);
    }
    if (sub == "phase") {
        PhaseArgs a;
        a.a = params.at("a");
        a.b = params.at("b");
        a.t_count = params.value("t_count", 199);
        a.levelset_t = params.value("levelset_t", -1.0);
        a.levelset_grid = params.value("levelset_grid", 61);
        if (!out.empty()) a.out = out;
        return run_phase(a);
    }
    throw DomainError("unknown subcommand in manifest: " + sub);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral-curve, density, finite-n kernel and path-sampling "
                 "laboratory for two pinned groups of mutually avoiding bridges"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = auto)");

    CurveArgs curve;
    auto* c = app.add_subcommand("curve", "branch points, regime, branch samples");
    c->add_option("--a", curve.a)->required();
    c->add_option("--b", curve.b)->required();
    c->add_option("--t", curve.t)->required();
    c->add_option("--grid", curve.segments,
                  "segments 'x0,y0:x1,y1:count;...' to sample the four branches on");
    c->add_option("--out", curve.out);

    DensityArgs density;
    auto* d = app.add_subcommand("density", "limiting density profile and edges");
    d->add_option("--a", density.a)->required();
    d->add_option("--b", density.b)->required();
    d->add_option("--t", density.t)->required();
    d->add_option("--nodes", density.nodes);
    d->add_flag("--check-edges", density.check_edges);
    d->add_option("--out", density.out);

    KernelArgs kernel;
    auto* k = app.add_subcommand("kernel", "finite-n kernel checks and scaling reports");
    k->add_option("--a", kernel.a)->required();
    k->add_option("--b", kernel.b)->required();
    k->add_option("--t", kernel.t)->required();
    k->add_option("--n", kernel.n)->required();
    k->add_option("--precision", kernel.precision);
    k->add_option("--mode", kernel.mode)
        ->check(CLI::IsMember({"diag", "bulk", "edge", "check"}));
    auto* x0opt = k->add_option("--x0", kernel.x0);
    k->add_option("--edge", kernel.edge);
    k->add_option("--n-list", kernel.n_list);
    k->add_option("--grid-u", kernel.grid_u);
    k->add_option("--grid-v", kernel.grid_v);
    k->add_option("--out", kernel.out);

    SimArgs sim;
    auto* s = app.add_subcommand("simulate", "sample non-crossing bridge ensembles");
    s->add_option("--a", sim.a)->required();
    s->add_option("--b", sim.b)->required();
    s->add_option("--t", sim.t)->required();
    s->add_option("--n", sim.n)->required();
    s->add_option("--steps", sim.steps);
    s->add_option("--count", sim.count);
    s->add_option("--seed", sim.seed);
    s->add_option("--bins", sim.bins);
    s->add_option("--max-path-bundles", sim.max_path_bundles);
    s->add_option("--out", sim.out);

    PhaseArgs phase;
    auto* ph = app.add_subcommand("phase", "regime sweep over t and level-set samples");
    ph->add_option("--a", phase.a)->required();
    ph->add_option("--b", phase.b)->required();
    ph->add_option("--t-grid", phase.t_count);
    ph->add_option("--levelset-t", phase.levelset_t);
    ph->add_option("--levelset-grid", phase.levelset_grid);
    ph->add_option("--out", phase.out);

    std::string manifest_path, rerun_out;
    auto* rr = app.add_subcommand("rerun", "re-execute a recorded manifest");
    rr->add_option("--manifest", manifest_path)->required();
    rr->add_option("--out", rerun_out);

    CLI11_PARSE(app, argc, argv);
    sim.threads = threads;

    try {
        if (app.got_subcommand(c)) return run_curve(curve);
        if (app.got_subcommand(d)) return run_density(density);
        if (app.got_subcommand(k)) {
            kernel.have_x0 = x0opt->count() > 0;
            return run_kernel(kernel);
        }
        if (app.got_subcommand(s)) return run_simulate(sim);
        if (app.got_subcommand(ph)) return run_phase(phase);
        if (app.got_subcommand(rr)) return run_rerun(manifest_path, rerun_out);
    } catch (const Error& e) {
        std::fprintf(stderr, "%s\n", error_json(e).dump().c_str());
        return e.exit_code();
    } catch (const std::exception& e) {
        json j = {{"code", 3}, {"name", "Internal"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", j.dump().c_str());
        return 3;
    }
    return 0;
}
