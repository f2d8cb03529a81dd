// tmbumps: blow-up analysis toolkit for Delta u = lambda f u e^{u^2} on
// planar domains.  Subcommands: bubble, green, locate, branch, verify,
// replay.  Exit codes: 0 ok, 2 usage, 3 numerics, 4 non-convergence,
// 5 acceptance failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tmbumps/bubble.hpp"
#include "tmbumps/config.hpp"
#include "tmbumps/errors.hpp"
#include "tmbumps/greenfn.hpp"
#include "tmbumps/io.hpp"
#include "tmbumps/manifest.hpp"
#include "tmbumps/radial.hpp"
#include "tmbumps/verify.hpp"

namespace {

using namespace tmbumps;

int resolve_threads(int flag_value) {
    if (const char* env = std::getenv("TMBUMPS_THREADS")) {
        try {
            return std::max(1, std::stoi(env));
        } catch (...) {
            throw Error("TMBUMPS_THREADS is not an integer");
        }
    }
    return std::max(1, flag_value);
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path);
    return f;
}

config::WeightField parse_field(const std::string& spec, RunManifest& man) {
    if (spec == "const" || spec == "const:1") return config::WeightField::constant(1.0);
    if (spec.rfind("const:", 0) == 0)
        return config::WeightField::constant(std::stod(spec.substr(6)));
    if (spec.rfind("expr:", 0) == 0)
        return config::WeightField::from_expression(spec.substr(5));
    if (spec.rfind("file:", 0) == 0) {
        const std::string path = spec.substr(5);
        std::ifstream f(path);
        if (!f) throw Error("cannot open field expression file: " + path);
        std::string line, src;
        while (std::getline(f, line)) {
            const auto h = line.find('#');
            if (h != std::string::npos) line.erase(h);
            src += line + " ";
        }
        man.hash_input(path);
        return config::WeightField::from_expression(src);
    }
    throw Error("field spec must be const[:V], expr:EXPR or file:PATH (got '" + spec + "')");
}

greenfn::DomainSpec load_domain(const std::string& path, RunManifest& man) {
    if (path.empty()) return greenfn::DomainSpec::disk(1.0);
    auto d = greenfn::DomainSpec::read_file(path);
    man.hash_input(path);
    return d;
}

std::vector<double> parse_gammas(const std::string& spec) {
    // "a:b:step" inclusive sweep, or comma list "4,5.5,8"
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        const auto c1 = spec.find(':'), c2 = spec.find(':', c1 + 1);
        if (c2 == std::string::npos) throw Error("gammas: expected a:b:step");
        const double a = std::stod(spec.substr(0, c1));
        const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        const double st = std::stod(spec.substr(c2 + 1));
        if (!(st > 0)) throw Error("gammas: step must be positive");
        for (double g = a; g <= b + 1e-12; g += st) out.push_back(g);
    } else {
        std::size_t pos = 0;
        while (pos < spec.size()) {
            auto comma = spec.find(',', pos);
            if (comma == std::string::npos) comma = spec.size();
            out.push_back(std::stod(spec.substr(pos, comma - pos)));
            pos = comma + 1;
        }
    }
    if (out.empty()) throw Error("gammas: empty sweep");
    return out;
}

// ---------------------------------------------------------------------------

int cmd_bubble(double gamma, double kappa, double t_max, double tol, const std::string& out) {
    RunManifest man;
    man.command = "bubble";
    man.add_flag("gamma", io::fmt17(gamma));
    man.add_flag("kappa", io::fmt17(kappa));
    man.add_flag("t_max", io::fmt17(t_max));
    man.add_flag("tol", io::fmt17(tol));
    man.add_flag("out", out);
    man.timestamp = iso8601_now();

    bubble::BubbleParams params(gamma, kappa);
    if (t_max <= 0) t_max = gamma * gamma;
    auto prof = bubble::integrate_bubble(params, t_max, tol);

    auto csv = open_out(out + ".csv");
    prof.table.write_csv(csv);

    // expansion error report for the Claims A.3-A.5 regressions
    const double g = gamma;
    double a4 = 0, a5 = 0, a3 = 0;
    const double t_hi = prof.zero_crossing_t ? *prof.zero_crossing_t : t_max;
    const double t_a3 = std::min(t_hi, g * g - 5.0 * std::log(g));
    for (int k = 1; k <= 400; ++k) {
        const double t = t_hi * k / 400.0;
        a4 = std::max(a4, std::abs(prof.value_at(t) - (g - t / g - t / (g * g * g))));
        a5 = std::max(a5, std::abs(prof.t_slope_at(t) + 1.0 / g));
        if (t <= t_a3) {
            const double three = bubble::bubble_expansion(params, t, bubble::ExpansionOrder::three_term);
            const double denom = t / std::pow(g, 5) + 1.0 / (g * g);
            a3 = std::max(a3, std::abs(three - prof.value_at(t)) / denom);
        }
    }
    auto rep = open_out(out + ".report.json");
    io::JsonWriter w(rep);
    w.begin_object();
    w.field("gamma", gamma);
    w.field("kappa", kappa);
    w.field("mu", params.mu);
    w.field("t_max", t_max);
    w.field("zero_crossing_t", prof.zero_crossing_t ? *prof.zero_crossing_t : std::nan(""));
    w.field("claimA4_scaled_err", a4 * g * g);
    w.field("claimA5_scaled_err", a5 * g * g);
    w.field("claimA3_scaled_err", a3);
    w.field("rows", static_cast<long>(prof.table.grid.size()));
    w.end_object();
    rep << '\n';

    man.write(out + ".manifest.json");
    return 0;
}

int cmd_green(const std::string& domain_file, const std::string& backend, double xx, double xy,
              double yx, double yy, const std::string& out) {
    RunManifest man;
    man.command = "green";
    man.add_flag("domain", domain_file);
    man.add_flag("backend", backend);
    man.add_flag("x", io::fmt17(xx) + "," + io::fmt17(xy));
    man.add_flag("y", io::fmt17(yx) + "," + io::fmt17(yy));
    man.add_flag("out", out);
    man.timestamp = iso8601_now();

    auto dom = load_domain(domain_file, man);
    const auto be = backend == "disk" ? greenfn::Backend::closed_form_disk
                                      : greenfn::Backend::harmonic_collocation;
    greenfn::GreenEvaluator eval(dom, be);
    const Vec2 x{xx, xy}, y{yx, yy};

    auto f = open_out(out);
    io::JsonWriter w(f);
    w.begin_object();
    w.field("green", eval.green(x, y));
    w.field("regular_part", eval.regular_part(x, y));
    const Vec2 gg = eval.grad_green(x, y);
    w.begin_array("grad_green").element(gg.x).element(gg.y).end_array();
    const Vec2 gh = eval.grad_diag_regular_part(x);
    w.begin_array("grad_diag_regular_part").element(gh.x).element(gh.y).end_array();
    if (be == greenfn::Backend::harmonic_collocation) {
        std::ostringstream diag;
        eval.diagnostics().write_json(diag);
        w.raw_field("diagnostics", diag.str());
    }
    w.end_object();
    f << '\n';
    man.write(out + ".manifest.json");
    return 0;
}

int cmd_locate(const std::string& domain_file, const std::string& field_spec, int n,
               const std::string& init, unsigned long seed, double tol, const std::string& out) {
    RunManifest man;
    man.command = "locate";
    man.add_flag("domain", domain_file);
    man.add_flag("field", field_spec);
    man.add_flag("n", std::to_string(n));
    man.add_flag("init", init);
    man.add_flag("seed", std::to_string(seed));
    man.add_flag("tol", io::fmt17(tol));
    man.add_flag("out", out);
    man.seed = seed;
    man.timestamp = iso8601_now();

    auto dom = load_domain(domain_file, man);
    auto field = parse_field(field_spec, man);
    const auto backend = dom.kind == greenfn::DomainSpec::Kind::disk
                             ? greenfn::Backend::closed_form_disk
                             : greenfn::Backend::harmonic_collocation;
    greenfn::GreenEvaluator green(dom, backend);

    config::Configuration start;
    if (init == "random" || init.empty()) {
        std::mt19937_64 rng(seed);
        const Vec2 c = dom.centroid();
        const double scale = 0.5 * dom.diameter();
        std::uniform_real_distribution<double> U(-scale, scale);
        const double gap = 0.05 * dom.diameter();
        int guard = 0;
        while (static_cast<int>(start.points.size()) < n) {
            if (++guard > 100000) throw Error("locate: could not draw interior points");
            Vec2 p = c + Vec2{U(rng), U(rng)};
            if (!dom.contains(p) || dom.boundary_distance(p) < 0.05 * scale) continue;
            bool ok = true;
            for (Vec2 q : start.points)
                if (dist(p, q) < gap) ok = false;
            if (!ok) continue;
            start.points.push_back(p);
            start.masses.push_back(1.0);
        }
    } else {
        start = config::Configuration::read_json_file(init);
        man.hash_input(init);
    }

    config::SolveOptions opts;
    opts.tol = tol;
    auto result = config::solve_configuration(start, field, green, opts);

    auto cfg_out = open_out(out);
    result.config.write_json(cfg_out);
    auto rep_out = open_out(out + ".residual.json");
    result.report.write_json(rep_out);
    man.write(out + ".manifest.json");
    return 0;
}

int cmd_branch(const std::string& gammas_spec, double tol, int threads, const std::string& out) {
    RunManifest man;
    man.command = "branch";
    man.add_flag("gammas", gammas_spec);
    man.add_flag("tol", io::fmt17(tol));
    man.add_flag("threads", std::to_string(threads));
    man.add_flag("out", out);
    man.timestamp = iso8601_now();

    const auto gammas = parse_gammas(gammas_spec);
    auto table = radial::trace_branch(gammas, tol, resolve_threads(threads));
    auto f = open_out(out);
    table.write_csv(f);
    man.write(out + ".manifest.json");
    return 0;
}

int cmd_verify(const std::string& suite, int threads, const std::string& out) {
    RunManifest man;
    man.command = "verify";
    man.add_flag("suite", suite);
    man.add_flag("threads", std::to_string(threads));
    man.add_flag("out", out);
    man.timestamp = iso8601_now();

    const auto records = verify::run_suite(suite, resolve_threads(threads));
    for (const auto& r : records) {
        std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << "  value=" << io::fmt17(r.value)
                  << " threshold=" << io::fmt17(r.threshold) << "  (" << io::fmt17(r.runtime_s)
                  << " s)\n";
        if (!r.detail.empty()) std::cout << "       " << r.detail << "\n";
    }
    if (!out.empty()) {
        auto f = open_out(out);
        verify::write_json(records, f);
        man.write(out + ".manifest.json");
    }
    return verify::all_passed(records) ? 0 : 5;
}

int dispatch(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path) {
    const auto man = RunManifest::read(manifest_path);
    std::vector<std::string> args{man.command};
    for (const auto& [k, v] : man.flags) {
        if (v.empty()) continue;
        args.push_back("--" + k);
        args.push_back(v);
    }
    return dispatch(args);
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"blow-up analysis toolkit for Delta u = lambda f u e^{u^2}"};
    app.require_subcommand(1);

    // bubble
    auto* sb = app.add_subcommand("bubble", "integrate the standard bubble and report expansion errors");
    double gamma = 6.0, kappa = 1.0, t_max = 0.0, btol = 1e-10;
    std::string bout = "bubble_out";
    sb->add_option("--gamma", gamma, "peak height (>= 1)");
    sb->add_option("--kappa", kappa, "lambda * f(0)");
    sb->add_option("--t-max,--t_max", t_max, "end of the t range (default gamma^2)");
    sb->add_option("--tol", btol, "integrator tolerance");
    sb->add_option("--out", bout, "output prefix");

    // green
    auto* sg = app.add_subcommand("green", "evaluate the Dirichlet Green function");
    std::string gdom, gback = "disk", gout = "green_out.json";
    double gx = 0.5, gy = 0.0, gyx = 0.0, gyy = 0.0;
    sg->add_option("--domain", gdom, "domain file (default unit disk)");
    sg->add_option("--backend", gback, "disk|mfs");
    sg->add_option("--x", gx, "x point, first coordinate");
    sg->add_option("--xy", gy, "x point, second coordinate");
    sg->add_option("--y", gyx, "y point, first coordinate");
    sg->add_option("--yy", gyy, "y point, second coordinate");
    sg->add_option("--out", gout, "output JSON path");

    // locate
    auto* sl = app.add_subcommand("locate", "solve the concentration-point location system");
    std::string ldom, lfield = "const", linit = "random", lout = "locate_out.json";
    int ln = 1;
    unsigned long lseed = 1;
    double ltol = 1e-10;
    sl->add_option("--domain", ldom, "domain file (default unit disk)");
    sl->add_option("--field", lfield, "const[:V] | expr:EXPR | file:PATH");
    sl->add_option("--n", ln, "number of concentration points");
    sl->add_option("--init", linit, "random | configuration JSON file");
    sl->add_option("--seed", lseed, "RNG seed for random init");
    sl->add_option("--tol", ltol, "residual tolerance");
    sl->add_option("--out", lout, "output JSON path");

    // branch
    auto* sr = app.add_subcommand("branch", "trace the radial solution family on the unit disk");
    std::string rgammas = "4:8:1", rout = "branch_out.csv";
    double rtol = 1e-12;
    int rthreads = 1;
    sr->add_option("--gammas", rgammas, "sweep a:b:step or comma list");
    sr->add_option("--tol", rtol, "shooting tolerance");
    sr->add_option("--threads", rthreads, "parallel shoots (TMBUMPS_THREADS overrides)");
    sr->add_option("--out", rout, "output CSV path");

    // verify
    auto* sv = app.add_subcommand("verify", "run the acceptance suite");
    std::string vsuite = "all", vout = "verify_out.json";
    int vthreads = 1;
    sv->add_option("--suite", vsuite, "bubble|green|location|quantization|all");
    sv->add_option("--threads", vthreads, "parallel sweeps (TMBUMPS_THREADS overrides)");
    sv->add_option("--out", vout, "output JSON path ('' to skip)");

    // replay
    auto* sp = app.add_subcommand("replay", "re-run a command from its manifest");
    std::string pman;
    sp->add_option("manifest", pman, "manifest JSON path")->required();

    std::vector<const char*> argv;
    argv.push_back("tmbumps");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    if (sb->parsed()) return cmd_bubble(gamma, kappa, t_max, btol, bout);
    if (sg->parsed()) return cmd_green(gdom, gback, gx, gy, gyx, gyy, gout);
    if (sl->parsed()) return cmd_locate(ldom, lfield, ln, linit, lseed, ltol, lout);
    if (sr->parsed()) return cmd_branch(rgammas, rtol, rthreads, rout);
    if (sv->parsed()) return cmd_verify(vsuite, vthreads, vout);
    if (sp->parsed()) return cmd_replay(pman);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return dispatch(args);
    } catch (const tmbumps::ParseError& e) {
        std::cerr << "error: " << e.what() << " (line " << e.line << ")\n";
        return 2;
    } catch (const tmbumps::NonConvergence& e) {
        std::cerr << "error: " << e.what() << " (best residual " << e.best_residual << ")\n";
        return 4;
    } catch (const tmbumps::BoundaryEscape& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const tmbumps::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
