// Experiment runner: spectra, plateau2d, equivariant, leaf, approx, plot.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include "cmclab/cone.hpp"
#include "cmclab/equivariant.hpp"
#include "cmclab/errors.hpp"
#include "cmclab/grid.hpp"
#include "cmclab/io.hpp"
#include "cmclab/mincut.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cmclab;

namespace {

constexpr int kSchemaVersion = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string out_dir = ".";
    std::uint64_t seed = 0;
};

json envelope(const std::string& command, json config, const Common& common)
{
    config["seed"] = common.seed;
    return json{{"schema_version", kSchemaVersion}, {"command", command}, {"config", std::move(config)}};
}

fs::path out_path(const Common& common, const std::string& name)
{
    fs::create_directories(common.out_dir);
    return fs::path(common.out_dir) / name;
}

void emit_json(const json& j, const Common& common, const std::string& file)
{
    const std::string text = j.dump(2) + "\n";
    write_file_atomic(out_path(common, file), text);
    std::cout << text;
}

std::size_t thread_count()
{
    if (const char* env = std::getenv("CMC_LAB_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1) throw UsageError("CMC_LAB_THREADS must be a positive integer");
        return static_cast<std::size_t>(v);
    }
    return 1;
}

// Runs jobs[0..n) on up to CMC_LAB_THREADS workers; results are stored by index.
void run_parallel(std::size_t n, const std::function<void(std::size_t)>& job)
{
    const std::size_t workers = std::min(thread_count(), std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto loop = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
    loop();
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

std::string csv_real(double v)
{
    return format_real(v);
}

// ---------------------------------------------------------------------------

struct SpectraArgs {
    int p = 3;
    int q = 3;
    int kmax = 1;
    bool csv = false;
};

int run_spectra(const SpectraArgs& a, const Common& common)
{
    const CliffordCone cone = make_cone(a.p, a.q);
    const SpectralData sd = link_spectrum(cone, a.kmax);
    if (a.csv) {
        std::ostringstream os;
        os << "index,eigenvalue,multiplicity\n";
        for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i)
            os << i << ',' << csv_real(sd.eigenvalues[i]) << ',' << sd.multiplicities[i] << '\n';
        write_file_atomic(out_path(common, "spectra.csv"), os.str());
        std::cout << os.str();
        return 0;
    }
    json j = envelope("spectra", {{"p", a.p}, {"q", a.q}, {"kmax", a.kmax}}, common);
    j["n"] = cone.n;
    j["A2"] = cone.A2;
    j["lambda1"] = sd.eigenvalues.front();
    j["eigenvalues"] = sd.eigenvalues;
    j["multiplicities"] = sd.multiplicities;
    j["stable"] = sd.stable;
    j["gamma"] = sd.stable ? json::array({sd.gamma_minus, sd.gamma_plus}) : json(nullptr);
    emit_json(j, common, "spectra.json");
    return 0;
}

// ---------------------------------------------------------------------------

struct PlateauArgs {
    std::vector<double> lambdas;
    std::string problem;
    double radius = 1.0;
    int resolution = 16;
    int dim = 2;
    std::string stencil = "crofton";
};

int run_plateau(const PlateauArgs& a, const Common& common)
{
    if (!a.problem.empty()) {
        if (!a.lambdas.empty()) throw UsageError("--lambda and --problem are mutually exclusive");
        const json doc = json::parse(read_file(a.problem), nullptr, false);
        if (doc.is_discarded()) throw UsageError("problem file is not valid JSON");
        const MinCutProblem problem = problem_from_json(doc);
        const MinimizerResult res = solve(problem);
        save_cellset(out_path(common, "plateau_min.cmcgrid"), res.set_min);
        save_cellset(out_path(common, "plateau_max.cmcgrid"), res.set_max);
        json j = envelope("plateau2d", {{"problem", doc}}, common);
        j["result"] = result_summary(res);
        j["files"] = {"plateau_min.cmcgrid", "plateau_max.cmcgrid"};
        emit_json(j, common, "plateau2d.json");
        return 0;
    }
    if (a.lambdas.empty()) throw UsageError("plateau2d needs --lambda or --problem");
    if (a.dim != 2 && a.dim != 3) throw UsageError("--dim must be 2 or 3");
    const Stencil st = stencil_from_string(a.stencil);
    if (a.resolution < 8) throw UsageError("--resolution must be >= 8");
    const ObstacleSetup setup = make_obstacle_setup(a.dim, a.radius, a.resolution, st);

    std::vector<ThresholdRow> rows(a.lambdas.size());
    run_parallel(rows.size(), [&](std::size_t i) { rows[i] = threshold_row(setup, a.lambdas[i]); });

    json j = envelope("plateau2d",
                      {{"lambda", a.lambdas},
                       {"radius", a.radius},
                       {"resolution", a.resolution},
                       {"dim", a.dim},
                       {"stencil", a.stencil}},
                      common);
    j["circumference"] = obstacle_circumference(setup);
    json out = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string file = "plateau_" + std::to_string(i) + ".cmcgrid";
        save_cellset(out_path(common, file), rows[i].set_max);
        out.push_back({{"lambda", rows[i].lambda},
                       {"filled", rows[i].filled},
                       {"contact_excess", rows[i].contact_excess},
                       {"energy", rows[i].energy},
                       {"unique", rows[i].unique},
                       {"file", file}});
    }
    j["rows"] = out;
    emit_json(j, common, "plateau2d.json");
    return 0;
}

// ---------------------------------------------------------------------------

struct EquivariantArgs {
    int p = 3;
    int q = 3;
    int n = 64;
    double box = 2.0;
    double lambda = 0.0;
    double radius = 1.0;
    std::string boundary;
};

int run_equivariant(const EquivariantArgs& a, const Common& common)
{
    const GridPtr grid = make_quadrant_grid(a.n, a.box);
    CellSet boundary;
    if (a.boundary.empty()) {
        boundary = cone_wedge(grid, a.p, a.q);
    } else {
        boundary = load_cellset(a.boundary);
        require_same_grid(grid, boundary.grid());
    }
    const MinimizerResult res = weighted_minimize(a.p, a.q, grid, a.lambda, boundary, a.radius);
    save_cellset(out_path(common, "equivariant.cmcgrid"), res.set_max);

    json j = envelope("equivariant",
                      {{"p", a.p},
                       {"q", a.q},
                       {"n", a.n},
                       {"box", a.box},
                       {"lambda", a.lambda},
                       {"radius", a.radius},
                       {"boundary", a.boundary.empty() ? "cone_wedge" : a.boundary}},
                      common);
    j["result"] = result_summary(res);
    j["weighted_volume"] = weighted_volume(res.set_max, a.p, a.q);
    j["min_origin_distance"] = min_origin_distance(res.set_max);
    if (a.p >= 1 && a.q >= 1)
        j["cone_deviation"] = interface_deviation(res.set_max, make_cone(a.p, a.q), 0.25 * a.radius, 0.9 * a.radius);
    j["file"] = "equivariant.cmcgrid";
    emit_json(j, common, "equivariant.json");
    return 0;
}

// ---------------------------------------------------------------------------

struct LeafArgs {
    int p = 3;
    int q = 3;
    double s0 = 1.0;
    double rmax = 100.0;
    double step = 0.01;
    std::string side = "below";
    std::string csv;
};

int run_leaf(const LeafArgs& a, const Common& common)
{
    if (a.side != "above" && a.side != "below") throw UsageError("--side must be 'above' or 'below'");
    LeafOptions opts;
    opts.r_max = a.rmax;
    opts.sample_step = a.step;
    const ProfileCurve c = shoot_leaf(a.p, a.q, a.s0, a.side == "above" ? LeafSide::Above : LeafSide::Below, opts);

    std::ostringstream os;
    os << "s,x,y,curvature_residual\n";
    double worst = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        os << csv_real(c.arclength[i]) << ',' << csv_real(c.points[i][0]) << ',' << csv_real(c.points[i][1]) << ',';
        if (i > 0 && i + 1 < c.size()) {
            const double h = profile_mean_curvature(c, i);
            worst = std::max(worst, std::abs(h));
            os << csv_real(h);
        }
        os << '\n';
    }
    if (!a.csv.empty()) {
        write_file_atomic(out_path(common, a.csv), os.str());
    }

    const CliffordCone cone = make_cone(a.p, a.q);
    json j = envelope("leaf",
                      {{"p", a.p}, {"q", a.q}, {"s0", a.s0}, {"rmax", a.rmax}, {"step", a.step}, {"side", a.side},
                       {"csv", a.csv}},
                      common);
    j["samples"] = c.size();
    j["max_curvature_residual"] = worst;
    try {
        const DecayFit fit = fit_decay_exponent(c, cone);
        j["decay"] = {{"gamma_fit", fit.gamma_fit}, {"matched", to_string(fit.matched)}, {"r_lo", fit.r_lo},
                      {"r_hi", fit.r_hi}};
    } catch (const PreconditionError& e) {
        j["decay"] = {{"skipped", e.what()}};
    }
    if (a.csv.empty()) {
        std::cout << os.str();
        write_file_atomic(out_path(common, "leaf.json"), j.dump(2) + "\n");
    } else {
        emit_json(j, common, "leaf.json");
    }
    return 0;
}

// ---------------------------------------------------------------------------

int run_approx(const std::string& config_path, const Common& common)
{
    const json cfg = json::parse(read_file(config_path), nullptr, false);
    if (cfg.is_discarded()) throw UsageError("config is not valid JSON");
    reject_unknown_keys(cfg, {"p", "q", "lambda", "grid", "t_list", "annulus", "obstacle_r"}, "approx config");
    for (const char* key : {"p", "q", "lambda", "grid", "t_list"}) {
        if (!cfg.contains(key)) throw UsageError(std::string("approx config: missing key '") + key + "'");
    }
    ApproxParams params;
    int n = 0;
    double box = 0;
    std::string stencil = "crofton";
    std::vector<double> t_list;
    try {
        params.p = cfg.at("p").get<int>();
        params.q = cfg.at("q").get<int>();
        params.lambda = cfg.at("lambda").get<double>();
        const json& g = cfg.at("grid");
        reject_unknown_keys(g, {"n", "box", "stencil"}, "approx config 'grid'");
        n = g.at("n").get<int>();
        box = g.at("box").get<double>();
        if (g.contains("stencil")) stencil = g.at("stencil").get<std::string>();
        if (!cfg.at("t_list").is_array()) throw UsageError("approx config: 't_list' must be an array");
        t_list = cfg.at("t_list").get<std::vector<double>>();
        params.obstacle_r = cfg.value("obstacle_r", 0.5 * box);
        if (cfg.contains("annulus")) {
            const auto ann = cfg.at("annulus").get<std::vector<double>>();
            if (ann.size() != 2) throw UsageError("approx config: 'annulus' must be [r_lo, r_hi]");
            params.annulus_lo = ann[0];
            params.annulus_hi = ann[1];
        } else {
            params.annulus_lo = 0.5 * params.obstacle_r;
            params.annulus_hi = 1.5 * params.obstacle_r;
        }
    } catch (const json::exception& e) {
        throw UsageError(std::string("approx config: ") + e.what());
    }
    if (t_list.empty()) throw UsageError("approx config: 't_list' is empty");

    const GridPtr grid = make_quadrant_grid(n, box, stencil_from_string(stencil));
    const MinimizerResult base_res =
        weighted_minimize(params.p, params.q, grid, params.lambda, cone_wedge(grid, params.p, params.q),
                          params.obstacle_r);
    const CellSet& base = base_res.set_max;
    const ApproxRunReport rep = approximation_sequence(params, base, t_list);

    save_cellset(out_path(common, "approx_base.cmcgrid"), base);
    json j = envelope("approx", cfg, common);
    j["h"] = grid->spacing();
    j["base_origin_distance"] = rep.base_origin_distance;
    j["base_file"] = "approx_base.cmcgrid";
    json steps = json::array();
    for (std::size_t k = 0; k < rep.steps.size(); ++k) {
        const ApproxStep& s = rep.steps[k];
        const std::string file = "approx_step_" + std::to_string(k) + ".cmcgrid";
        save_cellset(out_path(common, file), s.set);
        steps.push_back({{"t", s.t},
                         {"inclusion_ok", s.inclusion_ok},
                         {"nested_ok", s.nested_ok},
                         {"sym_diff_volume", s.sym_diff_volume},
                         {"hausdorff_to_E", s.hausdorff_to_E},
                         {"min_origin_distance", s.min_origin_distance},
                         {"singular_proxy_flag", s.singular_proxy_flag},
                         {"energy", s.energy},
                         {"unique", s.unique},
                         {"file", file}});
    }
    j["steps"] = steps;
    emit_json(j, common, "approx.json");
    return 0;
}

// ---------------------------------------------------------------------------

struct Segment {
    double x0, y0, x1, y1;
};

struct Bounds {
    double x0 = 0, y0 = 0, x1 = 1, y1 = 1;
};

std::string svg_document(const Bounds& b, const std::vector<std::string>& paths)
{
    std::ostringstream os;
    const double w = b.x1 - b.x0;
    const double h = b.y1 - b.y0;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << format_real(b.x0) << ' ' << format_real(-b.y1)
       << ' ' << format_real(w) << ' ' << format_real(h) << "\">\n";
    for (const auto& d : paths)
        os << "<path fill=\"none\" stroke=\"black\" stroke-width=\"" << format_real(std::max(w, h) / 400) << "\" d=\""
           << d << "\"/>\n";
    os << "</svg>\n";
    return os.str();
}

std::string pt(double x, double y)
{
    // SVG y grows downward; flip so the picture matches the math orientation.
    return format_real(x) + ' ' + format_real(-y);
}

std::string plot_cellset(const CellSet& d)
{
    const auto& g = *d.grid();
    if (g.dim() != 2) throw UsageError("plot supports 2-D cell sets only");
    const int nx = g.extents()[0];
    const int ny = g.extents()[1];
    const double h = g.spacing();
    // Corner lattice (i, j) maps to origin - h/2 + (i, j) h.
    auto corner = [&](int i, int j) { return static_cast<std::size_t>(i) * (ny + 1) + static_cast<std::size_t>(j); };
    std::vector<std::array<int, 4>> segs;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            const bool in = d.contains(g.index({i, j, 0}));
            if (i + 1 < nx && in != d.contains(g.index({i + 1, j, 0}))) segs.push_back({i + 1, j, i + 1, j + 1});
            if (j + 1 < ny && in != d.contains(g.index({i, j + 1, 0}))) segs.push_back({i, j + 1, i + 1, j + 1});
        }
    }
    std::vector<std::size_t> parent(static_cast<std::size_t>(nx + 1) * (ny + 1));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const auto& s : segs) parent[find(corner(s[0], s[1]))] = find(corner(s[2], s[3]));

    std::map<std::size_t, std::string> paths;
    const double ox = g.origin()[0] - 0.5 * h;
    const double oy = g.origin()[1] - 0.5 * h;
    for (const auto& s : segs) {
        std::string& d_attr = paths[find(corner(s[0], s[1]))];
        if (!d_attr.empty()) d_attr.push_back(' ');
        d_attr += "M " + pt(ox + s[0] * h, oy + s[1] * h) + " L " + pt(ox + s[2] * h, oy + s[3] * h);
    }
    std::vector<std::string> out;
    for (auto& [k, v] : paths) out.push_back(std::move(v));
    return svg_document({ox, oy, ox + nx * h, oy + ny * h}, out);
}

std::string plot_profile_csv(const std::string& text)
{
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    if (line.rfind("s,x,y", 0) != 0) throw UsageError("profile CSV must start with header 's,x,y,...'");
    std::string d;
    Bounds b{0, 0, 0, 0};
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string s, x, y;
        std::getline(ls, s, ',');
        std::getline(ls, x, ',');
        std::getline(ls, y, ',');
        double xv = 0, yv = 0;
        try {
            xv = std::stod(x);
            yv = std::stod(y);
        } catch (const std::exception&) {
            throw UsageError("malformed profile CSV row '" + line + "'");
        }
        d += (first ? "M " : " L ") + pt(xv, yv);
        first = false;
        b.x1 = std::max(b.x1, xv);
        b.y1 = std::max(b.y1, yv);
    }
    if (first) throw UsageError("profile CSV has no rows");
    return svg_document(b, {d});
}

int run_plot(const std::string& input, const std::string& output, const Common& common)
{
    const std::string text = read_file(input);
    const std::string svg = text.rfind("cmcgrid", 0) == 0 ? plot_cellset(parse_cellset(text)) : plot_profile_csv(text);
    write_file_atomic(out_path(common, output), svg);
    return 0;
}

void diagnostic(int code, const std::string& kind, const std::string& message)
{
    const json j{{"schema_version", kSchemaVersion}, {"error", kind}, {"exit_code", code}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Discrete CMC Plateau laboratory"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--out", common.out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", common.seed, "Run seed (echoed; all computations are deterministic)");

    SpectraArgs sa;
    auto* spectra = app.add_subcommand("spectra", "Link Jacobi spectrum and stability of a Clifford cone");
    spectra->add_option("--p", sa.p)->required();
    spectra->add_option("--q", sa.q)->required();
    spectra->add_option("--kmax", sa.kmax, "Number of distinct eigenvalues")->capture_default_str();
    spectra->add_flag("--csv", sa.csv, "Emit CSV instead of JSON");
    bool spectra_json = false;
    spectra->add_flag("--json", spectra_json, "Emit JSON (default)");

    PlateauArgs pa;
    auto* plateau = app.add_subcommand("plateau2d", "Obstacle threshold sweep or a problem file solve");
    plateau->add_option("--lambda", pa.lambdas, "Lambda values")->delimiter(',');
    plateau->add_option("--problem", pa.problem, "Problem JSON file");
    plateau->add_option("--radius", pa.radius)->capture_default_str();
    plateau->add_option("--resolution", pa.resolution, "Cells per obstacle radius")->capture_default_str();
    plateau->add_option("--dim", pa.dim)->capture_default_str();
    plateau->add_option("--stencil", pa.stencil)->capture_default_str();

    EquivariantArgs ea;
    auto* equiv = app.add_subcommand("equivariant", "Weighted quadrant minimization");
    equiv->add_option("--p", ea.p)->capture_default_str();
    equiv->add_option("--q", ea.q)->capture_default_str();
    equiv->add_option("--n", ea.n, "Cells per axis")->capture_default_str();
    equiv->add_option("--box", ea.box)->capture_default_str();
    equiv->add_option("--lambda", ea.lambda)->capture_default_str();
    equiv->add_option("--radius", ea.radius, "Obstacle radius")->capture_default_str();
    equiv->add_option("--boundary", ea.boundary, "Boundary CellSet file (default: cone wedge)");

    LeafArgs la;
    auto* leaf = app.add_subcommand("leaf", "Shoot a minimal leaf from an axis");
    leaf->add_option("--p", la.p)->capture_default_str();
    leaf->add_option("--q", la.q)->capture_default_str();
    leaf->add_option("--s0", la.s0)->capture_default_str();
    leaf->add_option("--rmax", la.rmax)->capture_default_str();
    leaf->add_option("--step", la.step, "Sample spacing in units of s0")->capture_default_str();
    leaf->add_option("--side", la.side, "above or below")->capture_default_str();
    leaf->add_option("--csv", la.csv, "CSV output file (default: stdout)");

    std::string approx_config;
    auto* approx = app.add_subcommand("approx", "Inward-perturbation approximation sequence");
    approx->add_option("--config", approx_config, "Run description JSON")->required();

    std::string plot_in, plot_out;
    auto* plot = app.add_subcommand("plot", "Render a CellSet or profile CSV to SVG");
    plot->add_option("--input", plot_in)->required();
    plot->add_option("--output", plot_out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*spectra) {
            if (sa.csv && spectra_json) throw UsageError("--csv and --json are mutually exclusive");
            return run_spectra(sa, common);
        }
        if (*plateau) return run_plateau(pa, common);
        if (*equiv) return run_equivariant(ea, common);
        if (*leaf) return run_leaf(la, common);
        if (*approx) return run_approx(approx_config, common);
        if (*plot) return run_plot(plot_in, plot_out, common);
    } catch (const UsageError& e) {
        diagnostic(kExitConfig, "config", e.what());
        return kExitConfig;
    } catch (const PreconditionError& e) {
        diagnostic(kExitNumerical, "precondition", e.what());
        return kExitNumerical;
    } catch (const DomainError& e) {
        diagnostic(kExitNumerical, "domain", e.what());
        return kExitNumerical;
    } catch (const IntegrationError& e) {
        diagnostic(kExitNumerical, "integration", e.what());
        return kExitNumerical;
    } catch (const ScaledArithmeticError& e) {
        diagnostic(kExitNumerical, "overflow", e.what());
        return kExitNumerical;
    } catch (const InvariantError& e) {
        diagnostic(kExitNumerical, "invariant", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        diagnostic(kExitNumerical, "internal", e.what());
        return kExitNumerical;
    }
    return kExitConfig;
}
