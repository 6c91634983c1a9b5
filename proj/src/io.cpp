#include "cmclab/io.hpp"

#include "cmclab/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cmclab {

using nlohmann::json;

std::string format_real(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_real(const std::string& s, const std::string& what)
{
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw UsageError("cannot parse " + what + " from '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& what)
{
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw UsageError("cannot parse " + what + " from '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string rle_encode(const std::vector<bool>& bits)
{
    std::string out;
    std::size_t i = 0;
    while (i < bits.size()) {
        std::size_t j = i;
        while (j < bits.size() && bits[j] == bits[i]) ++j;
        if (!out.empty()) out.push_back(' ');
        out += std::to_string(j - i);
        out.push_back(bits[i] ? '1' : '0');
        i = j;
    }
    return out;
}

std::vector<bool> rle_decode(const std::string& text, std::size_t expected)
{
    std::vector<bool> bits;
    bits.reserve(expected);
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
        if (tok.size() < 2 || (tok.back() != '0' && tok.back() != '1'))
            throw UsageError("malformed run-length token '" + tok + "'");
        const long long count = parse_int(tok.substr(0, tok.size() - 1), "run length");
        if (count <= 0) throw UsageError("run-length token '" + tok + "' has nonpositive count");
        if (bits.size() + static_cast<std::size_t>(count) > expected)
            throw UsageError("run-length data exceeds the grid cell count");
        bits.insert(bits.end(), static_cast<std::size_t>(count), tok.back() == '1');
    }
    if (bits.size() != expected)
        throw UsageError("run-length data covers " + std::to_string(bits.size()) + " cells, grid has " +
                         std::to_string(expected));
    return bits;
}

std::string format_cellset(const CellSet& set)
{
    const auto& g = *set.grid();
    std::string ext, origin;
    for (int ax = 0; ax < g.dim(); ++ax) {
        if (ax > 0) {
            ext.push_back(',');
            origin.push_back(',');
        }
        ext += std::to_string(g.extents()[ax]);
        origin += format_real(g.origin()[ax]);
    }
    std::string out = "cmcgrid v1 d=" + std::to_string(g.dim()) + " ext=" + ext + " h=" + format_real(g.spacing()) +
                      " origin=" + origin + " stencil=" + to_string(g.stencil()) + "\n";
    out += rle_encode(set.bits());
    out.push_back('\n');
    return out;
}

CellSet parse_cellset(const std::string& text)
{
    const auto nl = text.find('\n');
    if (nl == std::string::npos) throw UsageError("cell set file lacks a header line");
    std::istringstream header(text.substr(0, nl));
    std::string magic, version;
    header >> magic >> version;
    if (magic != "cmcgrid" || version != "v1") throw UsageError("not a cmcgrid v1 file");

    int dim = 0;
    std::vector<int> ext;
    std::vector<double> origin;
    double h = 0;
    std::string stencil;
    std::string field;
    while (header >> field) {
        const auto eq = field.find('=');
        if (eq == std::string::npos) throw UsageError("malformed header field '" + field + "'");
        const std::string key = field.substr(0, eq);
        const std::string val = field.substr(eq + 1);
        if (key == "d") {
            dim = static_cast<int>(parse_int(val, "d"));
        } else if (key == "ext") {
            for (const auto& e : split(val, ',')) ext.push_back(static_cast<int>(parse_int(e, "ext")));
        } else if (key == "h") {
            h = parse_real(val, "h");
        } else if (key == "origin") {
            for (const auto& o : split(val, ',')) origin.push_back(parse_real(o, "origin"));
        } else if (key == "stencil") {
            stencil = val;
        } else {
            throw UsageError("unknown header field '" + key + "'");
        }
    }
    if (origin.empty()) origin.assign(ext.size(), 0.5 * h);
    if (dim < 2 || dim > 3 || ext.size() != static_cast<std::size_t>(dim) || origin.size() != ext.size())
        throw UsageError("header dimension, extents and origin disagree");
    auto grid = std::make_shared<const GridGeometry>(ext, h, origin, stencil_from_string(stencil));
    return CellSet(grid, rle_decode(text.substr(nl + 1), grid->cell_count()));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw UsageError("cannot open " + tmp.string() + " for writing");
        os << content;
        os.flush();
        if (!os) throw UsageError("write to " + tmp.string() + " failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UsageError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void save_cellset(const std::filesystem::path& path, const CellSet& set)
{
    write_file_atomic(path, format_cellset(set));
}

CellSet load_cellset(const std::filesystem::path& path)
{
    return parse_cellset(read_file(path));
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where)
{
    if (!j.is_object()) throw UsageError(where + " must be a JSON object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw UsageError("unknown key '" + item.key() + "' in " + where);
    }
}

json grid_to_json(const GridGeometry& grid)
{
    return json{{"dims", grid.extents()},
                {"h", grid.spacing()},
                {"origin", grid.origin()},
                {"stencil", to_string(grid.stencil())}};
}

GridPtr grid_from_json(const json& j)
{
    reject_unknown_keys(j, {"dims", "h", "origin", "stencil"}, "grid");
    try {
        const auto dims = j.at("dims").get<std::vector<int>>();
        const double h = j.at("h").get<double>();
        std::vector<double> origin;
        if (j.contains("origin")) {
            origin = j.at("origin").get<std::vector<double>>();
        } else {
            origin.assign(dims.size(), 0.5 * h);
        }
        const Stencil st = j.contains("stencil") ? stencil_from_string(j.at("stencil").get<std::string>())
                                                 : Stencil::Crofton;
        return std::make_shared<const GridGeometry>(dims, h, origin, st);
    } catch (const json::exception& e) {
        throw UsageError(std::string("grid: ") + e.what());
    }
}

json problem_to_json(const MinCutProblem& problem)
{
    json j{{"grid", grid_to_json(*problem.grid)},
           {"lambda", problem.lambda},
           {"fixed_in", rle_encode(problem.fixed_in.bits())},
           {"fixed_out", rle_encode(problem.fixed_out.bits())},
           {"active_region", rle_encode(problem.active_region.bits())}};
    if (problem.cell_weight) j["weights"] = *problem.cell_weight;
    return j;
}

MinCutProblem problem_from_json(const json& j)
{
    reject_unknown_keys(j, {"grid", "lambda", "fixed_in", "fixed_out", "active_region", "weights"}, "problem");
    if (!j.contains("grid")) throw UsageError("problem: missing key 'grid'");
    if (!j.contains("lambda")) throw UsageError("problem: missing key 'lambda'");
    MinCutProblem p;
    p.grid = grid_from_json(j.at("grid"));
    const std::size_t n = p.grid->cell_count();
    try {
        p.lambda = j.at("lambda").get<double>();
        auto mask = [&](const char* key, bool fill) {
            if (!j.contains(key)) return RegionMask(p.grid, std::vector<bool>(n, fill));
            return RegionMask(p.grid, rle_decode(j.at(key).get<std::string>(), n));
        };
        p.fixed_in = mask("fixed_in", false);
        p.fixed_out = mask("fixed_out", false);
        p.active_region = mask("active_region", true);
        if (j.contains("weights")) p.cell_weight = j.at("weights").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("problem: ") + e.what());
    }
    p.validate();
    return p;
}

json result_summary(const MinimizerResult& res)
{
    return json{{"energy", res.energy},
                {"energy_quanta", res.energy_q},
                {"quantum", res.quantum},
                {"unique", res.unique},
                {"set_min_cells", res.set_min.count()},
                {"set_max_cells", res.set_max.count()},
                {"flow", {{"max_flow", res.flow_stats.max_flow},
                          {"phases", res.flow_stats.phases},
                          {"augmentations", res.flow_stats.augmentations},
                          {"nodes", res.flow_stats.nodes},
                          {"arcs", res.flow_stats.arcs}}}};
}

} // namespace cmclab
