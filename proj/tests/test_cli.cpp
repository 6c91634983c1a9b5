#include "cmclab/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Sandbox {
    fs::path dir;
    explicit Sandbox(const std::string& name) : dir(fs::temp_directory_path() / ("cmclab_cli_" + name))
    {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }

    // Runs the CLI with --out set to the sandbox; stdout and stderr go to files.
    int run(const std::string& args) const
    {
        const std::string cmd = std::string("\"") + CMCLAB_CLI_PATH + "\" --out \"" + dir.string() + "\" " + args +
                                " > \"" + (dir / "stdout.txt").string() + "\" 2> \"" + (dir / "stderr.txt").string() +
                                "\"";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    std::string read(const std::string& name) const { return cmclab::read_file(dir / name); }
    void write(const std::string& name, const std::string& text) const { std::ofstream(dir / name) << text; }
};

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("spectra emits the closed-form spectrum")
    {
        Sandbox sb("spectra");
        REQUIRE(sb.run("spectra --p 3 --q 3 --kmax 2 --json") == 0);
        const json j = json::parse(sb.read("spectra.json"));
        CHECK(j["schema_version"] == 1);
        CHECK(j["command"] == "spectra");
        CHECK(j["lambda1"] == -6.0);
        CHECK(j["stable"] == true);
        CHECK(j["gamma"][0] == doctest::Approx(2.0));
        CHECK(j["gamma"][1] == doctest::Approx(3.0));
        CHECK(j["multiplicities"][1] == 8);
        const std::string first = sb.read("spectra.json");
        REQUIRE(sb.run("spectra --p 3 --q 3 --kmax 2 --json") == 0);
        CHECK(sb.read("spectra.json") == first);

        REQUIRE(sb.run("spectra --p 1 --q 1 --csv") == 0);
        CHECK(sb.read("spectra.csv") == "index,eigenvalue,multiplicity\n0,-2,1\n");
        REQUIRE(sb.run("spectra --p 1 --q 1") == 0);
        CHECK(json::parse(sb.read("spectra.json"))["gamma"].is_null());
    }

    TEST_CASE("configuration errors exit with code 2")
    {
        Sandbox sb("config");
        CHECK(sb.run("spectra --p 0 --q 3") == 2);
        CHECK(sb.run("nosuchcommand") == 2);
        CHECK(sb.run("leaf --s0 -1") == 2);
        sb.write("empty.json", R"({"p": 3, "q": 3, "t_list": []})");
        CHECK(sb.run("approx --config \"" + (sb.dir / "empty.json").string() + "\"") == 2);
        sb.write("typo.json", R"({"p": 3, "q": 3, "t_list": [0.1], "lamda": 0})");
        CHECK(sb.run("approx --config \"" + (sb.dir / "typo.json").string() + "\"") == 2);
        CHECK(sb.read("stderr.txt").find("lamda") != std::string::npos);
    }

    TEST_CASE("numerical failures exit with code 3 and a diagnostic")
    {
        Sandbox sb("numeric");
        CHECK(sb.run("leaf --p 1 --q 1 --s0 1") == 3);
        const json diag = json::parse(sb.read("stderr.txt"));
        CHECK(diag["exit_code"] == 3);
    }

    TEST_CASE("plateau2d solves a problem file")
    {
        Sandbox sb("plateau");
        const auto g = cmclab::GridGeometry::corner_aligned({6, 6}, 1.0, cmclab::Stencil::Face);
        cmclab::MinCutProblem p = cmclab::MinCutProblem::free_problem(g, 4.5);
        sb.write("problem.json", cmclab::problem_to_json(p).dump());
        REQUIRE(sb.run("plateau2d --problem \"" + (sb.dir / "problem.json").string() + "\"") == 0);
        const cmclab::CellSet full = cmclab::load_cellset(sb.dir / "plateau_max.cmcgrid");
        CHECK(full.count() == 36);
        const json j = json::parse(sb.read("plateau2d.json"));
        CHECK(j["command"] == "plateau2d");

        REQUIRE(sb.run("plateau2d --lambda 0.03125,0.125 --radius 16 --resolution 16") == 0);
        const json sweep = json::parse(sb.read("plateau2d.json"));
        REQUIRE(sweep["rows"].size() == 2);
        CHECK(sweep["rows"][0]["filled"] == false);
        CHECK(sweep["rows"][1]["filled"] == true);
        CHECK(fs::exists(sb.dir / "plateau_1.cmcgrid"));
        CHECK(sb.run("plateau2d --lambda 0.1 --radius 1 --resolution 4") == 2);
    }

    TEST_CASE("leaf CSV and plots")
    {
        Sandbox sb("leaf");
        REQUIRE(sb.run("leaf --p 3 --q 3 --s0 1 --rmax 100 --csv leaf.csv") == 0);
        const std::string csv = sb.read("leaf.csv");
        CHECK(csv.rfind("s,x,y,curvature_residual\n", 0) == 0);
        std::istringstream is(csv);
        std::string line;
        std::getline(is, line);
        std::getline(is, line);
        CHECK(line.back() == ',');
        REQUIRE(sb.run("plot --input \"" + (sb.dir / "leaf.csv").string() + "\" --output leaf.svg") == 0);
        CHECK(sb.read("leaf.svg").find("<path") != std::string::npos);

        REQUIRE(sb.run("equivariant --p 3 --q 3 --n 32 --box 2 --radius 1") == 0);
        REQUIRE(sb.run("plot --input \"" + (sb.dir / "equivariant.cmcgrid").string() + "\" --output set.svg") == 0);
        CHECK(sb.read("set.svg").find("<path") != std::string::npos);
    }

    TEST_CASE("approx run writes a report and per-step sets")
    {
        Sandbox sb("approx");
        sb.write("run.json", R"({"p": 3, "q": 3, "lambda": 0, "grid": {"n": 64, "box": 2},
                                 "t_list": [0.125, 0.0625], "annulus": [0.5, 1.5], "obstacle_r": 1})");
        REQUIRE(sb.run("--seed 7 approx --config \"" + (sb.dir / "run.json").string() + "\"") == 0);
        const json j = json::parse(sb.read("approx.json"));
        CHECK(j["config"]["seed"] == 7);
        REQUIRE(j["steps"].size() == 2);
        for (const auto& s : j["steps"]) {
            CHECK(s["inclusion_ok"] == true);
            CHECK(fs::exists(sb.dir / s["file"].get<std::string>()));
        }
    }
}
