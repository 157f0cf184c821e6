#include "doctest.h"

#include "skewlab/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

using namespace skewlab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path fresh_dir(const std::string& name)
{
    fs::path d = fs::current_path() / "cli_test_out" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run(std::vector<std::string> args)
{
    std::vector<char*> argv;
    for (auto& a : args)
        argv.push_back(a.data());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("config parsing and validation")
{
    ExperimentConfig c = parse_config("[run]\nseed = 42\n[system]\nkind = mp\nmp_alpha = 0.5\n");
    CHECK(c.seed == 42);
    CHECK(c.tree.get<std::string>("system.kind") == "mp");
    CHECK_THROWS_AS(parse_config("[bogus]\nx = 1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("[system]\nkindd = doubling\n"), std::invalid_argument);
    CHECK_THROWS(parse_config("[system\nkind = doubling\n"));
}

TEST_CASE("cone-check is deterministic and passes by default")
{
    ExperimentConfig c = parse_config("[cone_check]\nelements = 10\ncontraction_trials = 20\n");
    c.out_dir = fresh_dir("a").string();
    CommandResult r1 = cmd_cone_check(c);
    CHECK(r1.pass);
    ExperimentConfig c2 = c;
    c2.out_dir = fresh_dir("b").string();
    cmd_cone_check(c2);
    std::string a = slurp(fs::path(c.out_dir) / "cone-check.csv");
    CHECK(!a.empty());
    CHECK(a == slurp(fs::path(c2.out_dir) / "cone-check.csv"));
    CHECK(slurp(fs::path(c.out_dir) / "cone-check.dat") == slurp(fs::path(c2.out_dir) / "cone-check.dat"));
}

TEST_CASE("undersized b fails with exit code 2")
{
    fs::path d = fresh_dir("small_b");
    {
        std::ofstream cfg(d / "cfg.ini");
        cfg << "[cone]\nb = 1.0\n[cone_check]\nelements = 10\ncontraction_trials = 10\n";
    }
    CHECK(run({"skewlab", "cone-check", "--config", (d / "cfg.ini").string(), "--out", d.string(), "--threads", "1"}) == 2);
    std::string js = slurp(d / "cone-check.json");
    CHECK(js.find("condition (B)") != std::string::npos);
}

TEST_CASE("exit codes for bad input")
{
    fs::path d = fresh_dir("bad");
    {
        std::ofstream cfg(d / "cfg.ini");
        cfg << "[system]\nkind = torus\n";
    }
    CHECK(run({"skewlab", "sample", "--config", (d / "cfg.ini").string(), "--out", d.string()}) == 1);
    CHECK(run({"skewlab", "nonsense"}) == 1);
    CHECK(run({"skewlab", "sample", "--config", (d / "missing.ini").string()}) == 1);
}

TEST_CASE("clt with a constant observable is a flagged pass")
{
    ExperimentConfig c = parse_config("[clt]\nobservable = constant\nn = 50\nsamples = 500\n");
    c.out_dir = fresh_dir("clt").string();
    CommandResult r = cmd_clt(c);
    CHECK(r.pass);
    CHECK(r.summary["degenerate"].get<bool>());
}

TEST_CASE("sample subcommand")
{
    fs::path d = fresh_dir("sample");
    {
        std::ofstream cfg(d / "cfg.ini");
        cfg << "[system]\nkind = mp\n[sample]\nsamples = 2000\n";
    }
    CHECK(run({"skewlab", "sample", "--config", (d / "cfg.ini").string(), "--out", d.string(), "--seed", "3"}) == 0);
    std::ifstream csv(d / "sample.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "base,rect,itinerary,fiber_x,fiber_y");
    int rows = 0;
    for (std::string line; std::getline(csv, line);)
        ++rows;
    CHECK(rows == 2000);
}
