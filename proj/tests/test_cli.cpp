#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <nlohmann/json.hpp>

#include "epifamily/cli.hpp"
#include "epifamily/csv.hpp"
#include "epifamily/error.hpp"
#include "epifamily/io.hpp"

using namespace epifamily;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path fixtures = fs::path(EPIFAMILY_SOURCE_DIR) / "fixtures";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = cli::run_command(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name)
{
    static std::atomic<int> counter{0};
    const auto dir = fs::temp_directory_path() /
                     ("epifamily_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + name);
    fs::remove_all(dir);
    return dir;
}

std::map<std::string, std::string> artifacts(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        files[entry.path().filename().string()] = io::read_file(entry.path());
    return files;
}

json error_json(const Run& r)
{
    std::istringstream lines(r.err);
    for (std::string line; std::getline(lines, line);)
        if (line.rfind("{\"error\"", 0) == 0)
            return json::parse(line);
    FAIL("no error line in: " << r.err);
    return {};
}

fs::path write_config(const fs::path& dir, const json& j)
{
    fs::create_directories(dir);
    const auto p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

} // namespace

TEST_CASE("seed lists")
{
    CHECK(cli::parse_seeds("3") == std::vector<std::uint64_t>{3});
    CHECK(cli::parse_seeds("1..4") == std::vector<std::uint64_t>{1, 2, 3, 4});
    CHECK(cli::parse_seeds("5, 2,9") == std::vector<std::uint64_t>{5, 2, 9});
    CHECK_THROWS_AS(cli::parse_seeds("4..1"), InputError);
    CHECK_THROWS_AS(cli::parse_seeds("x"), InputError);
    CHECK_THROWS_AS(cli::parse_seeds("-1"), InputError);
}

TEST_CASE("hm forecast on delta kernels reaches occupancy 30")
{
    const auto out = scratch("hm_delta");
    const auto r = run({"hm", "forecast", "--config", (fixtures / "hm_delta" / "config.json").string(), "--out",
                        out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto table = csv::read(out / "occupancy.csv");
    const auto occ = table.column("occupancy");
    const auto adm = table.column("admissions");
    REQUIRE(table.rows.size() == 60);
    for (std::size_t i = 5; i < table.rows.size(); ++i) {
        CHECK(table.rows[i][occ] == "30");
        CHECK(table.rows[i][adm] == "10");
    }
    CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("hm calibrate recovers the generating parameters")
{
    const auto out = scratch("hm_wave");
    const auto r = run({"hm", "calibrate", "--config", (fixtures / "hm_wave" / "config.json").string(), "--out",
                        out.string(), "--format", "json"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto cal = json::parse(io::read_file(out / "calibration.json"));
    CHECK(cal["params"]["p"].get<double>() == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(cal["params"]["mu_a"].get<double>() == doctest::Approx(6.0).epsilon(1e-3));
    CHECK(cal["params"]["mu_b"].get<double>() == doctest::Approx(11.0).epsilon(1e-3));
    CHECK(cal["transient_ok"].get<bool>());
    const auto rows = json::parse(io::read_file(out / "occupancy.json"));
    REQUIRE(rows.is_array());
    CHECK(rows.size() == 200);
}

TEST_CASE("cld check lists tests as covered by one model")
{
    const auto out = scratch("cld");
    const auto r =
        run({"cld", "check", "--config", (fixtures / "cld" / "family.json").string(), "--out", out.string()});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    const auto report = json::parse(io::read_file(out / "coverage.json"));
    CHECK(report["single_model_nodes"]["tests"] == "abem");
    for (const char* f : {"system.dot", "abem.dot", "iwm.dot", "hm.dot", "asm.dot", "manifest.json"})
        CHECK(fs::exists(out / f));
}

TEST_CASE("every command reruns byte for byte")
{
    const std::vector<std::vector<std::string>> commands{
        {"iwm", "run", "--config", (fixtures / "iwm" / "config.json").string(), "--seeds", "1..2", "--jobs", "2"},
        {"asm", "run", "--config", (fixtures / "asm" / "config.json").string()},
        {"asm", "calibrate", "--config", (fixtures / "asm" / "calibrate.json").string()},
        {"scenarios", "generate", "--config", (fixtures / "scenarios" / "config.json").string()},
        {"pipeline", "ss1", "--config", (fixtures / "pipelines" / "ss1.json").string(), "--jobs", "3"},
        {"pipeline", "ss2", "--config", (fixtures / "pipelines" / "ss2.json").string()},
        {"pipeline", "ss3", "--config", (fixtures / "pipelines" / "ss3.json").string(), "--jobs", "4"},
        {"pipeline", "ss4", "--config", (fixtures / "pipelines" / "ss4.json").string(), "--jobs", "4"},
    };
    for (const auto& cmd : commands) {
        CAPTURE(cmd[0] + " " + cmd[1]);
        std::vector<std::map<std::string, std::string>> results;
        for (int rep = 0; rep < 2; ++rep) {
            const auto out = scratch(cmd[0] + "_" + cmd[1]);
            auto args = cmd;
            args.insert(args.end(), {"--out", out.string()});
            const auto r = run(args);
            REQUIRE_MESSAGE(r.code == 0, r.err);
            results.push_back(artifacts(out));
        }
        REQUIRE(results[0].count("manifest.json") == 1);
        CHECK(results[0] == results[1]);

        const auto manifest = json::parse(results[0].at("manifest.json"));
        CHECK(manifest["outputs"].size() + 1 == results[0].size());
        for (const auto& o : manifest["outputs"])
            CHECK(io::sha256_hex(results[0].at(o["file"].get<std::string>())) == o["sha256"]);
        CHECK_FALSE(manifest["inputs"].empty());
        CHECK(manifest.contains("seeds"));
    }
}

TEST_CASE("seeds change stochastic output only")
{
    const auto a = scratch("iwm_a");
    const auto b = scratch("iwm_b");
    const auto config = (fixtures / "iwm" / "config.json").string();
    REQUIRE(run({"iwm", "run", "--config", config, "--out", a.string(), "--seeds", "1"}).code == 0);
    REQUIRE(run({"iwm", "run", "--config", config, "--out", b.string(), "--seeds", "2"}).code == 0);
    CHECK(io::read_file(a / "immunity_seed1.csv") != io::read_file(b / "immunity_seed2.csv"));
}

TEST_CASE("input failures exit with 2")
{
    const auto out = scratch("bad");
    SUBCASE("unknown subcommand")
    {
        const auto r = run({"hm", "explode", "--config", "x", "--out", out.string()});
        CHECK(r.code == 2);
        CHECK(error_json(r)["error"]["kind"] == "usage");
    }
    SUBCASE("missing config file")
    {
        CHECK(run({"hm", "forecast", "--config", (out / "nope.json").string(), "--out", out.string()}).code == 2);
    }
    SUBCASE("unknown config field")
    {
        const auto cfg =
            write_config(out / "cfg", {{"cases_csv", (fixtures / "hm_delta" / "cases.csv").string()}, {"pp", 0.1}});
        const auto r = run({"hm", "forecast", "--config", cfg.string(), "--out", (out / "o").string()});
        CHECK(r.code == 2);
        const auto e = error_json(r);
        CHECK(e["error"]["exit_code"] == 2);
        CHECK(e["error"]["message"].get<std::string>().find("'pp'") != std::string::npos);
        CHECK_FALSE(fs::exists(out / "o" / "manifest.json"));
    }
    SUBCASE("bad format")
    {
        CHECK(run({"hm", "forecast", "--config", (fixtures / "hm_delta" / "config.json").string(), "--out",
                   out.string(), "--format", "xml"})
                  .code == 2);
    }
    SUBCASE("misaligned scenario")
    {
        const auto cfg = write_config(out / "cfg", {{"hm_config", (fixtures / "hm_delta" / "config.json").string()},
                                                    {"scenario_config",
                                                     (fixtures / "scenarios" / "config.json").string()}});
        const auto r = run({"pipeline", "ss1", "--config", cfg.string(), "--out", (out / "o").string()});
        CHECK(r.code == 2);
        CHECK(error_json(r)["error"]["kind"] == "alignment");
    }
}

TEST_CASE("numerical failures exit with 3")
{
    auto j = json::parse(io::read_file(fixtures / "asm" / "calibrate.json"));
    j["initial_csv"] = (fixtures / "asm" / "initial.csv").string();
    j["reference_csv"] = (fixtures / "asm" / "reference.csv").string();
    j["calibration"] = {{"beta_lo", 0.0}, {"beta_hi", 1e-3}, {"max_widenings", 0}};
    const auto dir = scratch("numerical");
    const auto cfg = write_config(dir, j);
    const auto r = run({"asm", "calibrate", "--config", cfg.string(), "--out", (dir / "o").string()});
    CHECK(r.code == 3);
    CHECK(error_json(r)["error"]["kind"] == "numerical");
}

TEST_CASE("help exits cleanly")
{
    const auto r = run({"--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("pipeline") != std::string::npos);
}
