#include <doctest.h>

#include "signgate/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace signgate;
namespace fs = std::filesystem;

namespace {

fs::path scenario_dir() {
    const char* dir = std::getenv("SIGNGATE_SCENARIO_DIR");
    return dir ? fs::path(dir) : fs::path("scenarios");
}

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / ("signgate_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = temp_dir() / name;
    std::ofstream(p) << text;
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "signgate");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string tiny_scenario() {
    return write_file("tiny.toml", R"(name = "tiny"
m = 200
replicates = 6
alpha_s = 0.1
procedures = ["BY", "LC", "NLC", "TCEA", "TCO"]
tau_grid = [0.2, 0.4]

[effect.ald]
q = 0.3
tau = 0.2
)")
        .string();
}

} // namespace

TEST_CASE("infer with a fixed alpha") {
    const auto input = write_file("three.txt", "2.5\n-0.3\n-2.2\n");
    const Run r = cli({"infer", "--input", input.string(), "--procedure", "fixed-alpha", "--alpha", "0.05"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "index,y,rejected,sign,p_value");
    CHECK(rows[1].rfind("1,2.5,1,1,", 0) == 0);
    CHECK(rows[2].rfind("2,-0.29999999999999999,0,0,", 0) == 0);
    CHECK(rows[3].rfind("3,-2.2000000000000002,1,-1,", 0) == 0);
    CHECK(r.err.find("R=2") != std::string::npos);
}

TEST_CASE("infer with LC") {
    // y values whose two-sided p-values are 0.001, 0.2 and 0.9
    const auto input = write_file("lc.txt", "3.2905267314918945\n1.2815515655446004\n0.12566134685507402\n");
    const Run r = cli({"infer", "--input", input.string(), "--procedure", "lc", "--alpha-s", "0.1"});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("alpha_chosen=0.066666666666666666") != std::string::npos);
    CHECK(r.err.find("R=1") != std::string::npos);

    const Run by = cli({"infer", "--input", input.string(), "--procedure", "by", "--alpha-s", "0.1"});
    REQUIRE(by.code == 0);
    CHECK(by.err.find("alpha_chosen=0.033333333333333333") != std::string::npos);
}

TEST_CASE("infer reads a CSV column") {
    const auto input = write_file("cols.csv", "name,z\na,2.5\nb,-0.3\nc,-2.2\n");
    const Run r = cli({"infer", "--input", input.string(), "--csv", "z", "--procedure", "fixed-alpha", "--alpha",
                       "0.05"});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out).size() == 4);
    const Run by_index = cli({"infer", "--input", input.string(), "--csv", "2", "--procedure", "fixed-alpha",
                              "--alpha", "0.05"});
    CHECK(by_index.out == r.out);
}

TEST_CASE("infer input errors") {
    const auto empty = write_file("empty.txt", "");
    CHECK(cli({"infer", "--input", empty.string()}).code == 2);
    const auto bad = write_file("bad.txt", "1.0\nnan\n2.0\n");
    const Run r = cli({"infer", "--input", bad.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("2") != std::string::npos);
    const auto junk = write_file("junk.txt", "1.0\nhello\n");
    CHECK(cli({"infer", "--input", junk.string()}).code == 2);
    CHECK(cli({"infer", "--input", (temp_dir() / "nope.txt").string()}).code == 2);
    const auto ok = write_file("ok.txt", "1.0\n2.0\n");
    CHECK(cli({"infer", "--input", ok.string(), "--procedure", "bh"}).code == 2);
    CHECK(cli({"infer", "--input", ok.string(), "--alpha-s", "0.6"}).code == 2);
    CHECK(cli({"infer", "--input", ok.string(), "--procedure", "tce", "--model", "normal"}).code == 2);
    CHECK(cli({"infer", "--input", ok.string(), "--procedure", "fixed-alpha"}).code == 2);
}

TEST_CASE("BY rejections are a subset of LC rejections end to end") {
    std::ostringstream text;
    for (int i = 0; i < 200; ++i) text << (i % 7 == 0 ? 3.1 + 0.01 * i : 0.013 * i - 1.3) << "\n";
    const auto input = write_file("many.txt", text.str());
    const auto by = lines(cli({"infer", "--input", input.string(), "--procedure", "by"}).out);
    const auto lc = lines(cli({"infer", "--input", input.string(), "--procedure", "lc"}).out);
    REQUIRE(by.size() == lc.size());
    for (std::size_t i = 1; i < by.size(); ++i) {
        const bool by_rej = by[i].find(",1,") != std::string::npos;
        const bool lc_rej = lc[i].find(",1,") != std::string::npos;
        if (by_rej) CHECK(lc_rej);
    }
}

TEST_CASE("simulate is deterministic and honours seeds") {
    const std::string scenario = tiny_scenario();
    const fs::path a = temp_dir() / "a.csv";
    const fs::path b = temp_dir() / "b.csv";
    const fs::path c = temp_dir() / "c.csv";
    const fs::path d = temp_dir() / "d.csv";
    REQUIRE(cli({"simulate", "--scenario", scenario, "--output", a.string(), "--seed", "5"}).code == 0);
    REQUIRE(cli({"simulate", "--scenario", scenario, "--output", b.string(), "--seed", "5", "--workers", "3"}).code ==
            0);
    REQUIRE(cli({"simulate", "--scenario", scenario, "--output", c.string(), "--seed", "6"}).code == 0);
    REQUIRE(cli({"simulate", "--scenario", scenario, "--output", d.string(), "--seed", "5", "--replicates", "3"})
                .code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a) != slurp(c));
    CHECK(slurp(a) != slurp(d));

    const auto rows = lines(slurp(a));
    REQUIRE(rows.size() == 1 + 2 * 5);
    CHECK(rows[0] == "scenario_id,procedure,mean_sep,se_sep,mean_signs,se_signs,replicates");
    CHECK(rows[1].rfind("tiny/tau=0.2,BY,", 0) == 0);
    CHECK(rows[1].substr(rows[1].size() - 2) == ",6");

    SUBCASE("plot output") {
        const fs::path svg = temp_dir() / "plot.svg";
        REQUIRE(cli({"simulate", "--scenario", scenario, "--output", a.string(), "--plot", svg.string()}).code == 0);
        const std::string text = slurp(svg);
        CHECK(text.find("<svg") != std::string::npos);
        CHECK(text.find("TCEA") != std::string::npos);
    }
}

TEST_CASE("simulate config errors exit 2") {
    const auto bad = write_file("bad.toml", R"(m = 10
alpha_s = 0.1
procedures = ["BY", "BH"]
[effect.ald]
tau = 0.2
q = 0.3
)");
    const Run r = cli({"simulate", "--scenario", bad.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("procedures") != std::string::npos);
    CHECK(cli({"simulate", "--scenario", (temp_dir() / "none.toml").string()}).code == 2);
    CHECK(cli({"simulate"}).code == 2);
    CHECK(cli({"bogus"}).code == 2);
}

TEST_CASE("shipped figure2_q05 scenario") {
    const fs::path out = temp_dir() / "fig2.csv";
    const Run r = cli({"simulate", "--scenario", (scenario_dir() / "figure2_q05.toml").string(), "--replicates", "2",
                       "--output", out.string()});
    REQUIRE(r.code == 0);
    const auto rows = lines(slurp(out));
    CHECK(rows.size() == 1 + 4 * 5);
}

TEST_CASE("table1") {
    const auto rows = compute_table1();
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].label == "sU");
    CHECK(rows[0].s == 0.5);
    CHECK(std::abs(rows[0].mser - 0.0301) < 0.001);
    CHECK(std::abs(rows[0].msdr - 0.189) < 0.003);
    CHECK(std::abs(rows[1].s - 0.683) < 0.02);
    CHECK(std::abs(rows[1].msdr - 0.193) < 0.003);
    CHECK(std::abs(rows[2].s - 0.829) < 0.02);
    CHECK(std::abs(rows[2].mser - 0.0271) < 0.001);
    CHECK(std::abs(kTable1NoiseSd * rows[0].upper_z - 3.92) < 0.005);
    CHECK(std::abs(kTable1NoiseSd * rows[1].lower_z - (-3.65)) < 0.01);
    CHECK(std::abs(kTable1NoiseSd * rows[1].upper_z - 4.30) < 0.01);

    const Run r = cli({"table1"});
    REQUIRE(r.code == 0);
    const auto out = lines(r.out);
    REQUIRE(out.size() == 4);
    CHECK(out[0] == "row,s,lower_z,upper_z,lower,upper,mser_percent,msdr");
    CHECK(out[1].rfind("sU,0.5,", 0) == 0);
}
