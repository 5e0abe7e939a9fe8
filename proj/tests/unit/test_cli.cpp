#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome ctl(std::vector<std::string> args) {
    args.insert(args.begin(), "coopctl");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = coopctl::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("coopctl_unit_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("validate") {
    CHECK(ctl({"validate", testing::fixture("slcd.json")}).code == 0);
    CHECK(ctl({"validate", "/nonexistent/scenario.json"}).code == 2);
    CHECK(ctl({}).code == 2);
    CHECK(ctl({"validate"}).code == 2);

    const fs::path bad = temp_file("bad.json");
    std::ofstream(bad) << "{ \"actors\": ";
    const auto r = ctl({"validate", bad.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line") != std::string::npos);

    {
        auto doc = coop::io::read_json_file(testing::fixture("slcd.json"));
        doc["links"][0]["criticality"] = 1.5;
        std::ofstream(bad) << doc.dump();
        const auto v = ctl({"validate", bad.string()});
        CHECK(v.code == 1);
        CHECK(v.err.find("criticality_out_of_range") != std::string::npos);
        const auto j = ctl({"validate", bad.string(), "--json"});
        const auto parsed = coop::io::parse_json_text(j.out);
        CHECK(parsed["schema_version"] == 1);
        CHECK(parsed["valid"] == false);
    }
    fs::remove(bad);
}

TEST_CASE("matrix") {
    const auto pd = ctl({"matrix", testing::fixture("platform_developer.json")});
    CHECK(pd.code == 0);
    CHECK(pd.out.find("0.84") != std::string::npos);
    CHECK(pd.out.find("0.1") != std::string::npos);

    const auto slcd = ctl({"matrix", testing::fixture("slcd.json"), "--json"});
    const auto doc = coop::io::parse_json_text(slcd.out);
    CHECK(doc["matrix"]["entries"][1][0].get<double>() == doctest::Approx(0.86));
    CHECK(doc["matrix"]["entries"][0][1].get<double>() == doctest::Approx(0.64));

    const fs::path csv = temp_file("m.csv");
    CHECK(ctl({"matrix", testing::fixture("no_links.json"), "--csv", csv.string()}).code == 0);
    std::ifstream in(csv);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "actor,A,B\nA,0,0\nB,0,0\n");
    fs::remove(csv);
}

TEST_CASE("solve") {
    const auto r = ctl({"solve", testing::fixture("slcd_rounded.json"), "--json"});
    REQUIRE(r.code == 0);
    const auto doc = coop::io::parse_json_text(r.out);
    CHECK(doc["schema_version"] == 1);
    CHECK(std::abs(doc["mean_action"].get<double>() - 26.7) < 0.5);
    CHECK(doc["converged"] == true);

    const auto pooled = ctl({"solve", testing::fixture("slcd_rounded.json"), "--mode", "pooled"});
    CHECK(pooled.out.find("appropriation mode: pooled") != std::string::npos);

    const auto zero = ctl({"solve", testing::fixture("slcd_rounded.json"), "--zero-interdependence", "--json"});
    CHECK(std::abs(coop::io::parse_json_text(zero.out)["mean_action"].get<double>() - 22.9) < 0.2);

    const fs::path out = temp_file("result.json");
    CHECK(ctl({"solve", testing::fixture("slcd.json"), "--out", out.string()}).code == 0);
    CHECK(coop::io::read_json_file(out)["converged"] == true);
    fs::remove(out);

    CHECK(ctl({"solve", testing::fixture("slcd.json"), "--max-iter", "1", "--strict-convergence"}).code == 3);
    CHECK(ctl({"solve", testing::fixture("slcd.json"), "--max-iter", "1"}).code == 0);
    CHECK(ctl({"solve", testing::fixture("slcd.json"), "--mode", "shared"}).code == 2);
}

TEST_CASE("sweep") {
    const fs::path csv = temp_file("sweep.csv");
    const auto r = ctl({"sweep", testing::fixture("slcd.json"), "--axis", "gamma=0:2.5:0.05", "--out", csv.string()});
    CHECK(r.code == 0);
    std::ifstream in(csv);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 52);  // header + 51 rows
    fs::remove(csv);

    const auto capped = ctl({"sweep", testing::fixture("slcd.json"), "--axis", "gamma=0:2.5:0.05", "--axis",
                                 "endowment=100,200", "--cap", "50"});
    CHECK(capped.code == 2);
    CHECK(ctl({"sweep", testing::fixture("slcd.json"), "--axis", "omega=1"}).code == 2);

    const auto best = ctl({"sweep", testing::fixture("slcd_rounded.json"), "--axis", "gamma=0.3,0.65", "--rubric",
                               testing::fixture("default_rubric.json"), "--edits",
                               testing::fixture("slcd_panel_edit.json")});
    CHECK(best.code == 0);
    CHECK(best.out.find("best-scoring row") != std::string::npos);
}

TEST_CASE("score and counterfactual") {
    const auto sc = ctl({"score", testing::fixture("slcd_rounded.json"), "--json"});
    REQUIRE(sc.code == 0);
    const auto doc = coop::io::parse_json_text(sc.out);
    CHECK(doc["families"][2]["missing"] == true);
    CHECK(doc.contains("definitions"));

    const auto full = ctl({"score", testing::fixture("slcd_rounded.json"), "--rubric",
                               testing::fixture("default_rubric.json"), "--edits",
                               testing::fixture("slcd_panel_edit.json")});
    CHECK(full.out.find("total: 60 / 60") != std::string::npos);

    const auto cf = ctl({"counterfactual", testing::fixture("slcd.json"), "--edits",
                             testing::fixture("slcd_panel_edit.json")});
    CHECK(cf.code == 0);
    CHECK(cf.out.find("0.86 -> 0.61") != std::string::npos);
    CHECK(cf.out.find("-29.0697") != std::string::npos);

    const auto empty = ctl({"counterfactual", testing::fixture("slcd.json"), "--edits",
                                testing::fixture("empty_edit.json"), "--json"});
    const auto e = coop::io::parse_json_text(empty.out);
    for (const auto& d : e["deltas"]) CHECK(d["action_delta"].get<double>() == 0.0);

    CHECK(ctl({"counterfactual", testing::fixture("slcd.json")}).code == 2);
}

TEST_CASE("experiment reports carry reference figures") {
    const auto r = ctl({"experiment", "complementarity", "--form", "logarithmic", "--json"});
    REQUIRE(r.code == 0);
    const auto doc = coop::io::parse_json_text(r.out);
    CHECK(doc["reference"]["reproduced"] == false);
    CHECK(doc["rows"].size() == 5);
}
