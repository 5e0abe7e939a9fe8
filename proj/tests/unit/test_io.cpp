#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "coop/store.hpp"
#include "helpers.hpp"

using namespace coop;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("coop_unit_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("load the S-LCD fixture") {
    const Scenario s = testing::load("slcd.json");
    CHECK(s.network.actors.size() == 2);
    CHECK(s.network.dependums_of(ActorId{"Sony"}).size() == 3);
    CHECK(s.network.dependums_of(ActorId{"Samsung"}).size() == 4);
    CHECK(s.network.links.size() == 5);
    CHECK(std::get<LogarithmicForm>(s.value.form).theta == 20.0);
    CHECK(s.value.gamma == 0.65);
    CHECK(s.bargaining.power.at(ActorId{"Sony"}) == 0.9);
}

TEST_CASE("parse errors") {
    const fs::path dir = scratch("parse");
    write(dir / "empty.json", "");
    CHECK_THROWS_AS(io::load_scenario(dir / "empty.json"), ParseError);

    write(dir / "broken.json", "{\n  \"actors\": [\"A\",\n}");
    try {
        io::load_scenario(dir / "broken.json");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() >= 1);
    }

    io::json doc = io::read_json_file(testing::fixture("slcd.json"));
    doc["colour"] = "blue";
    try {
        io::scenario_from_json(doc);
        FAIL("expected strict-mode rejection");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("colour") != std::string::npos);
    }

    doc = io::read_json_file(testing::fixture("slcd.json"));
    doc["links"][0]["weight"] = 1;
    CHECK_THROWS_WITH_AS(io::scenario_from_json(doc), doctest::Contains("weight"), ParseError);

    CHECK_THROWS_AS(io::load_scenario(dir / "absent.json"), NotFound);

    doc = io::read_json_file(testing::fixture("slcd.json"));
    doc["bargaining"]["power"]["Sony"] = 0;
    write(dir / "invalid.json", doc.dump());
    CHECK_THROWS_AS(io::load_scenario(dir / "invalid.json"), ValidationError);
    fs::remove_all(dir);
}

TEST_CASE("criticality defaults from alternatives") {
    io::json doc = io::read_json_file(testing::fixture("platform_developer.json"));
    const Scenario s = io::scenario_from_json(doc);
    CHECK(s.network.links[2].criticality == 0.1);
    CHECK(s.network.links[2].alternatives_count == 10);
}

TEST_CASE("scenario round-trip") {
    for (const char* name : {"slcd.json", "slcd_rounded.json", "platform_developer.json", "no_links.json"}) {
        CAPTURE(name);
        const Scenario s = testing::load(name);
        const Scenario again = io::scenario_from_json(io::parse_json_text(io::to_json(s).dump()));
        CHECK(again == s);
    }
    Scenario q = testing::load("slcd.json");
    q.cost_model = QuadraticCost{0.02};
    q.value.form = PowerForm{0.6};
    q.value.synergy = SynergyKind::minimum;
    q.appropriation_mode = AppropriationMode::pooled;
    CHECK(io::scenario_from_json(io::to_json(q)) == q);
}

TEST_CASE("other documents round-trip") {
    const auto edit = io::edit_from_json(io::read_json_file(testing::fixture("slcd_panel_edit.json")));
    CHECK(edit.criticality_overrides.size() == 1);
    CHECK(io::edit_from_json(io::to_json(edit)) == edit);
    CHECK(io::edit_from_json(io::read_json_file(testing::fixture("empty_edit.json"))).empty());

    const auto rubric = io::rubric_from_json(io::read_json_file(testing::fixture("default_rubric.json")));
    CHECK(io::rubric_from_json(io::to_json(rubric)) == rubric);
    ValidationRubric decay;
    decay.grading = Grading::linear_decay;
    decay.decay_width = 4.0;
    CHECK(io::rubric_from_json(io::to_json(decay)) == decay);

    SolveSettings st;
    st.tolerance = 1e-10;
    st.max_iterations = 7;
    CHECK(io::settings_from_json(io::to_json(st)) == st);
    CHECK_THROWS_AS(io::settings_from_json({{"tol", 1}}), ParseError);

    CHECK(io::axis_from_json("gamma=0:1:0.5") == parse_axis("gamma=0:1:0.5"));
    CHECK(io::axis_from_json({{"parameter", "mode"}, {"values", {"pooled"}}}).values == std::vector<double>{1.0});
}

TEST_CASE("canonical digest") {
    const io::json a = io::parse_json_text(R"({"b": 1.0, "a": [2, 0.5]})");
    const io::json b = io::parse_json_text(R"({"a": [2.0, 0.5], "b": 1})");
    CHECK(io::canonical_dump(a) == io::canonical_dump(b));
    CHECK(io::content_digest(a) == io::content_digest(b));
    CHECK(io::content_digest(a).size() == 64);
    CHECK(io::canonical_dump(io::json(0.1)) == "0.1");
    CHECK(io::content_digest(io::json{{"x", 1}}) != io::content_digest(io::json{{"x", 2}}));
}

TEST_CASE("artifact store") {
    const fs::path root = scratch("store");
    ArtifactStore store(root);
    CHECK(store.healthy());

    const io::json doc = io::to_json(testing::load("slcd.json"));
    const auto first = store.put(ArtifactKind::scenario, doc);
    const auto second = store.put(ArtifactKind::scenario, doc);
    CHECK(first.created);
    CHECK_FALSE(second.created);
    CHECK(first.id == second.id);
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(root / "scenario")) files += e.path().extension() == ".json";
    CHECK(files == 1);

    const auto fetched = store.fetch(first.id);
    CHECK(fetched.kind == ArtifactKind::scenario);
    CHECK(io::canonical_dump(fetched.payload) == io::canonical_dump(doc));
    CHECK(io::scenario_from_json(fetched.payload) == testing::load("slcd.json"));

    CHECK_THROWS_AS(store.fetch(std::string(64, 'a')), NotFound);
    CHECK_THROWS_AS(store.fetch("../etc/passwd"), NotFound);

    store.put(ArtifactKind::scenario, io::to_json(testing::load("platform_developer.json")));
    store.put(ArtifactKind::scenario, io::to_json(testing::load("no_links.json")));
    store.put(ArtifactKind::sweep, io::json{{"rows", io::json::array()}});
    CHECK(store.list(ArtifactKind::scenario).size() == 3);
    CHECK(store.list().size() == 4);

    const auto index = store.rebuild_index();
    CHECK(index.size() == 4);
    const io::json idx = io::read_json_file(root / "index.json");
    CHECK(idx["artifacts"].size() == 4);

    // A second store over the same directory sees the same content.
    ArtifactStore other(root);
    CHECK(other.put(ArtifactKind::scenario, doc).id == first.id);
    fs::remove_all(root);
}
