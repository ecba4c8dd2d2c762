#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

#include "csmooth/dataset.hpp"
#include "csmooth/errors.hpp"
#include "csmooth/scm.hpp"
#include "helpers.hpp"

using namespace csmooth;

namespace {

std::string temp_path(const char* name) {
    return std::string("/tmp/csmooth_test_") + name;
}

}  // namespace

TEST_SUITE("dataset_io") {

TEST_CASE("save then load round-trips record for record") {
    scm::ScmConfig cfg = testutil::confounded_config();
    const Dataset original = scm::generate_dataset(cfg, 200, 5);
    const std::string path = temp_path("roundtrip.jsonl");
    original.save_jsonl(path);

    const Dataset loaded = load_dataset(path);
    REQUIRE(loaded.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        CHECK(loaded.records[i] == original.records[i]);
    }
    CHECK(loaded.schema.n_features == original.schema.n_features);
    CHECK(loaded.schema.outcome_kind == original.schema.outcome_kind);
    std::remove(path.c_str());
}

TEST_CASE("missing key errors cite the 1-based line and key") {
    const std::string good =
        R"({"features":[1.0],"instrument":[0.5],"treatments":[1.0],"outcome":0.0,"law_labels":[1]})";
    const std::string bad =
        R"({"features":[1.0],"instrument":[0.5],"treatments":[1.0],"law_labels":[1]})";
    const std::string text = good + "\n" + good + "\n" + bad + "\n";
    try {
        parse_jsonl(text, "inline");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 3") != std::string::npos);
        CHECK(msg.find("outcome") != std::string::npos);
    }
}

TEST_CASE("malformed json line is rejected with its line number") {
    const std::string good =
        R"({"features":[1.0],"instrument":[0.5],"treatments":[1.0],"outcome":0.0,"law_labels":[1]})";
    const std::string text = good + "\n{not json\n";
    try {
        parse_jsonl(text, "inline");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("empty file is an error") {
    const std::string path = temp_path("empty.jsonl");
    std::ofstream(path).close();
    CHECK_THROWS_AS(load_dataset(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("missing file is an io error") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/nope.jsonl"), IoError);
}

TEST_CASE("schema drift across lines is rejected") {
    const std::string l1 =
        R"({"features":[1.0,2.0],"instrument":[0.5],"treatments":[1.0],"outcome":0.0,"law_labels":[1]})";
    const std::string l2 =
        R"({"features":[1.0],"instrument":[0.5],"treatments":[1.0],"outcome":0.0,"law_labels":[1]})";
    try {
        parse_jsonl(l1 + "\n" + l2 + "\n", "inline");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("line 2") != std::string::npos);
        CHECK(msg.find("features") != std::string::npos);
    }
}

TEST_CASE("binary kinds are inferred from the values") {
    const std::string line =
        R"({"features":[1.0],"instrument":[0.5],"treatments":[1.0],"outcome":1.0,"law_labels":[0]})";
    const Dataset d = parse_jsonl(line + "\n", "inline");
    CHECK(d.schema.outcome_kind == ColumnKind::binary);
    CHECK(d.schema.treatment_kind == ColumnKind::binary);
}

}  // TEST_SUITE
