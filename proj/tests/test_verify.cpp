#include <catch2/catch_amalgamated.hpp>

#include "pwalk/io.hpp"
#include "pwalk/manifest.hpp"
#include "pwalk/verify.hpp"

#include <filesystem>

using namespace pwalk;

namespace {

IntDistribution unit_steps() {
    return IntDistribution::from_rationals({{-1, {1, 2}}, {1, {1, 2}}});
}

MembraneWalkSpec harrison_shepp(double p) {
    MembraneWalkSpec s;
    s.d = 0;
    s.xi_plus = unit_steps();
    s.xi_minus = unit_steps();
    s.membrane_kernel.emplace(0, IntDistribution::from_doubles({{1, p}, {-1, 1 - p}}));
    return s;
}

VerifyOptions quick_options() {
    VerifyOptions opt;
    opt.n = 8000;
    opt.paths = 2000;
    opt.mc_cycles = 20000;
    opt.burn_in = 500;
    opt.threads = 2;
    opt.seed = 2;
    return opt;
}

} // namespace

TEST_CASE("membrane verification battery passes on the one-point membrane", "[verify]") {
    VerifyReport report = verify_membrane(harrison_shepp(0.7), quick_options());
    for (const auto& r : report.records) {
        INFO(r.name << ": stat " << r.statistic << " thr " << r.threshold);
        CHECK(r.pass);
    }
    auto j = report.to_json();
    REQUIRE(j.is_array());
    CHECK(j.size() == report.records.size());
    CHECK(j[0].contains("seed"));
}

TEST_CASE("axis verification battery passes on a weighted relaunch chain", "[verify]") {
    AxisChainSpec s;
    s.m = 2;
    s.jumps = {unit_steps(), unit_steps()};
    for (int i = 1; i <= 2; ++i)
        s.reentry.emplace(RayState{0, i},
                          StateDistribution::from_doubles({{{1, 1}, 0.4}, {{1, 2}, 0.6}}));
    s.declared_C = 1.0;
    VerifyReport report = verify_axis(s, quick_options());
    for (const auto& r : report.records) {
        INFO(r.name << ": stat " << r.statistic << " thr " << r.threshold);
        CHECK(r.pass);
    }
}

TEST_CASE("spider verification battery passes on the symmetric spider", "[verify]") {
    SpiderWalkSpec s;
    s.m = 3;
    for (int i = 0; i < 3; ++i) s.jumps.push_back(unit_steps());
    s.origin_kernel = StateDistribution::from_rationals(
        {{{1, 1}, {1, 3}}, {{1, 2}, {1, 3}}, {{1, 3}, {1, 3}}});
    s.declared_C = 1.0;
    VerifyReport report = verify_spider(s, quick_options());
    for (const auto& r : report.records) {
        INFO(r.name << ": stat " << r.statistic << " thr " << r.threshold);
        CHECK(r.pass);
    }
}

TEST_CASE("chain specs load from json files by type", "[verify]") {
    auto dir = std::filesystem::temp_directory_path() / "pwalk_io_test";
    std::filesystem::create_directories(dir);
    auto path = (dir / "hs.json").string();
    write_text_file(path, harrison_shepp(0.7).to_json().dump());
    ChainSpecVariant v = load_chain_spec(path);
    REQUIRE(std::holds_alternative<MembraneWalkSpec>(v));
    CHECK(std::get<MembraneWalkSpec>(v).d == 0);

    write_text_file(path, "{ not json");
    CHECK_THROWS_AS(load_chain_spec(path), SpecError);
    write_text_file(path, R"({"type": "mystery"})");
    CHECK_THROWS_AS(load_chain_spec(path), SpecError);
}

TEST_CASE("git-style content hash matches git", "[verify]") {
    // `git hash-object` of the empty file and of "hello\n" are well known
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("manifest carries the config echo and the spec hash", "[verify]") {
    auto dir = std::filesystem::temp_directory_path() / "pwalk_manifest_test";
    std::filesystem::create_directories(dir);
    nlohmann::json config{{"seed", 7}, {"mode", "exact"}};
    write_manifest(dir.string(), "params", config, "spec.json", "content");
    auto manifest = nlohmann::json::parse(read_text_file((dir / "manifest.json").string()));
    CHECK(manifest["command"] == "params");
    CHECK(manifest["config"]["seed"] == 7);
    CHECK(manifest["spec_sha1"] == git_blob_sha1("content"));
}

TEST_CASE("path csv export", "[verify]") {
    CyclePath p;
    p.kind = ChainKind::Membrane;
    p.radius = {0, 1, 2};
    p.label.assign(3, 0);
    std::string csv = path_to_csv(p);
    CHECK(csv == "step,x,label\n0,0,0\n1,1,0\n2,2,0\n");
}
