#include "doctest.h"
#include "support.hpp"

#include "primscene/cli.hpp"
#include "primscene/encoding.hpp"
#include "primscene/scene_store.hpp"

#include <sstream>

using namespace primscene;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli_run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string p(const std::filesystem::path& path) {
    return path.string();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == kExitOk);
    CHECK(cli({}).code == kExitInvalid);
    CHECK(cli({"frobnicate"}).code == kExitInvalid);
    CHECK(cli({"synth"}).code == kExitInvalid);
    CHECK(cli({"synth", "/tmp/x", "--frames", "0"}).code == kExitInvalid);
}

TEST_CASE("synth and validate") {
    testing::TempDir tmp("cli");
    const Result s = cli({"synth", p(tmp / "ds"), "--frames", "30", "--width", "64", "--height", "48"});
    REQUIRE(s.code == kExitOk);
    const Result v = cli({"validate", p(tmp / "ds")});
    CHECK(v.code == kExitOk);
    CHECK(v.out.rfind("30 frames\n", 0) == 0);
    CHECK(v.out.find("64x48") != std::string::npos);
    CHECK(cli({"validate", p(tmp / "ds" / "transforms.json")}).out == v.out);

    const Result missing = cli({"validate", p(tmp / "nothing")});
    CHECK(missing.code == kExitInvalid);
    CHECK(missing.err.find("error:") != std::string::npos);
    write_file(tmp / "broken.json", std::string("{\"frames\": 3}"));
    CHECK(cli({"validate", p(tmp / "broken.json")}).code == kExitInvalid);
}

TEST_CASE("init, place, run and report") {
    testing::TempDir tmp("cli");
    save_dataset(testing::small_room(), tmp / "ds");
    write_file(tmp / "cfg.json", std::string(R"({"tile_w": 64, "tile_h": 48})"));
    const std::string scene = p(tmp / "scene");
    const std::string cfg = p(tmp / "cfg.json");

    REQUIRE(cli({"init", scene, "--dataset", p(tmp / "ds")}).code == kExitOk);
    CHECK(cli({"init", scene, "--dataset", p(tmp / "ds")}).code == kExitInvalid);

    const Result empty = cli({"--config", cfg, "run", scene});
    CHECK(empty.code == kExitInvalid);
    CHECK(empty.err.find("no objects queued") != std::string::npos);

    CHECK(cli({"place", scene, "--name", "sofa", "--pose", "0,0.45,0", "--scale", "0.9,0.45,0.4", "--prompt",
               "a leather sofa"})
              .code == kExitOk);
    CHECK(cli({"place", scene, "--kind", "cylinder", "--name", "lamp", "--pose", "0.9,0.7,0.2", "--scale",
               "0.15,0.7,0.15", "--prompt", "a floor lamp"})
              .code == kExitOk);
    CHECK(cli({"place", scene, "--name", "bed", "--pose", "-1.2,0.35,-1,0,30,0", "--scale", "0.8,0.35,1", "--prompt",
               "a wooden bed", "--strategy", "modify"})
              .code == kExitOk);
    CHECK(cli({"place", scene, "--name", "sofa", "--prompt", "again"}).code == kExitInvalid);
    CHECK(cli({"place", scene, "--name", "flat", "--scale", "1,0,1", "--prompt", "x"}).code == kExitInvalid);
    CHECK(cli({"place", scene, "--name", "odd", "--pose", "1,2", "--prompt", "x"}).code == kExitInvalid);
    CHECK(cli({"place", scene, "--name", "cone", "--kind", "cone", "--prompt", "x"}).code == kExitInvalid);
    const auto queued = SceneDir(scene).queued();
    REQUIRE(queued.size() == 3);
    CHECK(queued[2].strategy == InsertStrategy::ModifyExisting);
    CHECK(queued[2].primitive.pose.rotation.isApprox(rotation_from_euler_deg(0, 30, 0)));

    CHECK(cli({"report", scene}).code == kExitInvalid);
    const Result run = cli({"--config", cfg, "run", scene});
    REQUIRE(run.code == kExitOk);
    CHECK(run.err.find("[3/3] bed: update_dataset") != std::string::npos);
    CHECK(run.out.find("lamp") != std::string::npos);

    const Result rep = cli({"report", scene, "--out", p(tmp / "r.csv")});
    CHECK(rep.code == kExitOk);
    CHECK(rep.out.rfind(PipelineReport::kCsvHeader, 0) == 0);
    CHECK(std::count(rep.out.begin(), rep.out.end(), '\n') == 4);
    const Bytes saved = read_file(tmp / "r.csv");
    CHECK(std::string(saved.begin(), saved.end()) == rep.out);
    CHECK(load_dataset(tmp / "scene" / "output").size() == testing::small_room().size() + 16);

    CHECK(cli({"--config", cfg, "run", scene}).code == kExitInvalid);
}

TEST_CASE("a backend failure after start exits with 2") {
    testing::TempDir tmp("cli");
    save_dataset(testing::small_room(), tmp / "ds");
    // Port 9 on localhost has nothing listening.
    write_file(tmp / "cfg.json",
               std::string(R"({"tile_w": 64, "tile_h": 48, "stylizer": "http://127.0.0.1:9", "retries": 0, "timeout_s": 2})"));
    const std::string scene = p(tmp / "scene");
    REQUIRE(cli({"init", scene, "--dataset", p(tmp / "ds")}).code == kExitOk);
    REQUIRE(cli({"place", scene, "--name", "sofa", "--prompt", "a sofa"}).code == kExitOk);
    const Result r = cli({"--config", p(tmp / "cfg.json"), "run", scene});
    CHECK(r.code == kExitPipeline);
    CHECK(SceneDir(scene).load_job().status == JobStatus::Failed);
    CHECK(cli({"--config", p(tmp / "missing.json"), "run", scene}).code == kExitInvalid);
}

}
