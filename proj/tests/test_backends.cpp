#include "doctest.h"
#include "faults.hpp"
#include "http_fixture.hpp"
#include "support.hpp"

#include "primscene/encoding.hpp"
#include "primscene/http_backends.hpp"
#include "primscene/mesh_io.hpp"
#include "primscene/wire.hpp"

#include <atomic>
#include <chrono>
#include <future>

using namespace primscene;
using nlohmann::json;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::Internal;
}

RgbImage noise(int w, int h, unsigned seed) {
    std::mt19937 rng(seed);
    Rgb8Image img(w, h, 3);
    for (auto& v : img.data()) v = static_cast<std::uint8_t>(rng());
    return to_float(img);
}

GridEditRequest grid_request(int tile = 8) {
    GridEditRequest req;
    req.layout = {3, 3, 4, tile, tile};
    req.color_grid = noise(3 * tile, 3 * tile, 1);
    req.depth_grid = DepthImage(3 * tile, 3 * tile, 1, 1.5f);
    req.mask_grid = MaskImage(3 * tile, 3 * tile, 1, 1);
    req.prompt = "a lamp";
    return req;
}

HttpClientOptions fast_retry() {
    HttpClientOptions o;
    o.retry.initial_backoff_s = 0.01;
    o.timeout_s = 5;
    return o;
}

}  // namespace

TEST_SUITE("backends") {

TEST_CASE("mock stylizer gains follow FNV-1a of the prompt") {
    const Backends b = Backends::mock();
    const RgbImage white(4, 3, 3, 1.0f);
    const RgbImage out = b.stylize({white, "x"});
    const auto g = oracle::gains("x");
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 4; ++x)
            for (int c = 0; c < 3; ++c) CHECK(out.at(x, y, c) == doctest::Approx(g[static_cast<std::size_t>(c)]).epsilon(1e-6));
    CHECK(b.stylize({white, "x"}) == out);
    for (double gain : g) CHECK((gain >= 0.5 && gain <= 1.0));
    CHECK(code_of([&] { b.stylize({white, ""}); }) == ErrorCode::InvalidRequest);
}

TEST_CASE("mock mesh generator") {
    const Backends b = Backends::mock();
    RgbImage red(6, 6, 3, 0.0f);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 6; ++x) red.at(x, y, 0) = 1.0f;
    const TriMesh m = b.generate_mesh({red});
    for (const auto& c : m.vertex_colors) CHECK(c == Vec3(1, 0, 0));
    const Aabb box = bounding_box(m);
    CHECK((box.min.array() >= -0.5 - 1e-12).all());
    CHECK((box.max.array() <= 0.5 + 1e-12).all());
    CHECK(m.triangles.size() == 2u * 128u * 63u);

    RgbImage checker(8, 8, 3);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            for (int c = 0; c < 3; ++c) checker.at(x, y, c) = ((x + y) % 2) ? 1.0f : 0.0f;
    double mean = 0;
    for (float v : checker.data()) mean += v;
    mean /= static_cast<double>(checker.data().size());
    for (const auto& c : b.generate_mesh({checker}).vertex_colors) {
        CHECK((c - Vec3::Constant(mean)).cwiseAbs().maxCoeff() <= 1.0 / 255);
    }
}

TEST_CASE("mock grid editor is identity and rejects inconsistent grids") {
    const Backends b = Backends::mock();
    const GridEditRequest req = grid_request();
    CHECK(b.edit_grid(req) == req.color_grid);
    GridEditRequest bad = req;
    bad.mask_grid = MaskImage(5, 5, 1);
    CHECK(code_of([&] { b.edit_grid(bad); }) == ErrorCode::InvalidRequest);
}

TEST_CASE("mock scene renderer picks the nearest frame") {
    const NerfDataset& ds = testing::small_room();
    const Backends b = Backends::mock();
    CHECK(quantize(b.render_scene({ds.view(7)}, ds)) == *ds.frames[7].image);

    std::mt19937 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        const Pose p = testing::random_pose(rng);
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            const Mat3 rel = ds.frames[i].transform.rotation.transpose() * p.rotation;
            const double angle = std::acos(std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0));
            const double d = (ds.frames[i].transform.translation - p.translation).norm() + angle;
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        CHECK(nearest_frame(ds, p) == best);
    }

    NerfDataset one = ds;
    one.frames.resize(1);
    const CameraView any{ds.intrinsics, testing::random_pose(rng)};
    CHECK(quantize(b.render_scene({any}, one)) == *ds.frames[0].image);
    NerfDataset none = ds;
    none.frames.clear();
    CHECK(code_of([&] { b.render_scene({any}, none); }) == ErrorCode::EmptyDataset);
}

TEST_CASE("contract violations raise typed errors") {
    const NerfDataset& ds = testing::small_room();
    for (const auto& pattern : testing::fault_patterns()) {
        CAPTURE(pattern.name);
        const Backends b = testing::FaultyBackend::make(pattern, 0);
        ErrorCode got = ErrorCode::Internal;
        try {
            switch (pattern.target) {
                case testing::Target::Stylizer: b.stylize({noise(16, 12, 3), "p"}); break;
                case testing::Target::MeshGenerator: b.generate_mesh({noise(16, 12, 3)}); break;
                case testing::Target::GridEditor: b.edit_grid(grid_request()); break;
                case testing::Target::SceneRenderer: b.render_scene({ds.view(0)}, ds); break;
            }
        } catch (const Error& e) {
            got = e.code();
        }
        CHECK(got == pattern.expected);
    }
}

TEST_CASE("mesh OBJ round trip is exact") {
    const TriMesh m = Backends::mock().generate_mesh({noise(4, 4, 2)});
    const TriMesh back = parse_obj(write_obj(m));
    CHECK(back.vertices == m.vertices);
    CHECK(back.normals == m.normals);
    CHECK(back.triangles == m.triangles);
    CHECK(back.vertex_colors == m.vertex_colors);
}

TEST_CASE("OBJ variants and errors") {
    const std::string quad =
        "# quad pyramid\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0.5 0.5 1\n"
        "vt 0 0\nf 1/1 2/1 3/1 4/1\nf 1 2 5\nf 2 3 5\nf 3 4 5\nf 4 1 5\n";
    const TriMesh m = parse_obj(quad);
    CHECK(m.triangles.size() == 6);
    CHECK_NOTHROW(validate_mesh(m));
    CHECK(m.vertex_colors[0] == Vec3::Constant(0.5));
    CHECK(code_of([] { parse_obj("v 0 0\n"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_obj("v 0 0 0\nf 1 2 3\n"); }) == ErrorCode::ParseError);
}

TEST_CASE("wire encoding round trips") {
    const GridEditRequest req = grid_request(16);
    const GridEditRequest back = wire::grid_request(json::parse(wire::to_json(req).dump()));
    CHECK(back.color_grid == req.color_grid);
    CHECK(back.mask_grid == req.mask_grid);
    CHECK(back.layout == req.layout);
    CHECK(back.prompt == req.prompt);
    for (std::size_t i = 0; i < req.depth_grid.data().size(); ++i) {
        CHECK(std::abs(back.depth_grid.data()[i] - req.depth_grid.data()[i]) < 1e-4);
    }
    const CameraView v = testing::small_room().view(3);
    const CameraView vb = wire::decode_view(wire::encode_view(v));
    CHECK(vb.intrinsics == v.intrinsics);
    CHECK(vb.pose.matrix() == v.pose.matrix());
    CHECK(code_of([] { wire::stylize_request(json{{"image", "!!"}, {"prompt", "p"}}); }) == ErrorCode::ParseError);
    CHECK(code_of([] { wire::stylize_request(json{{"prompt", "p"}}); }) == ErrorCode::ParseError);
}

TEST_CASE("HTTP backends behave like the in-process mocks") {
    const auto ds = std::make_shared<const NerfDataset>(testing::small_room());
    testing::LocalServer srv;
    mount_backend_routes(srv.server(), Backends::mock(), ds);
    srv.start();
    const Backends remote = make_backends({srv.url(), srv.url(), srv.url(), srv.url()}, fast_retry());
    const Backends local = Backends::mock();

    const RgbImage img = noise(20, 10, 4);
    CHECK(remote.stylize({img, "teal"}) == to_float(quantize(local.stylize({img, "teal"}))));
    const TriMesh rm = remote.generate_mesh({img});
    const TriMesh lm = local.generate_mesh({img});
    CHECK(rm.vertices == lm.vertices);
    CHECK(rm.vertex_colors == lm.vertex_colors);
    const GridEditRequest req = grid_request();
    CHECK(remote.edit_grid(req) == req.color_grid);
    CHECK(quantize(remote.render_scene({ds->view(2)}, *ds)) == *ds->frames[2].image);

    httplib::Client raw(srv.url());
    auto res = raw.Post("/stylize", R"({"prompt": "p"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    CHECK(json::parse(res->body).at("error").at("code") == "parse-error");
}

TEST_CASE("retry policy") {
    testing::LocalServer srv;
    std::atomic<int> calls{0};
    std::atomic<int> fail_first{0};
    std::atomic<int> status{503};
    srv.server().Post("/stylize", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = calls++;
        if (n < fail_first) {
            res.status = status;
            res.set_content(wire::error_body("busy", "try later").dump(), "application/json");
            return;
        }
        res.set_content(wire::image_response(wire::stylize_request(json::parse(req.body)).image).dump(),
                        "application/json");
    });
    srv.start();
    HttpStylizer stylizer(std::make_shared<HttpBackendClient>(srv.url(), fast_retry()));
    const RgbImage img = noise(4, 4, 1);

    SUBCASE("transient 503s are retried") {
        fail_first = 2;
        CHECK(stylizer.stylize({img, "p"}) == img);
        CHECK(calls == 3);
    }
    SUBCASE("429 is retried too") {
        fail_first = 1;
        status = 429;
        CHECK(stylizer.stylize({img, "p"}) == img);
        CHECK(calls == 2);
    }
    SUBCASE("persistent failure gives up after the first call plus three retries") {
        fail_first = 100;
        const auto t0 = std::chrono::steady_clock::now();
        CHECK(code_of([&] { stylizer.stylize({img, "p"}); }) == ErrorCode::BackendUnreachable);
        CHECK(calls == 4);
        // Waits of 0.01, 0.02 and 0.04 s.
        CHECK(std::chrono::steady_clock::now() - t0 >= std::chrono::milliseconds(70));
    }
    SUBCASE("4xx fails immediately") {
        fail_first = 100;
        status = 422;
        CHECK(code_of([&] { stylizer.stylize({img, "p"}); }) == ErrorCode::InvalidRequest);
        CHECK(calls == 1);
    }
}

TEST_CASE("unreachable and malformed backends") {
    int closed_port = 0;
    {
        testing::LocalServer tmp;
        tmp.start();
        closed_port = tmp.port();
    }
    HttpClientOptions o = fast_retry();
    o.timeout_s = 0.5;
    HttpStylizer dead(std::make_shared<HttpBackendClient>("http://127.0.0.1:" + std::to_string(closed_port), o));
    CHECK(code_of([&] { dead.stylize({noise(2, 2, 1), "p"}); }) == ErrorCode::BackendUnreachable);

    testing::LocalServer srv;
    srv.server().Post("/stylize", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("{not json", "application/json");
    });
    srv.server().Post("/generate_mesh", [](const httplib::Request&, httplib::Response& res) {
        const std::string obj = "v 0 0 0\nv 1 0 0\nf 1 2 3\n";
        res.set_content(json{{"mesh", base64_encode(Bytes(obj.begin(), obj.end()))}}.dump(), "application/json");
    });
    srv.server().Post("/edit_grid", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(json{{"image", 5}}.dump(), "application/json");
    });
    srv.start();
    const Backends b = make_backends({srv.url(), srv.url(), srv.url(), "mock"}, fast_retry());
    CHECK(code_of([&] { b.stylize({noise(2, 2, 1), "p"}); }) == ErrorCode::InvalidResponse);
    CHECK(code_of([&] { b.generate_mesh({noise(2, 2, 1)}); }) == ErrorCode::InvalidMesh);
    CHECK(code_of([&] { b.edit_grid(grid_request()); }) == ErrorCode::InvalidResponse);
}

TEST_CASE("client bounds requests in flight") {
    testing::LocalServer srv;
    std::atomic<int> active{0}, peak{0};
    srv.server().Post("/stylize", [&](const httplib::Request& req, httplib::Response& res) {
        const int now = ++active;
        int seen = peak;
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(40));
        --active;
        res.set_content(wire::image_response(wire::stylize_request(json::parse(req.body)).image).dump(),
                        "application/json");
    });
    srv.start();
    HttpClientOptions o = fast_retry();
    o.max_in_flight = 2;
    auto client = std::make_shared<HttpBackendClient>(srv.url(), o);
    HttpStylizer stylizer(client);
    std::vector<std::future<RgbImage>> jobs;
    for (int i = 0; i < 6; ++i) {
        jobs.push_back(std::async(std::launch::async, [&] { return stylizer.stylize({noise(3, 3, 1), "p"}); }));
    }
    for (auto& j : jobs) j.get();
    CHECK(peak <= 2);
    CHECK(peak >= 1);
}

}
