#include "primscene/cli.hpp"

#include "primscene/config.hpp"
#include "primscene/encoding.hpp"
#include "primscene/error.hpp"
#include "primscene/fixtures.hpp"
#include "primscene/scene_store.hpp"
#include "primscene/service.hpp"

#include "CLI11.hpp"
#include "httplib.h"
#include <spdlog/fmt/fmt.h>

#include <ostream>
#include <sstream>

namespace fs = std::filesystem;

namespace primscene {
namespace {

std::vector<double> parse_numbers(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != cell.size()) {
            throw Error(ErrorCode::InvalidRequest, std::string(what) + ": '" + cell + "' is not a number");
        }
        out.push_back(v);
    }
    return out;
}

void print_report(const PipelineReport& report, std::ostream& out) {
    out << fmt::format("{:<16} {:>12} {:>12} {:>12} {:>12}\n", "Object", "Stylize (s)", "Mesh (s)", "Integrate (min)",
                       "Total (min)");
    for (const auto& r : report.rows) {
        out << fmt::format("{:<16} {:>12.3f} {:>12.3f} {:>15.4f} {:>12.4f}\n", r.name, r.stylize_seconds,
                           r.meshgen_seconds, r.integrate_minutes, r.total_minutes);
    }
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Insert stylized objects into a NeRF capture"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config; PRIMSCENE_<FIELD> variables override it");

    auto config = [&] {
        return load_config(config_path.empty() ? std::nullopt : std::optional<fs::path>(config_path));
    };

    std::string dataset_arg;
    auto* validate = app.add_subcommand("validate", "Load a dataset and report what was found");
    validate->add_option("dataset", dataset_arg, "Dataset directory or transforms.json")->required();

    std::string scene_arg;
    auto* init = app.add_subcommand("init", "Create a scene directory for a base dataset");
    init->add_option("scene", scene_arg)->required();
    init->add_option("--dataset", dataset_arg)->required();

    std::string synth_out;
    SynthOptions synth_opts;
    auto* synth = app.add_subcommand("synth", "Write the synthetic room dataset");
    synth->add_option("out", synth_out)->required();
    synth->add_option("--frames", synth_opts.frames)->check(CLI::PositiveNumber);
    synth->add_option("--width", synth_opts.width)->check(CLI::PositiveNumber);
    synth->add_option("--height", synth_opts.height)->check(CLI::PositiveNumber);
    synth->add_option("--seed", synth_opts.seed);

    std::string name, kind = "box", pose_text = "0,0,0", scale_text = "0.5,0.5,0.5", prompt, strategy = "add_new_images";
    auto* place = app.add_subcommand("place", "Queue a primitive with a style prompt");
    place->add_option("scene", scene_arg)->required();
    place->add_option("--name", name, "Unique object name (default: <kind><n>)");
    place->add_option("--kind", kind, "box, sphere or cylinder");
    place->add_option("--pose", pose_text, "tx,ty,tz[,rx,ry,rz] with XYZ Euler angles in degrees");
    place->add_option("--scale", scale_text, "Half extents sx,sy,sz");
    place->add_option("--prompt", prompt)->required();
    place->add_option("--strategy", strategy, "add_new_images or modify_existing");

    auto* run = app.add_subcommand("run", "Insert every queued object");
    run->add_option("scene", scene_arg)->required();

    std::string report_out;
    auto* report = app.add_subcommand("report", "Print the timing report as CSV");
    report->add_option("scene", scene_arg)->required();
    report->add_option("--out", report_out, "Also write the CSV to this file");

    std::string scenes_root = ".";
    int port = 0;
    auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP service");
    serve_cmd->add_option("--scenes", scenes_root, "Directory holding scene directories");
    serve_cmd->add_option("--port", port, "Overrides the configured port");

    std::string backend_host = "127.0.0.1";
    int backend_port = 8090;
    auto* serve_backends = app.add_subcommand("serve-backends", "Serve the mock backends over HTTP");
    serve_backends->add_option("--dataset", dataset_arg, "Dataset answering /render_scene")->required();
    serve_backends->add_option("--host", backend_host);
    serve_backends->add_option("--port", backend_port);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    bool pipeline_started = false;
    try {
        if (*validate) {
            std::vector<std::string> warnings;
            const NerfDataset ds = load_dataset(dataset_arg, &warnings);
            for (const auto& w : warnings) err << "warning: " << w << '\n';
            out << ds.size() << " frames\n";
            out << fmt::format("{}x{} fx={} fy={} cx={} cy={}\n", ds.intrinsics.width, ds.intrinsics.height,
                               ds.intrinsics.fx, ds.intrinsics.fy, ds.intrinsics.cx, ds.intrinsics.cy);
        } else if (*init) {
            SceneDir::create(scene_arg, dataset_arg);
            out << "created scene " << scene_arg << '\n';
        } else if (*synth) {
            const NerfDataset ds = synth_room_dataset(synth_opts);
            save_dataset(ds, synth_out);
            out << ds.size() << " frames written to " << synth_out << '\n';
        } else if (*place) {
            const SceneDir dir(scene_arg);
            auto queued = dir.queued();
            const auto pose = parse_numbers(pose_text, "--pose");
            const auto scale = parse_numbers(scale_text, "--scale");
            if (pose.size() != 3 && pose.size() != 6) {
                throw Error(ErrorCode::InvalidRequest, "--pose takes 3 or 6 numbers");
            }
            if (scale.size() != 3) {
                throw Error(ErrorCode::InvalidRequest, "--scale takes 3 numbers");
            }
            if (name.empty()) {
                name = kind + std::to_string(queued.size() + 1);
            }
            const Mat3 rotation =
                pose.size() == 6 ? rotation_from_euler_deg(pose[3], pose[4], pose[5]) : Mat3::Identity();
            nlohmann::json spec = spec_to_json(ObjectSpec{name,
                                                          {PrimitiveKind::Box, {rotation, Vec3(pose[0], pose[1], pose[2])},
                                                           Vec3(scale[0], scale[1], scale[2])},
                                                          prompt,
                                                          InsertStrategy::AddNewImages});
            spec["kind"] = kind;
            spec["strategy"] = strategy;
            const ObjectSpec parsed = spec_from_json(spec);
            for (const auto& q : queued) {
                if (q.name == parsed.name) {
                    throw Error(ErrorCode::InvalidRequest, "object '" + parsed.name + "' already exists in this scene");
                }
            }
            queued.push_back(parsed);
            dir.save_queued(queued);
            out << "queued " << parsed.name << " (" << queued.size() << " objects)\n";
        } else if (*run) {
            const Config cfg = config();
            const SceneDir dir(scene_arg);
            SceneRunHooks hooks;
            std::pair<std::size_t, std::optional<Stage>> last;
            hooks.on_progress = [&](const JobState& job) {
                pipeline_started = true;
                if (job.stage && job.status == JobStatus::Running && last != std::pair{job.object_index, job.stage}) {
                    last = {job.object_index, job.stage};
                    err << fmt::format("[{}/{}] {}: {}\n", job.object_index + 1, job.object_count, job.object_name,
                                       to_string(*job.stage));
                }
            };
            const PipelineReport rep = run_scene(dir, make_backends(cfg.endpoints, cfg.client()), cfg.pipeline(), hooks);
            print_report(rep, out);
        } else if (*report) {
            const auto rep = SceneDir(scene_arg).load_report();
            if (!rep) {
                throw Error(ErrorCode::NotFound, "no report for scene " + scene_arg);
            }
            const std::string csv = rep->to_csv();
            out << csv;
            if (!report_out.empty()) write_file(report_out, csv);
        } else if (*serve_cmd) {
            Config cfg = config();
            if (port > 0) cfg.port = port;
            return serve(scenes_root, cfg);
        } else if (*serve_backends) {
            auto ds = std::make_shared<const NerfDataset>(load_dataset(dataset_arg));
            httplib::Server server;
            mount_backend_routes(server, Backends::mock(), ds);
            out << "mock backends on http://" << backend_host << ':' << backend_port << std::endl;
            return server.listen(backend_host, backend_port) ? kExitOk : kExitPipeline;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return pipeline_started ? kExitPipeline : kExitInvalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitPipeline;
    }
    return kExitOk;
}

}  // namespace primscene
