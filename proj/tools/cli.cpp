#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "animesh/animator.hpp"
#include "animesh/arap.hpp"
#include "animesh/camera.hpp"
#include "animesh/deform.hpp"
#include "animesh/distill.hpp"
#include "animesh/errors.hpp"
#include "animesh/laplacian.hpp"
#include "animesh/mesh.hpp"
#include "animesh/objectives.hpp"
#include "animesh/parallel.hpp"
#include "animesh/rig.hpp"
#include "animesh/rng.hpp"
#include "animesh/scene.hpp"

namespace animesh::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kConfigEnvVar = "ANIMESH_CONFIG";

// Every tunable has a config-file key of the same name; command-line flags
// override the config file, which overrides these defaults.
struct PipelineConfig {
  std::uint64_t seed = 0;
  int clusters = 80;
  int keyframes = 16;
  double fps_fraction = 0.1;
  double lambda1 = 1e-4;
  double lambda2 = 1.0;
  double tol = 1e-7;
  int regulate_every = 500;
  int regulate_max = 500;
  int total_iters = 30000;
  double step_size = 0.05;
  double sds_weight = 0.1;
  double smoothness_weight = 0.0;
  double fd_step = 1e-4;
  bool clamp_negative_weights = true;
  double fov_min = 15.0;
  double fov_max = 60.0;
  double elevation_min = 10.0;
  double elevation_max = 45.0;
  double azimuth_min = 0.0;
  double azimuth_max = 360.0;
  double distance_min = 2.5;
  double distance_max = 3.0;
  int image_size = 64;
  double guidance_scale = 1.0;
  double t_min = 0.02;
  double t_max = 0.98;
  unsigned threads = 0;  // 0 = hardware default
};

double config_double(const Json& value, const std::string& key) {
  if (!value.is_number()) throw ValidationError("config: key '" + key + "' must be a number");
  return value.get<double>();
}

int config_int(const Json& value, const std::string& key) {
  if (!value.is_number_integer())
    throw ValidationError("config: key '" + key + "' must be an integer");
  return value.get<int>();
}

void apply_config(PipelineConfig& cfg, const Json& j, const std::string& source) {
  if (!j.is_object()) throw ValidationError(source + ": config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "version") {
      const int v = config_int(value, key);
      if (v != 1)
        throw ValidationError(source + ": unsupported config version " + std::to_string(v));
    } else if (key == "seed") {
      if (!value.is_number_integer() || (!value.is_number_unsigned() && value.get<long long>() < 0))
        throw ValidationError("config: key 'seed' must be a nonnegative integer");
      cfg.seed = value.get<std::uint64_t>();
    } else if (key == "clusters") {
      cfg.clusters = config_int(value, key);
    } else if (key == "keyframes") {
      cfg.keyframes = config_int(value, key);
    } else if (key == "fps_fraction") {
      cfg.fps_fraction = config_double(value, key);
    } else if (key == "lambda1") {
      cfg.lambda1 = config_double(value, key);
    } else if (key == "lambda2") {
      cfg.lambda2 = config_double(value, key);
    } else if (key == "tol") {
      cfg.tol = config_double(value, key);
    } else if (key == "regulate_every") {
      cfg.regulate_every = config_int(value, key);
    } else if (key == "regulate_max") {
      cfg.regulate_max = config_int(value, key);
    } else if (key == "total_iters") {
      cfg.total_iters = config_int(value, key);
    } else if (key == "step_size") {
      cfg.step_size = config_double(value, key);
    } else if (key == "sds_weight") {
      cfg.sds_weight = config_double(value, key);
    } else if (key == "smoothness_weight") {
      cfg.smoothness_weight = config_double(value, key);
    } else if (key == "fd_step") {
      cfg.fd_step = config_double(value, key);
    } else if (key == "clamp_negative_weights") {
      if (!value.is_boolean())
        throw ValidationError("config: key 'clamp_negative_weights' must be a boolean");
      cfg.clamp_negative_weights = value.get<bool>();
    } else if (key == "fov_min") {
      cfg.fov_min = config_double(value, key);
    } else if (key == "fov_max") {
      cfg.fov_max = config_double(value, key);
    } else if (key == "elevation_min") {
      cfg.elevation_min = config_double(value, key);
    } else if (key == "elevation_max") {
      cfg.elevation_max = config_double(value, key);
    } else if (key == "azimuth_min") {
      cfg.azimuth_min = config_double(value, key);
    } else if (key == "azimuth_max") {
      cfg.azimuth_max = config_double(value, key);
    } else if (key == "distance_min") {
      cfg.distance_min = config_double(value, key);
    } else if (key == "distance_max") {
      cfg.distance_max = config_double(value, key);
    } else if (key == "image_size") {
      cfg.image_size = config_int(value, key);
    } else if (key == "guidance_scale") {
      cfg.guidance_scale = config_double(value, key);
    } else if (key == "t_min") {
      cfg.t_min = config_double(value, key);
    } else if (key == "t_max") {
      cfg.t_max = config_double(value, key);
    } else if (key == "threads") {
      const int t = config_int(value, key);
      if (t < 0) throw ValidationError("config: key 'threads' must be >= 0");
      cfg.threads = static_cast<unsigned>(t);
    } else {
      throw ValidationError(source + ": unknown config key '" + key + "'");
    }
  }
}

Json config_to_json(const PipelineConfig& cfg) {
  Json j;
  j["version"] = 1;
  j["seed"] = cfg.seed;
  j["clusters"] = cfg.clusters;
  j["keyframes"] = cfg.keyframes;
  j["fps_fraction"] = cfg.fps_fraction;
  j["lambda1"] = cfg.lambda1;
  j["lambda2"] = cfg.lambda2;
  j["tol"] = cfg.tol;
  j["regulate_every"] = cfg.regulate_every;
  j["regulate_max"] = cfg.regulate_max;
  j["total_iters"] = cfg.total_iters;
  j["step_size"] = cfg.step_size;
  j["sds_weight"] = cfg.sds_weight;
  j["smoothness_weight"] = cfg.smoothness_weight;
  j["fd_step"] = cfg.fd_step;
  j["clamp_negative_weights"] = cfg.clamp_negative_weights;
  j["fov_min"] = cfg.fov_min;
  j["fov_max"] = cfg.fov_max;
  j["elevation_min"] = cfg.elevation_min;
  j["elevation_max"] = cfg.elevation_max;
  j["azimuth_min"] = cfg.azimuth_min;
  j["azimuth_max"] = cfg.azimuth_max;
  j["distance_min"] = cfg.distance_min;
  j["distance_max"] = cfg.distance_max;
  j["image_size"] = cfg.image_size;
  j["guidance_scale"] = cfg.guidance_scale;
  j["t_min"] = cfg.t_min;
  j["t_max"] = cfg.t_max;
  j["threads"] = cfg.threads;
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

// The config file must be applied before the other flags are parsed, so
// --config is located with a manual scan first.
std::optional<std::string> find_config_path(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return std::string(env);
  return std::nullopt;
}

CameraRanges camera_ranges(const PipelineConfig& cfg) {
  CameraRanges r;
  r.fov_min = cfg.fov_min;
  r.fov_max = cfg.fov_max;
  r.elevation_min = cfg.elevation_min;
  r.elevation_max = cfg.elevation_max;
  r.azimuth_min = cfg.azimuth_min;
  r.azimuth_max = cfg.azimuth_max;
  r.distance_min = cfg.distance_min;
  r.distance_max = cfg.distance_max;
  return r;
}

Eigen::Vector3d parse_vec3(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3 || !j[0].is_number() || !j[1].is_number() ||
      !j[2].is_number())
    throw ValidationError(path + ": expected 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Camera camera_from_json(const Json& j, const PipelineConfig& cfg) {
  Camera cam;
  cam.width = cfg.image_size;
  cam.height = cfg.image_size;
  if (j.contains("projection")) {
    const std::string p = j["projection"].is_string() ? j["projection"].get<std::string>() : "";
    if (p == "perspective") {
      cam.projection = Camera::Projection::perspective;
    } else if (p == "orthographic") {
      cam.projection = Camera::Projection::orthographic;
    } else {
      throw ValidationError("camera.projection: expected 'perspective' or 'orthographic'");
    }
  }
  if (j.contains("position")) cam.position = parse_vec3(j["position"], "camera.position");
  if (j.contains("target")) cam.target = parse_vec3(j["target"], "camera.target");
  if (j.contains("up")) cam.up = parse_vec3(j["up"], "camera.up");
  if (j.contains("fov_deg")) cam.fov_deg = config_double(j["fov_deg"], "camera.fov_deg");
  if (j.contains("ortho_half_height"))
    cam.ortho_half_height = config_double(j["ortho_half_height"], "camera.ortho_half_height");
  cam.validate();
  return cam;
}

struct ObjectiveSetup {
  std::unique_ptr<MotionObjective> objective;
  Camera camera;  // the view used by image-based objectives (for the log)
  bool image_based = false;
};

// Objective targets come from a JSON file:
//   {"type": "trajectory",    "targets": [{"frame":i,"cluster":k,"position":[x,y,z]}, ...]}
//   {"type": "vertex-target", "targets": [{"frame":i,"vertex":v,"position":[x,y,z]}, ...]}
//   {"type": "silhouette",    "target_obj": "goal.obj", "camera": {...}?}
//   {"type": "sds-toy",       "target_obj": "goal.obj", "sigma": 0.25?, "camera": {...}?}
// Image-based objectives default to a camera sampled from the configured
// ranges. Relative target_obj paths resolve against the targets file.
ObjectiveSetup build_objective(const std::string& kind, const std::filesystem::path& targets_path,
                               const TriangleMesh& mesh, const Rig& rig,
                               const PipelineConfig& cfg, Rng& root) {
  const Json doc = read_json_file(targets_path);
  if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string())
    throw ValidationError(targets_path.string() + ": missing objective 'type'");
  const std::string type = doc["type"].get<std::string>();
  if (type != kind)
    throw ValidationError(targets_path.string() + ": targets are for objective '" + type +
                          "' but '" + kind + "' was requested");

  ObjectiveSetup setup;
  if (kind == "trajectory" || kind == "vertex-target") {
    if (!doc.contains("targets") || !doc["targets"].is_array() || doc["targets"].empty())
      throw ValidationError(targets_path.string() + ": 'targets' must be a non-empty array");
    if (kind == "trajectory") {
      std::vector<TrajectoryTarget> targets;
      for (const Json& t : doc["targets"]) {
        TrajectoryTarget target;
        target.frame = config_int(t.at("frame"), "targets.frame");
        target.cluster = config_int(t.at("cluster"), "targets.cluster");
        target.position = parse_vec3(t.at("position"), "targets.position");
        if (target.frame < 0 || target.frame >= cfg.keyframes)
          throw ValidationError("targets.frame: " + std::to_string(target.frame) +
                                " outside [0, " + std::to_string(cfg.keyframes) + ")");
        if (target.cluster < 0 || target.cluster >= rig.n_clusters)
          throw ValidationError("targets.cluster: " + std::to_string(target.cluster) +
                                " outside [0, " + std::to_string(rig.n_clusters) + ")");
        targets.push_back(target);
      }
      setup.objective = std::make_unique<TrajectoryObjective>(rig, std::move(targets));
    } else {
      std::vector<VertexTarget> targets;
      for (const Json& t : doc["targets"]) {
        VertexTarget target;
        target.frame = config_int(t.at("frame"), "targets.frame");
        target.vertex = config_int(t.at("vertex"), "targets.vertex");
        target.position = parse_vec3(t.at("position"), "targets.position");
        if (target.frame < 0 || target.frame >= cfg.keyframes)
          throw ValidationError("targets.frame: " + std::to_string(target.frame) +
                                " outside [0, " + std::to_string(cfg.keyframes) + ")");
        if (target.vertex < 0 || target.vertex >= mesh.vertex_count())
          throw ValidationError("targets.vertex: " + std::to_string(target.vertex) +
                                " outside [0, " + std::to_string(mesh.vertex_count()) + ")");
        targets.push_back(target);
      }
      setup.objective = std::make_unique<VertexTargetObjective>(std::move(targets));
    }
    return setup;
  }

  if (kind != "silhouette" && kind != "sds-toy")
    throw ValidationError("unknown objective '" + kind + "'");

  setup.image_based = true;
  Rng camera_rng = root.fork("camera");
  setup.camera = doc.contains("camera")
                     ? camera_from_json(doc["camera"], cfg)
                     : sample_camera(camera_rng, camera_ranges(cfg), cfg.image_size,
                                     cfg.image_size);
  if (!doc.contains("target_obj") || !doc["target_obj"].is_string())
    throw ValidationError(targets_path.string() + ": missing 'target_obj'");
  std::filesystem::path goal_path(doc["target_obj"].get<std::string>());
  if (goal_path.is_relative()) goal_path = targets_path.parent_path() / goal_path;
  const TriangleMesh goal = load_obj(goal_path);
  const Silhouette goal_mask = render_silhouette(goal, setup.camera);

  if (kind == "silhouette") {
    setup.objective =
        std::make_unique<SilhouetteObjective>(setup.camera, std::vector<Silhouette>{goal_mask});
    return setup;
  }

  const double sigma =
      doc.contains("sigma") ? config_double(doc["sigma"], "sigma") : 0.25;
  GaussianToyDenoiser denoiser(goal_mask.flatten(), sigma);
  DistillConfig dcfg;
  dcfg.t_min = cfg.t_min;
  dcfg.t_max = cfg.t_max;
  dcfg.guidance_scale = cfg.guidance_scale;
  setup.objective = std::make_unique<SdsToyObjective>(setup.camera, std::move(denoiser),
                                                      std::move(dcfg), cfg.sds_weight,
                                                      root.fork("sds-noise"));
  return setup;
}

Rig rig_for_mesh(const TriangleMesh& mesh, const std::string& rig_path,
                 const PipelineConfig& cfg, Rng& root) {
  if (!rig_path.empty()) {
    RigDoc doc = load_rig_doc(rig_path);
    if (doc.mesh_hash != mesh_content_hash(mesh))
      throw ValidationError(rig_path + ": rig was built for a different mesh");
    doc.rig.validate(mesh);
    if (doc.rig.fps_anchors.empty())
      doc.rig.fps_anchors = fps_sample(mesh, cfg.fps_fraction);
    return doc.rig;
  }
  Rng cluster_rng = root.fork("clustering");
  Rig rig = kmeans_cluster(mesh, cfg.clusters, cluster_rng);
  rig.fps_anchors = fps_sample(mesh, cfg.fps_fraction);
  return rig;
}

void write_history_csv(const std::filesystem::path& path, const AnimateResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "iteration,objective,arap_term,mse_term\n";
  std::size_t next_event = 0;
  for (std::size_t i = 0; i < result.loss_history.size(); ++i) {
    out << i << "," << result.loss_history[i];
    if (next_event < result.regulation_events.size() &&
        result.regulation_events[next_event].iteration == static_cast<int>(i)) {
      out << "," << result.regulation_events[next_event].arap_term << ","
          << result.regulation_events[next_event].mse_term;
      ++next_event;
    } else {
      out << ",,";
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing " + path.string());
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::validation:
      return 3;
    case ErrorCategory::io:
      return 4;
    case ErrorCategory::numerical:
      return 5;
  }
  return 1;
}

void add_common_options(CLI::App* sub, PipelineConfig& cfg) {
  sub->add_option("--config", "JSON config file (also read from ANIMESH_CONFIG)")
      ->type_name("FILE");
  sub->add_option("--seed", cfg.seed, "root random seed");
  sub->add_option("--clusters", cfg.clusters, "number of vertex clusters");
  sub->add_option("--keyframes", cfg.keyframes, "animation frame count");
  sub->add_option("--fps-fraction", cfg.fps_fraction, "anchor fraction of the vertex count");
  sub->add_option("--lambda1", cfg.lambda1, "surface-rigidity weight");
  sub->add_option("--lambda2", cfg.lambda2, "anchor-fidelity weight");
  sub->add_option("--tol", cfg.tol, "regulation convergence threshold");
  sub->add_option("--regulate-every", cfg.regulate_every, "iterations between regulation passes");
  sub->add_option("--regulate-max,--max-iters", cfg.regulate_max,
                  "iteration cap inside one regulation pass");
  sub->add_option("--iters,--total-iters", cfg.total_iters, "outer optimization iterations");
  sub->add_option("--step-size", cfg.step_size, "optimizer learning rate");
  sub->add_option("--sds-weight", cfg.sds_weight, "distillation gradient multiplier");
  sub->add_option("--smoothness-weight", cfg.smoothness_weight, "temporal smoothness weight");
  sub->add_option("--fd-step", cfg.fd_step, "finite-difference step over handle parameters");
  sub->add_flag("--clamp-negative-weights,!--no-clamp-negative-weights",
                cfg.clamp_negative_weights, "clamp negative cotangent weights to zero");
  sub->add_option("--fov-min", cfg.fov_min, "camera sampling: fov lower bound (deg)");
  sub->add_option("--fov-max", cfg.fov_max, "camera sampling: fov upper bound (deg)");
  sub->add_option("--elevation-min", cfg.elevation_min, "camera sampling: elevation lower bound");
  sub->add_option("--elevation-max", cfg.elevation_max, "camera sampling: elevation upper bound");
  sub->add_option("--azimuth-min", cfg.azimuth_min, "camera sampling: azimuth lower bound");
  sub->add_option("--azimuth-max", cfg.azimuth_max, "camera sampling: azimuth upper bound");
  sub->add_option("--distance-min", cfg.distance_min, "camera sampling: distance lower bound");
  sub->add_option("--distance-max", cfg.distance_max, "camera sampling: distance upper bound");
  sub->add_option("--image-size", cfg.image_size, "square render resolution");
  sub->add_option("--guidance-scale", cfg.guidance_scale, "classifier-free guidance scale");
  sub->add_option("--t-min", cfg.t_min, "diffusion step window lower fraction");
  sub->add_option("--t-max", cfg.t_max, "diffusion step window upper fraction");
  sub->add_option("--threads", cfg.threads, "worker thread cap (0 = hardware)");
}

RigidityConfig rigidity_from(const PipelineConfig& cfg) {
  RigidityConfig r;
  r.lambda1 = cfg.lambda1;
  r.lambda2 = cfg.lambda2;
  r.tol = cfg.tol;
  r.max_iters = cfg.regulate_max;
  r.regulate_every = cfg.regulate_every;
  return r;
}

}  // namespace

int run(int argc, const char* const* argv) {
  PipelineConfig cfg;
  try {
    if (const std::optional<std::string> config_path = find_config_path(argc, argv))
      apply_config(cfg, read_json_file(*config_path), *config_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  }

  CLI::App app{"handle-based mesh animation toolkit"};
  app.set_version_flag("--version", "0.1.0");
  app.require_subcommand(1);

  // cluster ------------------------------------------------------------
  std::string cluster_in;
  std::string cluster_out;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "partition a mesh into handle regions");
  cluster_cmd->add_option("input", cluster_in, "input OBJ mesh")->required();
  cluster_cmd->add_option("-o,--out", cluster_out, "output rig JSON")->required();
  add_common_options(cluster_cmd, cfg);
  cluster_cmd->callback([&] {
    if (cfg.threads > 0) set_max_workers(cfg.threads);
    const TriangleMesh mesh = load_obj(cluster_in);
    Rng root(cfg.seed);
    Rng cluster_rng = root.fork("clustering");
    Rig rig = kmeans_cluster(mesh, cfg.clusters, cluster_rng);
    rig.fps_anchors = fps_sample(mesh, cfg.fps_fraction);
    RigDoc doc;
    doc.mesh_hash = mesh_content_hash(mesh);
    doc.rig = rig;
    save_doc(doc, cluster_out);
    std::cerr << "cluster: " << mesh.vertex_count() << " vertices, " << rig.n_clusters
              << " clusters, " << rig.fps_anchors.size() << " anchors -> " << cluster_out << "\n";
  });

  // animate ------------------------------------------------------------
  std::string animate_in;
  std::string animate_out;
  std::string animate_rig;
  std::string animate_objective = "trajectory";
  std::string animate_targets;
  std::string animate_history;
  CLI::App* animate_cmd = app.add_subcommand("animate", "optimize keyframe motion for a mesh");
  animate_cmd->add_option("input", animate_in, "input OBJ mesh")->required();
  animate_cmd->add_option("-o,--out", animate_out, "output animation JSON")->required();
  animate_cmd->add_option("--rig", animate_rig, "rig JSON (clustered on the fly if omitted)");
  animate_cmd
      ->add_option("--objective", animate_objective,
                   "one of trajectory, vertex-target, silhouette, sds-toy")
      ->check(CLI::IsMember({"trajectory", "vertex-target", "silhouette", "sds-toy"}));
  animate_cmd->add_option("--targets", animate_targets, "objective targets JSON")->required();
  animate_cmd->add_option("--history", animate_history, "write per-iteration loss CSV here");
  add_common_options(animate_cmd, cfg);
  animate_cmd->callback([&] {
    if (cfg.threads > 0) set_max_workers(cfg.threads);
    const TriangleMesh mesh = load_obj(animate_in);
    Rng root(cfg.seed);
    const Rig rig = rig_for_mesh(mesh, animate_rig, cfg, root);
    const CotanLaplacian lap = cotangent_weights(mesh, cfg.clamp_negative_weights);
    if (lap.has_negative_weights)
      std::cerr << "warning: negative cotangent weights present; regulation may not decrease "
                   "monotonically\n";
    ObjectiveSetup setup = build_objective(animate_objective, animate_targets, mesh, rig, cfg, root);

    AnimateSchedule schedule;
    schedule.total_iters = cfg.total_iters;
    schedule.regulate_every = cfg.regulate_every;
    schedule.regulate_max = cfg.regulate_max;
    schedule.keyframes = cfg.keyframes;
    schedule.step_size = cfg.step_size;
    schedule.sds_weight = cfg.sds_weight;
    schedule.smoothness_weight = cfg.smoothness_weight;
    schedule.fd_step = cfg.fd_step;

    const AnimateResult result =
        animate(mesh, rig, lap, *setup.objective, schedule, rigidity_from(cfg));

    const AnimationDoc doc = make_animation_doc(mesh, rig, result.motion, cfg.seed,
                                                config_to_json(cfg).dump(2));
    save_doc(doc, animate_out);
    if (!animate_history.empty()) write_history_csv(animate_history, result);
    if (result.refit_rank_deficient)
      std::cerr << "warning: some clusters lack 3 non-collinear vertices; their rotations were "
                   "fit as translations\n";
    std::cerr << "animate: " << result.loss_history.size() << " iterations, final loss "
              << (result.loss_history.empty() ? 0.0 : result.loss_history.back()) << ", "
              << result.regulation_calls << " regulation passes -> " << animate_out << "\n";
  });

  // regulate -----------------------------------------------------------
  std::string regulate_in;
  std::string regulate_out;
  CLI::App* regulate_cmd =
      app.add_subcommand("regulate", "restore surface continuity of a stored animation");
  regulate_cmd->add_option("input", regulate_in, "animation JSON")->required();
  regulate_cmd->add_option("-o,--out", regulate_out, "output animation JSON (default: input)");
  add_common_options(regulate_cmd, cfg);
  regulate_cmd->callback([&] {
    if (cfg.threads > 0) set_max_workers(cfg.threads);
    AnimationDoc doc = load_animation_doc(regulate_in);
    if (doc.rig.fps_anchors.empty())
      throw ValidationError(regulate_in + ": rig has no anchor vertices");
    const CotanLaplacian lap = cotangent_weights(doc.mesh, cfg.clamp_negative_weights);
    const KeyframeSequence driven = drive_mesh(doc.mesh, doc.rig, doc.motion);
    const RegulationResult reg = regulate(driven, doc.rig.fps_anchors, lap, rigidity_from(cfg));
    if (reg.negative_weights)
      std::cerr << "warning: negative cotangent weights present; the loss may not decrease "
                   "monotonically\n";
    for (std::size_t n = 0; n < reg.traces.size(); ++n) {
      for (const RegulationRow& row : reg.traces[n].rows)
        std::cerr << "frame " << n << " iter " << row.iteration << " E " << row.arap_term
                  << " MSE " << row.mse_term << " L " << row.loss << "\n";
      std::cerr << "frame " << n << " stop " << reg.traces[n].stop_reason << "\n";
    }
    const RefitResult refit = refit_handles(doc.rig, doc.mesh, reg.frames);
    if (refit.rank_deficient)
      std::cerr << "warning: some clusters lack 3 non-collinear vertices; their rotations were "
                   "fit as translations\n";
    doc.motion = refit.motion;
    const std::string out = regulate_out.empty() ? regulate_in : regulate_out;
    save_doc(doc, out);
    std::cerr << "regulate: loss " << reg.initial_loss << " -> " << reg.final_loss << " over "
              << reg.traces.size() << " frames -> " << out << "\n";
  });

  // compose ------------------------------------------------------------
  std::string compose_in;
  std::string compose_frames;
  CLI::App* compose_cmd = app.add_subcommand("compose", "merge placed animations into one clip");
  compose_cmd->add_option("input", compose_in, "scene JSON")->required();
  compose_cmd->add_option("--frames", compose_frames, "directory for the exported OBJ frames")
      ->required();
  add_common_options(compose_cmd, cfg);
  compose_cmd->callback([&] {
    if (cfg.threads > 0) set_max_workers(cfg.threads);
    const SceneDoc scene = load_scene_doc(compose_in);
    const KeyframeSequence merged =
        compose(scene, std::filesystem::path(compose_in).parent_path());
    export_frames(merged, compose_frames);
    std::cerr << "compose: " << scene.placements.size() << " objects, "
              << merged.frame_count() << " frames, " << merged.base.vertex_count()
              << " vertices -> " << compose_frames << "\n";
  });

  // export -------------------------------------------------------------
  std::string export_in;
  std::string export_frames_dir;
  CLI::App* export_cmd = app.add_subcommand("export", "write a stored animation as OBJ frames");
  export_cmd->add_option("input", export_in, "animation JSON")->required();
  export_cmd->add_option("--frames", export_frames_dir, "directory for the exported OBJ frames")
      ->required();
  add_common_options(export_cmd, cfg);
  export_cmd->callback([&] {
    if (cfg.threads > 0) set_max_workers(cfg.threads);
    const AnimationDoc doc = load_animation_doc(export_in);
    const KeyframeSequence frames = drive_mesh(doc.mesh, doc.rig, doc.motion);
    export_frames(frames, export_frames_dir);
    std::cerr << "export: " << frames.frame_count() << " frames -> " << export_frames_dir
              << "\n";
  });

  // info ---------------------------------------------------------------
  std::string info_in;
  CLI::App* info_cmd = app.add_subcommand("info", "summarize a stored animation");
  info_cmd->add_option("input", info_in, "animation JSON")->required();
  add_common_options(info_cmd, cfg);
  info_cmd->callback([&] {
    if (cfg.threads > 0) set_max_workers(cfg.threads);
    const AnimationDoc doc = load_animation_doc(info_in);
    const KeyframeSequence frames = drive_mesh(doc.mesh, doc.rig, doc.motion);
    const CotanLaplacian lap = cotangent_weights(doc.mesh, cfg.clamp_negative_weights);
    double loss = 0.0;
    if (doc.rig.fps_anchors.empty()) {
      for (const std::vector<Eigen::Vector3d>& frame : frames.frames)
        loss += cfg.lambda1 * arap_energy(doc.mesh, frame, lap);
    } else {
      loss = rigidity_loss(frames, frames.frames, doc.rig.fps_anchors, lap, rigidity_from(cfg));
    }
    std::cout << "frames " << frames.frame_count() << "\n"
              << "clusters " << doc.rig.n_clusters << "\n"
              << "vertices " << doc.mesh.vertex_count() << "\n"
              << "faces " << doc.mesh.face_count() << "\n"
              << "anchors " << doc.rig.fps_anchors.size() << "\n"
              << "rigidity_loss " << loss << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace animesh::cli
