#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "animesh/arap.hpp"
#include "animesh/camera.hpp"
#include "animesh/deform.hpp"
#include "animesh/distill.hpp"
#include "animesh/laplacian.hpp"
#include "animesh/mesh.hpp"
#include "animesh/rig.hpp"
#include "animesh/rng.hpp"

namespace {

using namespace animesh;

// Cylinder tube: `segs` rings of `ring` vertices each, quads split into
// triangles. Open ends keep every vertex's one-ring nonempty.
TriangleMesh make_cylinder(int ring, int segs) {
  TriangleMesh mesh;
  const double pi = 3.14159265358979323846;
  for (int s = 0; s <= segs; ++s) {
    const double y = -1.0 + 2.0 * s / segs;
    for (int r = 0; r < ring; ++r) {
      const double a = 2.0 * pi * r / ring;
      mesh.vertices.push_back({0.5 * std::cos(a), y, 0.5 * std::sin(a)});
    }
  }
  for (int s = 0; s < segs; ++s) {
    for (int r = 0; r < ring; ++r) {
      const int a = s * ring + r;
      const int b = s * ring + (r + 1) % ring;
      const int c = a + ring;
      const int d = b + ring;
      mesh.faces.push_back({a, b, d});
      mesh.faces.push_back({a, d, c});
    }
  }
  return mesh;
}

MotionParams bend_motion(const Rig& rig, int frames) {
  MotionParams motion = MotionParams::identity(frames, rig.n_clusters);
  for (int n = 0; n < frames; ++n) {
    const double angle = 0.5 * n / std::max(1, frames - 1);
    for (int k = 0; k < rig.n_clusters; ++k) {
      motion.rotations[n][k] = {std::cos(angle / 2), 0.0, 0.0, std::sin(angle / 2)};
      motion.translations[n][k] = {0.1 * n * k, 0.0, 0.0};
    }
  }
  return motion;
}

void BM_CotangentWeights(benchmark::State& state) {
  const TriangleMesh mesh = make_cylinder(32, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(cotangent_weights(mesh));
  }
  state.SetComplexityN(mesh.face_count());
}
BENCHMARK(BM_CotangentWeights)->Arg(16)->Arg(64)->Arg(128)->Complexity();

void BM_DriveMesh(benchmark::State& state) {
  const TriangleMesh mesh = make_cylinder(32, 90);
  Rng rng(7);
  const Rig rig = kmeans_cluster(mesh, 8, rng);
  const MotionParams motion = bend_motion(rig, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(drive_mesh(mesh, rig, motion));
  }
}
BENCHMARK(BM_DriveMesh)->Arg(4)->Arg(16);

void BM_OptimalRotations(benchmark::State& state) {
  const TriangleMesh mesh = make_cylinder(32, static_cast<int>(state.range(0)));
  const CotanLaplacian lap = cotangent_weights(mesh);
  Rng rng(7);
  const Rig rig = kmeans_cluster(mesh, 4, rng);
  const MotionParams motion = bend_motion(rig, 2);
  const KeyframeSequence frames = drive_mesh(mesh, rig, motion);
  for (auto _ : state) {
    benchmark::DoNotOptimize(optimal_rotations(mesh, frames.frames[1], lap));
  }
}
BENCHMARK(BM_OptimalRotations)->Arg(16)->Arg(64);

void BM_RegulateFrame(benchmark::State& state) {
  const TriangleMesh mesh = make_cylinder(24, 40);
  const CotanLaplacian lap = cotangent_weights(mesh);
  Rng rng(7);
  Rig rig = kmeans_cluster(mesh, 3, rng);
  rig.fps_anchors = fps_sample(mesh, 0.1);
  const MotionParams motion = bend_motion(rig, 2);
  const KeyframeSequence frames = drive_mesh(mesh, rig, motion);
  RigidityConfig cfg;
  cfg.max_iters = static_cast<int>(state.range(0));
  cfg.tol = 0.0;  // fixed iteration count
  const Regulator regulator(mesh, lap, rig.fps_anchors, cfg);
  for (auto _ : state) {
    std::vector<Eigen::Vector3d> out;
    benchmark::DoNotOptimize(regulator.regulate_frame(frames.frames[1], out));
  }
}
BENCHMARK(BM_RegulateFrame)->Arg(1)->Arg(8);

void BM_SdsGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(11);
  Eigen::VectorXd mu(n);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) {
    mu[i] = rng.normal();
    x[i] = rng.normal();
  }
  const GaussianToyDenoiser denoiser(mu, 0.3);
  const DistillConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sds_gradient(x, denoiser, "", cfg, rng));
  }
}
BENCHMARK(BM_SdsGradient)->Arg(4096)->Arg(16384);

void BM_RenderSilhouette(benchmark::State& state) {
  const TriangleMesh mesh = make_cylinder(32, 60);
  Camera camera;
  camera.width = static_cast<int>(state.range(0));
  camera.height = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_silhouette(mesh, camera));
  }
}
BENCHMARK(BM_RenderSilhouette)->Arg(64)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
