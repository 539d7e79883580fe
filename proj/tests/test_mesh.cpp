#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "animesh/errors.hpp"
#include "animesh/mesh.hpp"
#include "support/fixtures.hpp"

using namespace animesh;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("validate accepts a minimal triangle") {
  CHECK_NOTHROW(fixtures::minimal_triangle().validate());
}

TEST_CASE("validate rejects malformed meshes") {
  TriangleMesh mesh = fixtures::minimal_triangle();

  SUBCASE("face index out of range") {
    mesh.faces[0] = {0, 1, 7};
    CHECK_THROWS_AS(mesh.validate(), ValidationError);
  }
  SUBCASE("negative face index") {
    mesh.faces[0] = {0, 1, -1};
    CHECK_THROWS_AS(mesh.validate(), ValidationError);
  }
  SUBCASE("repeated vertex in a face") {
    mesh.faces[0] = {0, 1, 1};
    CHECK_THROWS_AS(mesh.validate(), ValidationError);
  }
  SUBCASE("fewer than 3 vertices") {
    mesh.vertices.resize(2);
    CHECK_THROWS_AS(mesh.validate(), ValidationError);
  }
  SUBCASE("no faces") {
    mesh.faces.clear();
    CHECK_THROWS_AS(mesh.validate(), ValidationError);
  }
}

TEST_CASE("centroid averages the vertices") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 4, 0}, {2, 4, 8}};
  mesh.faces = {{0, 1, 2}};
  CHECK((mesh.centroid() - Eigen::Vector3d(1, 2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("load_obj reads the minimal file") {
  const auto path = temp_file("minimal.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
  const TriangleMesh mesh = load_obj(path);
  CHECK(mesh.vertex_count() == 3);
  CHECK(mesh.face_count() == 1);
  CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
  CHECK(mesh.vertices[1] == Eigen::Vector3d(1, 0, 0));
}

TEST_CASE("load_obj fan-triangulates polygons") {
  const auto path = temp_file("quad.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  const TriangleMesh mesh = load_obj(path);
  REQUIRE(mesh.face_count() == 2);
  CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
  CHECK(mesh.faces[1] == std::array<int, 3>{0, 2, 3});

  const auto penta = temp_file("penta.obj");
  write_file(penta,
             "v 0 0 0\nv 1 0 0\nv 2 1 0\nv 1 2 0\nv 0 1 0\nf 1 2 3 4 5\n");
  CHECK(load_obj(penta).face_count() == 3);
}

TEST_CASE("load_obj drops texture and normal data") {
  const auto path = temp_file("textured.obj");
  write_file(path,
             "# comment\nvt 0.5 0.5\nvn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\n"
             "usemtl stone\nf 1/1/1 2/1/1 3/1/1\n");
  const TriangleMesh mesh = load_obj(path);
  CHECK(mesh.vertex_count() == 3);
  CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
}

TEST_CASE("load_obj reports the offending line") {
  const auto path = temp_file("badindex.obj");
  write_file(path, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
  try {
    load_obj(path);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    CHECK(std::string(e.what()).find("9") != std::string::npos);
  }

  const auto bad_vertex = temp_file("badvertex.obj");
  write_file(bad_vertex, "v 0 0\n");
  try {
    load_obj(bad_vertex);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find(":1:") != std::string::npos);
  }
}

TEST_CASE("load_obj rejects unusable input") {
  const auto missing = temp_file("does_not_exist_anywhere.obj");
  std::filesystem::remove(missing);
  CHECK_THROWS_AS(load_obj(missing), IoError);

  const auto empty = temp_file("empty.obj");
  write_file(empty, "# nothing here\n");
  CHECK_THROWS_AS(load_obj(empty), ValidationError);

  const auto zero_index = temp_file("zeroindex.obj");
  write_file(zero_index, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
  CHECK_THROWS_AS(load_obj(zero_index), ValidationError);

  const auto garbage = temp_file("garbage.obj");
  write_file(garbage, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 x\n");
  CHECK_THROWS_AS(load_obj(garbage), ValidationError);
}

TEST_CASE("save then load is the identity within 1e-9") {
  TriangleMesh mesh = fixtures::icosphere(1);
  // perturb with awkward digits to exercise the format precision
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    mesh.vertices[i] *= 1.0 + 1.23456789012e-4 * static_cast<double>(i % 7);
  const auto path = temp_file("roundtrip.obj");
  save_obj(mesh, path);
  const TriangleMesh back = load_obj(path);

  REQUIRE(back.vertex_count() == mesh.vertex_count());
  REQUIRE(back.face_count() == mesh.face_count());
  CHECK(back.faces == mesh.faces);
  double max_err = 0.0;
  for (int i = 0; i < mesh.vertex_count(); ++i)
    max_err = std::max(max_err, (back.vertices[i] - mesh.vertices[i]).cwiseAbs().maxCoeff());
  CHECK(max_err < 1e-9);
}

TEST_CASE("obj_text is stable across round trips") {
  const TriangleMesh mesh = fixtures::make_cylinder(8, 4);
  const auto path = temp_file("stable.obj");
  save_obj(mesh, path);
  const TriangleMesh back = load_obj(path);
  CHECK(obj_text(back) == obj_text(mesh));
}

TEST_CASE("save_obj fails cleanly on an unwritable path") {
  CHECK_THROWS_AS(save_obj(fixtures::minimal_triangle(), "/nonexistent_dir_7q/x.obj"), IoError);
}

TEST_CASE("content hash pins the mesh") {
  TriangleMesh mesh = fixtures::minimal_triangle();
  const std::string h = mesh_content_hash(mesh);
  CHECK(h.size() == 16);
  CHECK(h.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(mesh_content_hash(mesh) == h);

  TriangleMesh moved = mesh;
  moved.vertices[0].x() += 1e-6;
  CHECK(mesh_content_hash(moved) != h);

  TriangleMesh rewound = mesh;
  rewound.faces[0] = {1, 2, 0};
  CHECK(mesh_content_hash(rewound) != h);
}
