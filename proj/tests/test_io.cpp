#include <doctest.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>

#include "pcu/config.hpp"
#include "pcu/training.hpp"
#include "pcu/io.hpp"
#include "pcu/rng.hpp"
#include "support.hpp"

using namespace pcu;
using namespace testsupport;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("xyz parses triples and comments") {
    auto p = temp_path("pcu_io_basic.xyz");
    write_file(p, "# header\n0 0 0\n1 2 3  # trailing comment\n\n");
    PointCloud cloud = io::read_xyz(p);
    REQUIRE(cloud.size() == 2);
    CHECK(cloud.points[1] == Vec3{1, 2, 3});
    std::filesystem::remove(p);
}

TEST_CASE("xyz write-then-read is bit-identical") {
    auto pts = random_sphere_points(100, 1);
    // Exercise awkward magnitudes.
    pts[0] = {1.0 / 3.0, 1e-300, -1e17};
    pts[1] = {0.1, -0.30000000000000004, 12345.678901234567};
    auto p = temp_path("pcu_io_roundtrip.xyz");
    io::write_xyz(p, pts);
    PointCloud back = io::read_xyz(p);
    REQUIRE(back.size() == 100);
    for (int i = 0; i < 100; ++i) CHECK(back.points[i] == pts[i]);

    // Writing the same data twice yields the same bytes.
    auto p2 = temp_path("pcu_io_roundtrip2.xyz");
    io::write_xyz(p2, pts);
    CHECK(read_file(p) == read_file(p2));
    std::filesystem::remove(p);
    std::filesystem::remove(p2);
}

TEST_CASE("xyz parse error cites the line number") {
    auto p = temp_path("pcu_io_bad.xyz");
    write_file(p, "0 0 0\n1 1 1\n1 2\n");
    CHECK_THROWS_WITH_AS(io::read_xyz(p), doctest::Contains(":3:"), std::runtime_error);
    std::filesystem::remove(p);
}

TEST_CASE("obj cube has 8 vertices and 12 triangles") {
    auto p = temp_path("pcu_io_cube.obj");
    std::string obj = "# cube\n";
    auto cube = make_cube_mesh();
    for (const Vec3& v : cube.vertices)
        obj += "v " + std::to_string(v.x) + " " + std::to_string(v.y) + " " +
               std::to_string(v.z) + "\n";
    for (const auto& f : cube.faces)
        obj += "f " + std::to_string(f[0] + 1) + " " + std::to_string(f[1] + 1) + " " +
               std::to_string(f[2] + 1) + "\n";
    write_file(p, obj);
    TriangleMesh mesh = io::read_obj(p);
    CHECK(mesh.vertex_count() == 8);
    CHECK(mesh.face_count() == 12);
    std::filesystem::remove(p);
}

TEST_CASE("obj quad faces fan-triangulate and suffixes are ignored") {
    auto p = temp_path("pcu_io_quad.obj");
    write_file(p,
               "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
               "vt 0 0\nvn 0 0 1\n"
               "f 1/1/1 2/1/1 3/1/1 4/1/1\n");
    TriangleMesh mesh = io::read_obj(p);
    REQUIRE(mesh.face_count() == 2);
    CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
    CHECK(mesh.faces[1] == std::array<int, 3>{0, 2, 3});
    std::filesystem::remove(p);
}

TEST_CASE("binary and ascii ply agree") {
    auto mesh = make_sphere_mesh(6, 8);

    std::string ascii = "ply\nformat ascii 1.0\nelement vertex " +
                        std::to_string(mesh.vertex_count()) +
                        "\nproperty float x\nproperty float y\nproperty float z\n"
                        "element face " +
                        std::to_string(mesh.face_count()) +
                        "\nproperty list uchar int vertex_indices\nend_header\n";
    auto exact = [](float f) {
        char buf[32];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), static_cast<double>(f));
        (void)ec;
        return std::string(buf, end);
    };
    for (const Vec3& v : mesh.vertices)
        ascii += exact(static_cast<float>(v.x)) + " " + exact(static_cast<float>(v.y)) + " " +
                 exact(static_cast<float>(v.z)) + "\n";
    for (const auto& f : mesh.faces)
        ascii += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
                 std::to_string(f[2]) + "\n";

    std::string binary = "ply\nformat binary_little_endian 1.0\nelement vertex " +
                         std::to_string(mesh.vertex_count()) +
                         "\nproperty float x\nproperty float y\nproperty float z\n"
                         "element face " +
                         std::to_string(mesh.face_count()) +
                         "\nproperty list uchar int vertex_indices\nend_header\n";
    for (const Vec3& v : mesh.vertices) {
        float c[3] = {static_cast<float>(v.x), static_cast<float>(v.y),
                      static_cast<float>(v.z)};
        binary.append(reinterpret_cast<const char*>(c), 12);
    }
    for (const auto& f : mesh.faces) {
        unsigned char n = 3;
        binary.push_back(static_cast<char>(n));
        int idx[3] = {f[0], f[1], f[2]};
        binary.append(reinterpret_cast<const char*>(idx), 12);
    }

    auto pa = temp_path("pcu_io_a.ply");
    auto pb = temp_path("pcu_io_b.ply");
    write_file(pa, ascii);
    write_file(pb, binary);
    TriangleMesh ma = io::read_ply(pa);
    TriangleMesh mb = io::read_ply(pb);
    REQUIRE(ma.vertex_count() == mb.vertex_count());
    REQUIRE(ma.face_count() == mb.face_count());
    for (int i = 0; i < ma.vertex_count(); ++i) CHECK(ma.vertices[i] == mb.vertices[i]);
    for (int i = 0; i < ma.face_count(); ++i) CHECK(ma.faces[i] == mb.faces[i]);
    std::filesystem::remove(pa);
    std::filesystem::remove(pb);
}

TEST_CASE("unsupported ply layouts are rejected explicitly") {
    auto p = temp_path("pcu_io_bad.ply");
    write_file(p, "ply\nformat binary_big_endian 1.0\nelement vertex 1\n"
                  "property float x\nproperty float y\nproperty float z\nend_header\n");
    CHECK_THROWS_WITH_AS(io::read_ply(p), doctest::Contains("unsupported"), std::runtime_error);

    write_file(p, "ply\nformat ascii 1.0\nelement vertex 1\n"
                  "property list uchar float x\nend_header\n");
    CHECK_THROWS_WITH_AS(io::read_ply(p), doctest::Contains("unsupported"), std::runtime_error);
    std::filesystem::remove(p);
}

TEST_CASE("area-weighted samples stay inside a single triangle") {
    TriangleMesh tri;
    tri.vertices = {{0, 0, 0}, {2, 0, 0}, {0, 2, 0}};
    tri.faces = {{0, 1, 2}};
    PointCloud cloud = io::sample_mesh(tri, 1000, io::SampleMode::kAreaWeighted, 9);
    REQUIRE(cloud.size() == 1000);
    for (const Vec3& q : cloud.points) {
        CHECK(q.z == 0.0);
        CHECK(q.x >= -1e-12);
        CHECK(q.y >= -1e-12);
        CHECK(q.x + q.y <= 2.0 + 1e-12);
    }
}

TEST_CASE("area-weighted sampling splits 9:1 by area") {
    TriangleMesh two;
    two.vertices = {{0, 0, 0}, {9, 0, 0}, {0, 2, 0}, {10, 0, 0}, {11, 0, 0}, {10, 1, 0}};
    two.faces = {{0, 1, 2}, {3, 4, 5}};  // areas 9 and 0.5 -> ratio 18:1
    const int n = 4000;
    PointCloud cloud = io::sample_mesh(two, n, io::SampleMode::kAreaWeighted, 11);
    int in_big = 0;
    for (const Vec3& q : cloud.points)
        if (q.x < 9.5) ++in_big;
    double expected = n * 18.0 / 19.0;
    double sigma = std::sqrt(n * (18.0 / 19.0) * (1.0 / 19.0));
    CHECK(std::abs(in_big - expected) < 5.0 * sigma);
}

TEST_CASE("poisson-disk spreads better than area-weighted sampling") {
    auto sphere = make_sphere_mesh(10, 14);
    int wins = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        PointCloud pd = io::sample_mesh(sphere, 128, io::SampleMode::kPoissonDisk, 1000 + t);
        PointCloud aw = io::sample_mesh(sphere, 128, io::SampleMode::kAreaWeighted, 1000 + t);
        REQUIRE(pd.size() == 128);
        if (min_pairwise_dist(pd.points) > min_pairwise_dist(aw.points)) ++wins;
    }
    CHECK(wins >= 95);  // sign test at p << 1e-6
}

TEST_CASE("sample_mesh rejects a zero-area mesh") {
    TriangleMesh degenerate;
    degenerate.vertices = {{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
    degenerate.faces = {{0, 1, 2}};
    degenerate = remove_degenerate_faces(degenerate);
    CHECK_THROWS_AS(io::sample_mesh(degenerate, 10, io::SampleMode::kAreaWeighted, 1),
                    std::invalid_argument);
}

TEST_CASE("config defaults survive a serialize/parse round trip") {
    io::RunConfig cfg;
    cfg.dataset_dir = "data";
    cfg.train.seed = 42;
    std::string text = io::serialize_config(cfg);
    io::RunConfig back = io::parse_config_text(text);
    CHECK(io::serialize_config(back) == text);
    CHECK(back.train.seed == 42);
    CHECK(back.dataset_dir == "data");
    CHECK(back.train.uniform.p_values == cfg.train.uniform.p_values);
}

TEST_CASE("config parsing accepts the documented syntax") {
    io::RunConfig cfg = io::parse_config_text(
        "# comment\n"
        "patch_size = 256\n"
        "rate = 4\n"
        "lr0 = 0.0001\n"
        "use_self_attention = false\n"
        "p_values = [0.004, 0.012]\n"
        "dataset_dir = \"some/dir\"\n");
    CHECK(cfg.train.patch_size == 256);
    CHECK(cfg.train.lr0 == 0.0001);
    CHECK_FALSE(cfg.train.net.use_self_attention);
    CHECK(cfg.train.uniform.p_values == std::vector<double>{0.004, 0.012});
    CHECK(cfg.dataset_dir == "some/dir");
}

TEST_CASE("config rejects unknown and duplicate keys") {
    CHECK_THROWS_WITH_AS(io::parse_config_text("not_a_key = 1\n"),
                         doctest::Contains("unknown key"), std::runtime_error);
    CHECK_THROWS_WITH_AS(io::parse_config_text("rate = 4\nrate = 9\n"),
                         doctest::Contains("duplicate"), std::runtime_error);
    CHECK_THROWS_WITH_AS(io::parse_config_text("epochs = 1.5\n"),
                         doctest::Contains("integer"), std::runtime_error);
}

TEST_CASE("shipped config presets stay in sync with the code defaults") {
    io::RunConfig desk = io::read_config(std::filesystem::path(PCU_SOURCE_DIR) / "configs/desk.toml");
    io::RunConfig defaults;
    CHECK(io::serialize_config(desk) == io::serialize_config(defaults));

    io::RunConfig full = io::read_config(std::filesystem::path(PCU_SOURCE_DIR) / "configs/full_scale.toml");
    io::RunConfig full_code;
    full_code.train = train::full_scale_config();
    CHECK(io::serialize_config(full) == io::serialize_config(full_code));
}
