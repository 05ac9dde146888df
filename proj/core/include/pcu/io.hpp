#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "pcu/types.hpp"

namespace pcu::io {

// ASCII XYZ: one "x y z" triple per line, '#' comments. Writes use the
// shortest round-trippable decimal form, so write-then-read is bit-exact.
PointCloud read_xyz(const std::filesystem::path& path);
void write_xyz(const std::filesystem::path& path, std::span<const Vec3> points);

// OBJ (v/f records; f entries may carry /vt/vn suffixes; polygons are
// fan-triangulated) and PLY (ascii or binary_little_endian, x/y/z vertex
// properties). Zero-area faces are dropped on load. A mesh without faces is
// just a point cloud; as_cloud() converts.
TriangleMesh read_obj(const std::filesystem::path& path);
TriangleMesh read_ply(const std::filesystem::path& path);
TriangleMesh read_mesh(const std::filesystem::path& path);  // dispatch on extension

PointCloud as_cloud(const TriangleMesh& mesh);

enum class SampleMode { kAreaWeighted, kPoissonDisk };

// Surface sampling. Poisson-disk runs dart throwing over area-weighted
// proposals with the rejection radius tuned by binary search to land within
// 2% of n, then repairs to exactly n by FPS trim or farthest-candidate
// top-up. Deterministic for a fixed seed.
PointCloud sample_mesh(const TriangleMesh& mesh, int n, SampleMode mode, std::uint64_t seed);

}  // namespace pcu::io
