#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "poselabel/geometry.hpp"

namespace poselabel::render {

/// Triangle mesh in its object frame, millimeters. Faces with more than three
/// vertices are fan-triangulated at load time; triangles with area below
/// 1e-9 mm^2 are dropped and counted in degenerate_dropped.
struct TriMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  int object_id = 0;
  int degenerate_dropped = 0;
};

using MeshStore = std::map<int, TriMesh>;

/// Parses PLY (ascii and binary-little-endian) or OBJ (geometry only),
/// selected by file extension.
TriMesh load_mesh(const std::string& path);

/// Writes a vertex/face PLY. Faces are the mesh triangles.
void write_ply(const TriMesh& mesh, const std::string& path, bool binary = false);

/// Drops degenerate triangles and validates indices; applied by the loaders
/// and by the procedural generators.
TriMesh finalize_mesh(std::vector<Point3> vertices, std::vector<std::array<int, 3>> triangles,
                      int object_id);

}  // namespace poselabel::render
