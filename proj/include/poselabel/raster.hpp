#pragma once

#include <cstdint>
#include <vector>

#include "poselabel/geometry.hpp"
#include "poselabel/mesh.hpp"

namespace poselabel::render {

/// Binary occupancy image. One byte per pixel, 0 or 1, row-major.
struct MaskImage {
  int width = 0, height = 0;
  std::vector<uint8_t> bits;

  MaskImage() = default;
  MaskImage(int w, int h) : width(w), height(h), bits(size_t(w) * size_t(h), 0) {}

  bool at(int x, int y) const { return bits[size_t(y) * width + x] != 0; }
  void set(int x, int y) { bits[size_t(y) * width + x] = 1; }

  long count() const;
  bool empty() const { return count() == 0; }
  bool same_dims(const MaskImage& o) const { return width == o.width && height == o.height; }
  bool operator==(const MaskImage& o) const {
    return width == o.width && height == o.height && bits == o.bits;
  }
};

/// Binary silhouette of the mesh seen through k at `object_to_camera`.
/// A pixel is set iff its center is covered by at least one projected
/// triangle with camera-frame z > kZNear. Triangles crossing the near plane
/// are clipped against it before projection. No backface culling. Coverage
/// follows the top-left edge-ownership rule on pixel centers, so output is
/// deterministic. A fully out-of-frame object yields an empty mask.
MaskImage rasterize_mask(const TriMesh& mesh, const Pose& object_to_camera,
                         const CameraIntrinsics& k);

/// Brute-force reference: casts a ray through every pixel center and marks
/// occupancy iff any ray/triangle intersection lies beyond kZNear.
/// O(pixels x triangles); meant for tests and cross-checks.
MaskImage raycast_mask(const TriMesh& mesh, const Pose& object_to_camera,
                       const CameraIntrinsics& k, bool front_faces_only = false);

/// Pixelwise union. Throws Errc::dimension_mismatch on differing sizes.
MaskImage aggregate_masks(const std::vector<MaskImage>& masks);

/// True if (x, y) is within `radius` (Chebyshev) of a pixel whose 4-neighbors
/// differ in occupancy from it — i.e. near a mask boundary. Used by tests to
/// localize rasterizer/oracle disagreements.
bool near_mask_edge(const MaskImage& a, const MaskImage& b, int x, int y, int radius);

}  // namespace poselabel::render
