#include "poselabel/raster.hpp"

#include <algorithm>
#include <cmath>

#include "poselabel/errors.hpp"

namespace poselabel::render {

namespace {

double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

// Edge ownership under the top-left rule, y-down screen coordinates,
// for edges of a positively oriented (all edge functions >= 0) triangle.
bool top_left(const Vec2& d) {
  if (d.y() == 0) return d.x() < 0;  // top edge
  return d.y() > 0;                  // left edge
}

void fill_triangle(MaskImage& mask, Vec2 a, Vec2 b, Vec2 c) {
  double area2 = cross2(b - a, c - a);
  if (area2 == 0) return;
  if (area2 < 0) std::swap(b, c);

  const double min_x = std::min({a.x(), b.x(), c.x()});
  const double max_x = std::max({a.x(), b.x(), c.x()});
  const double min_y = std::min({a.y(), b.y(), c.y()});
  const double max_y = std::max({a.y(), b.y(), c.y()});
  const int x0 = std::max(0, int(std::ceil(min_x - 0.5)));
  const int x1 = std::min(mask.width - 1, int(std::floor(max_x - 0.5)));
  const int y0 = std::max(0, int(std::ceil(min_y - 0.5)));
  const int y1 = std::min(mask.height - 1, int(std::floor(max_y - 0.5)));
  if (x0 > x1 || y0 > y1) return;

  const Vec2 v[3] = {a, b, c};
  const Vec2 d[3] = {b - a, c - b, a - c};
  const bool tl[3] = {top_left(d[0]), top_left(d[1]), top_left(d[2])};

  for (int py = y0; py <= y1; ++py) {
    for (int px = x0; px <= x1; ++px) {
      const Vec2 p(px + 0.5, py + 0.5);
      bool inside = true;
      for (int e = 0; e < 3 && inside; ++e) {
        const double E = cross2(d[e], p - v[e]);
        inside = E > 0 || (E == 0 && tl[e]);
      }
      if (inside) mask.set(px, py);
    }
  }
}

// Sutherland-Hodgman against the half-space z >= kZNear.
int clip_near(const Vec3 (&in)[3], Vec3 (&out)[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& cur = in[i];
    const Vec3& nxt = in[(i + 1) % 3];
    const bool cur_in = cur.z() >= kZNear;
    const bool nxt_in = nxt.z() >= kZNear;
    if (cur_in) out[n++] = cur;
    if (cur_in != nxt_in) {
      const double t = (kZNear - cur.z()) / (nxt.z() - cur.z());
      out[n++] = cur + t * (nxt - cur);
    }
  }
  return n;
}

struct CamTriangle {
  Vec3 v0, e1, e2;  // v0 plus edge vectors, camera frame
  Vec3 normal;      // e1 x e2, unnormalized
};

std::vector<CamTriangle> to_camera_frame(const TriMesh& mesh, const Pose& object_to_camera) {
  std::vector<Vec3> cam(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    cam[i] = transform_point(object_to_camera, mesh.vertices[i]);
  std::vector<CamTriangle> tris;
  tris.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    CamTriangle ct;
    ct.v0 = cam[size_t(t[0])];
    ct.e1 = cam[size_t(t[1])] - ct.v0;
    ct.e2 = cam[size_t(t[2])] - ct.v0;
    ct.normal = ct.e1.cross(ct.e2);
    tris.push_back(ct);
  }
  return tris;
}

}  // namespace

long MaskImage::count() const {
  long n = 0;
  for (uint8_t b : bits) n += b;
  return n;
}

MaskImage rasterize_mask(const TriMesh& mesh, const Pose& object_to_camera,
                         const CameraIntrinsics& k) {
  MaskImage mask(k.width, k.height);
  std::vector<Vec3> cam(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i)
    cam[i] = transform_point(object_to_camera, mesh.vertices[i]);

  for (const auto& t : mesh.triangles) {
    const Vec3 tri[3] = {cam[size_t(t[0])], cam[size_t(t[1])], cam[size_t(t[2])]};
    Vec3 clipped[4];
    const int n = clip_near(tri, clipped);
    if (n < 3) continue;
    Vec2 proj[4];
    for (int i = 0; i < n; ++i) proj[i] = k.project_camera_point(clipped[i]);
    fill_triangle(mask, proj[0], proj[1], proj[2]);
    if (n == 4) fill_triangle(mask, proj[0], proj[2], proj[3]);
  }
  return mask;
}

MaskImage raycast_mask(const TriMesh& mesh, const Pose& object_to_camera,
                       const CameraIntrinsics& k, bool front_faces_only) {
  MaskImage mask(k.width, k.height);
  const std::vector<CamTriangle> tris = to_camera_frame(mesh, object_to_camera);
  constexpr double kDetEps = 1e-12;

  for (int py = 0; py < k.height; ++py) {
    for (int px = 0; px < k.width; ++px) {
      const Vec2 nd = k.undistort_normalized(
          Vec2((px + 0.5 - k.cx) / k.fx, (py + 0.5 - k.cy) / k.fy));
      const Vec3 dir(nd.x(), nd.y(), 1.0);  // dir.z == 1, so t equals camera z
      bool hit = false;
      for (const CamTriangle& ct : tris) {
        const Vec3 pvec = dir.cross(ct.e2);
        const double det = ct.e1.dot(pvec);
        if (front_faces_only ? det <= kDetEps : std::abs(det) <= kDetEps) continue;
        const double inv_det = 1.0 / det;
        const Vec3 tvec = -ct.v0;  // ray origin is the camera center
        const double u = tvec.dot(pvec) * inv_det;
        if (u < 0 || u > 1) continue;
        const Vec3 qvec = tvec.cross(ct.e1);
        const double v = dir.dot(qvec) * inv_det;
        if (v < 0 || u + v > 1) continue;
        const double t = ct.e2.dot(qvec) * inv_det;
        if (t > kZNear) {
          hit = true;
          break;
        }
      }
      if (hit) mask.set(px, py);
    }
  }
  return mask;
}

MaskImage aggregate_masks(const std::vector<MaskImage>& masks) {
  if (masks.empty()) return MaskImage();
  MaskImage out = masks.front();
  for (size_t i = 1; i < masks.size(); ++i) {
    if (!out.same_dims(masks[i]))
      throw Error(Errc::dimension_mismatch, "aggregate_masks: mask dimensions differ");
    for (size_t j = 0; j < out.bits.size(); ++j) out.bits[j] |= masks[i].bits[j];
  }
  return out;
}

bool near_mask_edge(const MaskImage& a, const MaskImage& b, int x, int y, int radius) {
  auto boundary = [](const MaskImage& m, int px, int py) {
    const bool v = m.at(px, py);
    auto neighbor = [&](int nx, int ny) {
      if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) return false;
      return m.at(nx, ny);
    };
    return neighbor(px - 1, py) != v || neighbor(px + 1, py) != v ||
           neighbor(px, py - 1) != v || neighbor(px, py + 1) != v;
  };
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int px = x + dx, py = y + dy;
      if (px < 0 || py < 0 || px >= a.width || py >= a.height) continue;
      if (boundary(a, px, py) || boundary(b, px, py)) return true;
    }
  }
  return false;
}

}  // namespace poselabel::render
