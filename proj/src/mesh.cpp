#include "poselabel/mesh.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "poselabel/errors.hpp"

namespace poselabel::render {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(Errc::parse, path + ": " + what);
}

double triangle_area(const Point3& a, const Point3& b, const Point3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos) return "";
  std::string ext = path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

// ---- PLY ----

enum class PlyType { i8, u8, i16, u16, i32, u32, f32, f64 };

size_t ply_type_size(PlyType t) {
  switch (t) {
    case PlyType::i8:
    case PlyType::u8:
      return 1;
    case PlyType::i16:
    case PlyType::u16:
      return 2;
    case PlyType::i32:
    case PlyType::u32:
    case PlyType::f32:
      return 4;
    case PlyType::f64:
      return 8;
  }
  return 0;
}

PlyType ply_type(const std::string& name, const std::string& path) {
  if (name == "char" || name == "int8") return PlyType::i8;
  if (name == "uchar" || name == "uint8") return PlyType::u8;
  if (name == "short" || name == "int16") return PlyType::i16;
  if (name == "ushort" || name == "uint16") return PlyType::u16;
  if (name == "int" || name == "int32") return PlyType::i32;
  if (name == "uint" || name == "uint32") return PlyType::u32;
  if (name == "float" || name == "float32") return PlyType::f32;
  if (name == "double" || name == "float64") return PlyType::f64;
  fail(path, "unknown PLY property type '" + name + "'");
}

struct PlyProperty {
  std::string name;
  PlyType type = PlyType::f32;
  bool is_list = false;
  PlyType count_type = PlyType::u8;
};

struct PlyElement {
  std::string name;
  long count = 0;
  std::vector<PlyProperty> properties;
};

double read_binary_scalar(std::istream& in, PlyType t, const std::string& path) {
  unsigned char buf[8];
  const size_t n = ply_type_size(t);
  if (!in.read(reinterpret_cast<char*>(buf), std::streamsize(n)))
    fail(path, "unexpected end of binary data");
  switch (t) {
    case PlyType::i8: return double(*reinterpret_cast<int8_t*>(buf));
    case PlyType::u8: return double(*reinterpret_cast<uint8_t*>(buf));
    case PlyType::i16: {
      int16_t v;
      std::memcpy(&v, buf, 2);
      return double(v);
    }
    case PlyType::u16: {
      uint16_t v;
      std::memcpy(&v, buf, 2);
      return double(v);
    }
    case PlyType::i32: {
      int32_t v;
      std::memcpy(&v, buf, 4);
      return double(v);
    }
    case PlyType::u32: {
      uint32_t v;
      std::memcpy(&v, buf, 4);
      return double(v);
    }
    case PlyType::f32: {
      float v;
      std::memcpy(&v, buf, 4);
      return double(v);
    }
    case PlyType::f64: {
      double v;
      std::memcpy(&v, buf, 8);
      return v;
    }
  }
  return 0;
}

class AsciiTokens {
 public:
  AsciiTokens(std::istream& in, const std::string& path) : in_(in), path_(path) {}

  double next() {
    std::string tok;
    if (!(in_ >> tok)) fail(path_, "unexpected end of ascii data");
    try {
      return std::stod(tok);
    } catch (const std::exception&) {
      fail(path_, "expected a number, got '" + tok + "'");
    }
  }

 private:
  std::istream& in_;
  const std::string& path_;
};

TriMesh load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) fail(path, "empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "ply") fail(path, "missing 'ply' magic");

  bool binary = false;
  bool format_seen = false;
  std::vector<PlyElement> elements;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string fmt, ver;
      ls >> fmt >> ver;
      if (fmt == "ascii")
        binary = false;
      else if (fmt == "binary_little_endian")
        binary = true;
      else
        fail(path, "unsupported PLY format '" + fmt + "'");
      format_seen = true;
    } else if (word == "element") {
      PlyElement el;
      if (!(ls >> el.name >> el.count) || el.count < 0) fail(path, "malformed element line");
      elements.push_back(el);
    } else if (word == "property") {
      if (elements.empty()) fail(path, "property before any element");
      PlyProperty p;
      std::string t;
      ls >> t;
      if (t == "list") {
        std::string ct, it;
        if (!(ls >> ct >> it >> p.name)) fail(path, "malformed list property");
        p.is_list = true;
        p.count_type = ply_type(ct, path);
        p.type = ply_type(it, path);
      } else {
        p.type = ply_type(t, path);
        if (!(ls >> p.name)) fail(path, "malformed property line");
      }
      elements.back().properties.push_back(p);
    } else if (word == "end_header") {
      break;
    } else {
      fail(path, "unknown header keyword '" + word + "'");
    }
  }
  if (!format_seen) fail(path, "missing format line");

  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  AsciiTokens tokens(in, path);

  auto read_scalar = [&](PlyType t) {
    return binary ? read_binary_scalar(in, t, path) : tokens.next();
  };

  for (const PlyElement& el : elements) {
    if (el.name == "vertex") {
      int ix = -1, iy = -1, iz = -1;
      for (size_t i = 0; i < el.properties.size(); ++i) {
        if (el.properties[i].is_list) fail(path, "list property on vertex element");
        if (el.properties[i].name == "x") ix = int(i);
        if (el.properties[i].name == "y") iy = int(i);
        if (el.properties[i].name == "z") iz = int(i);
      }
      if (ix < 0 || iy < 0 || iz < 0) fail(path, "vertex element lacks x/y/z");
      vertices.reserve(size_t(el.count));
      for (long v = 0; v < el.count; ++v) {
        Point3 p = Point3::Zero();
        for (size_t i = 0; i < el.properties.size(); ++i) {
          const double val = read_scalar(el.properties[i].type);
          if (int(i) == ix) p.x() = val;
          if (int(i) == iy) p.y() = val;
          if (int(i) == iz) p.z() = val;
        }
        if (!p.allFinite()) fail(path, "non-finite vertex coordinate");
        vertices.push_back(p);
      }
    } else if (el.name == "face") {
      for (long f = 0; f < el.count; ++f) {
        for (const PlyProperty& p : el.properties) {
          if (p.is_list && (p.name == "vertex_indices" || p.name == "vertex_index")) {
            const long n = long(read_scalar(p.count_type));
            if (n < 3) fail(path, "face with fewer than 3 vertices");
            std::vector<int> idx(static_cast<size_t>(n));
            for (long i = 0; i < n; ++i) {
              const double v = read_scalar(p.type);
              idx[size_t(i)] = int(v);
            }
            for (long i = 1; i + 1 < n; ++i)
              triangles.push_back({idx[0], idx[size_t(i)], idx[size_t(i) + 1]});
          } else if (p.is_list) {
            const long n = long(read_scalar(p.count_type));
            for (long i = 0; i < n; ++i) read_scalar(p.type);
          } else {
            read_scalar(p.type);
          }
        }
      }
    } else {
      // skip unknown elements
      for (long e = 0; e < el.count; ++e) {
        for (const PlyProperty& p : el.properties) {
          if (p.is_list) {
            const long n = long(read_scalar(p.count_type));
            for (long i = 0; i < n; ++i) read_scalar(p.type);
          } else {
            read_scalar(p.type);
          }
        }
      }
    }
  }
  if (vertices.empty() && triangles.empty() && elements.empty())
    fail(path, "no vertex or face elements");
  for (const auto& t : triangles)
    for (int i : t)
      if (i < 0 || size_t(i) >= vertices.size()) fail(path, "vertex index out of range");
  return finalize_mesh(std::move(vertices), std::move(triangles), 0);
}

// ---- OBJ ----

int obj_vertex_index(const std::string& token, size_t vertex_count, const std::string& path) {
  std::string head = token.substr(0, token.find('/'));
  int idx = 0;
  const auto res = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (res.ec != std::errc() || res.ptr != head.data() + head.size())
    fail(path, "malformed face index '" + token + "'");
  if (idx < 0) idx = int(vertex_count) + idx;  // relative indexing
  else idx -= 1;                               // OBJ is 1-based
  if (idx < 0 || size_t(idx) >= vertex_count) fail(path, "vertex index out of range");
  return idx;
}

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path);
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "v") {
      Point3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) fail(path, "malformed vertex line");
      vertices.push_back(p);
    } else if (word == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) idx.push_back(obj_vertex_index(tok, vertices.size(), path));
      if (idx.size() < 3) fail(path, "face with fewer than 3 vertices");
      for (size_t i = 1; i + 1 < idx.size(); ++i)
        triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
    // everything else (vn, vt, usemtl, ...) is ignored
  }
  return finalize_mesh(std::move(vertices), std::move(triangles), 0);
}

}  // namespace

TriMesh finalize_mesh(std::vector<Point3> vertices, std::vector<std::array<int, 3>> triangles,
                      int object_id) {
  TriMesh mesh;
  mesh.object_id = object_id;
  mesh.vertices = std::move(vertices);
  mesh.triangles.reserve(triangles.size());
  for (const auto& t : triangles) {
    for (int i : t)
      if (i < 0 || size_t(i) >= mesh.vertices.size())
        throw Error(Errc::parse, "vertex index out of range");
    if (triangle_area(mesh.vertices[size_t(t[0])], mesh.vertices[size_t(t[1])],
                      mesh.vertices[size_t(t[2])]) < 1e-9) {
      ++mesh.degenerate_dropped;
      continue;
    }
    mesh.triangles.push_back(t);
  }
  return mesh;
}

TriMesh load_mesh(const std::string& path) {
  const std::string ext = lower_ext(path);
  if (ext == "ply") return load_ply(path);
  if (ext == "obj") return load_obj(path);
  throw Error(Errc::unsupported_format, "unsupported mesh format: " + path);
}

void write_ply(const TriMesh& mesh, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot open " + path + " for writing");
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\nend_header\n";
  if (binary) {
    for (const Point3& v : mesh.vertices) {
      double xyz[3] = {v.x(), v.y(), v.z()};
      out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
    }
    for (const auto& t : mesh.triangles) {
      const uint8_t n = 3;
      int32_t idx[3] = {t[0], t[1], t[2]};
      out.write(reinterpret_cast<const char*>(&n), 1);
      out.write(reinterpret_cast<const char*>(idx), sizeof idx);
    }
  } else {
    out.precision(17);
    for (const Point3& v : mesh.vertices) out << v.x() << " " << v.y() << " " << v.z() << "\n";
    for (const auto& t : mesh.triangles) out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
  if (!out) throw Error(Errc::io, "write failed: " + path);
}

}  // namespace poselabel::render
