#include "helfrich/mesh_io.h"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "helfrich/errors.h"

namespace helfrich {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_mesh_file(std::ostream& os, const MeshFile& m) {
  const Triangulation2D& t = m.mesh;
  os << kFormatHeader << "\n";
  os << "domain " << t.domain.size() << "\n";
  for (const auto& p : t.domain) os << format_real(p.x()) << " " << format_real(p.y()) << "\n";
  os << "vertices " << t.vertices.size() << "\n";
  for (size_t i = 0; i < t.vertices.size(); ++i)
    os << i << " " << format_real(t.vertices[i].x()) << " " << format_real(t.vertices[i].y())
       << "\n";
  os << "triangles " << t.triangles.size() << "\n";
  for (size_t i = 0; i < t.triangles.size(); ++i)
    os << i << " " << t.triangles[i][0] << " " << t.triangles[i][1] << " " << t.triangles[i][2]
       << "\n";
  if (m.values) {
    os << "values " << m.values->size() << "\n";
    for (size_t i = 0; i < m.values->size(); ++i)
      os << i << " " << format_real((*m.values)[i]) << "\n";
  }
  if (m.directors) {
    os << "directors " << m.directors->values.size() << " " << to_string(m.directors->family)
       << "\n";
    for (size_t e = 0; e < m.directors->values.size(); ++e) {
      const Eigen::Vector3d& v = m.directors->values[e];
      os << t.edges[e].a << " " << t.edges[e].b << " " << format_real(v.x()) << " "
         << format_real(v.y()) << " " << format_real(v.z()) << "\n";
    }
  }
  if (!os) throw Error("mesh write failed (stream error)");
}

void write_mesh_file(const std::string& path, const MeshFile& m) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  write_mesh_file(os, m);
}

namespace {

// Line-oriented reader: skips blank and '#' comment lines, tracks line
// numbers for diagnostics.
class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  bool next(std::string& out) {
    std::string line;
    while (std::getline(is_, line)) {
      ++lineno_;
      const size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      out = line;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("line " + std::to_string(lineno_) + ": " + what);
  }

 private:
  std::istream& is_;
  int lineno_ = 0;
};

template <typename... Ts>
void parse_fields(LineReader& r, const std::string& line, Ts&... out) {
  std::istringstream ss(line);
  ((ss >> out) && ...);
  if (!ss) r.fail("expected " + std::to_string(sizeof...(Ts)) + " fields, got '" + line + "'");
  std::string extra;
  if (ss >> extra) r.fail("trailing data '" + extra + "'");
}

}  // namespace

MeshFile read_mesh_file(std::istream& is) {
  LineReader r(is);
  std::string line;

  if (!r.next(line)) r.fail("empty input, expected header '" + std::string(kFormatHeader) + "'");
  {
    // Trim trailing whitespace before comparing the header.
    const size_t end = line.find_last_not_of(" \t\r");
    if (line.substr(0, end + 1) != kFormatHeader)
      r.fail("unsupported header '" + line + "', expected '" + std::string(kFormatHeader) + "'");
  }

  auto expect_block = [&](const char* keyword, std::string& rest) {
    if (!r.next(line)) r.fail(std::string("unexpected end of input, expected '") + keyword + "'");
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    if (kw != keyword) r.fail("expected block '" + std::string(keyword) + "', got '" + kw + "'");
    std::getline(ss, rest);
    return true;
  };

  auto count_of = [&](const std::string& rest, const char* what) {
    std::istringstream ss(rest);
    long n = -1;
    ss >> n;
    if (!ss || n < 0) r.fail(std::string("bad ") + what + " count '" + rest + "'");
    return n;
  };

  std::string rest;
  expect_block("domain", rest);
  const long nd = count_of(rest, "domain");
  std::vector<Eigen::Vector2d> domain(nd);
  for (long i = 0; i < nd; ++i) {
    if (!r.next(line)) r.fail("unexpected end of domain block");
    double x, y;
    parse_fields(r, line, x, y);
    domain[i] = {x, y};
  }

  expect_block("vertices", rest);
  const long nv = count_of(rest, "vertex");
  std::vector<Eigen::Vector2d> vertices(nv);
  for (long i = 0; i < nv; ++i) {
    if (!r.next(line)) r.fail("unexpected end of vertex block");
    long idx;
    double x, y;
    parse_fields(r, line, idx, x, y);
    if (idx != i) r.fail("vertex index " + std::to_string(idx) + " out of order, expected " +
                         std::to_string(i));
    vertices[i] = {x, y};
  }

  expect_block("triangles", rest);
  const long nt = count_of(rest, "triangle");
  std::vector<std::array<int, 3>> triangles(nt);
  for (long i = 0; i < nt; ++i) {
    if (!r.next(line)) r.fail("unexpected end of triangle block");
    long idx, a, b, c;
    parse_fields(r, line, idx, a, b, c);
    if (idx != i) r.fail("triangle index " + std::to_string(idx) + " out of order, expected " +
                         std::to_string(i));
    triangles[i] = {static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
  }

  MeshFile m;
  m.mesh = build_triangulation(std::move(vertices), std::move(triangles), std::move(domain));

  // Optional trailing blocks, in order: values, directors.
  while (r.next(line)) {
    std::istringstream ss(line);
    std::string kw;
    ss >> kw;
    std::getline(ss, rest);
    if (kw == "values") {
      if (m.values) r.fail("duplicate values block");
      if (m.directors) r.fail("values block must precede directors");
      const long n = count_of(rest, "value");
      if (n != nv)
        r.fail("values count " + std::to_string(n) + " != vertex count " + std::to_string(nv));
      m.values.emplace(n);
      for (long i = 0; i < n; ++i) {
        if (!r.next(line)) r.fail("unexpected end of values block");
        long idx;
        double u;
        parse_fields(r, line, idx, u);
        if (idx != i) r.fail("value index " + std::to_string(idx) + " out of order");
        (*m.values)[i] = u;
      }
    } else if (kw == "directors") {
      if (m.directors) r.fail("duplicate directors block");
      std::istringstream rs(rest);
      long n = -1;
      std::string family;
      rs >> n >> family;
      if (!rs || n < 0) r.fail("bad directors block header '" + rest + "'");
      if (n != static_cast<long>(m.mesh.edges.size()))
        r.fail("directors count " + std::to_string(n) + " != edge count " +
               std::to_string(m.mesh.edges.size()));
      DirectorBlock blk;
      try {
        blk.family = director_family_from_string(family);
      } catch (const Error& err) {
        r.fail(err.what());
      }
      blk.values.resize(n);
      for (long e = 0; e < n; ++e) {
        if (!r.next(line)) r.fail("unexpected end of directors block");
        long a, b;
        double x, y, z;
        parse_fields(r, line, a, b, x, y, z);
        if (a != m.mesh.edges[e].a || b != m.mesh.edges[e].b)
          r.fail("director edge (" + std::to_string(a) + "," + std::to_string(b) +
                 ") does not match edge table entry (" + std::to_string(m.mesh.edges[e].a) + "," +
                 std::to_string(m.mesh.edges[e].b) + ")");
        blk.values[e] = {x, y, z};
      }
      m.directors = std::move(blk);
    } else {
      r.fail("unknown block '" + kw + "'");
    }
  }
  return m;
}

MeshFile read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  try {
    return read_mesh_file(is);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace helfrich
