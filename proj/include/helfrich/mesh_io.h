#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "helfrich/directors.h"
#include "helfrich/mesh.h"

namespace helfrich {

// Text format, versioned by a `helfrich-disc v1` header line. Blocks in
// order: domain, vertices, triangles, then optional values (nodal scalars)
// and directors (per-edge records with sorted edge key). All reals are
// printed with 17 significant digits, so write/read round-trips are lossless.
inline constexpr const char* kFormatHeader = "helfrich-disc v1";

struct DirectorBlock {
  DirectorFamily family = DirectorFamily::unit;
  std::vector<Eigen::Vector3d> values;  // edge-table order
};

struct MeshFile {
  Triangulation2D mesh;
  std::optional<std::vector<double>> values;
  std::optional<DirectorBlock> directors;
};

void write_mesh_file(std::ostream& os, const MeshFile& m);
void write_mesh_file(const std::string& path, const MeshFile& m);

// Parses and re-validates (build_triangulation runs on the parsed data).
// Throws ParseError on malformed input.
MeshFile read_mesh_file(std::istream& is);
MeshFile read_mesh_file(const std::string& path);

// 17-significant-digit formatting used by every writer (%.17g).
std::string format_real(double v);

}  // namespace helfrich
