#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "vxae/fs_util.hpp"
#include "vxae/mesh.hpp"

namespace vxae {

enum class StlFormat { Binary, Ascii };

// Parses binary (80-byte header, u32 LE count, 50-byte records) or ASCII STL. A file is
// treated as ASCII iff the whole of it parses under the ASCII grammar. Throws
// ParseError carrying the byte offset (binary) or line (ASCII) of the first problem.
TriangleMesh parse_stl(std::span<const std::uint8_t> bytes);

Bytes write_stl_binary(const TriangleMesh& mesh, std::string_view header = "vxae binary stl");
// Coordinates are written with the shortest decimal form that round-trips to the same float.
std::string write_stl_ascii(const TriangleMesh& mesh, std::string_view name = "vxae");

TriangleMesh read_stl_file(const std::filesystem::path& path);
void write_stl_file(const std::filesystem::path& path, const TriangleMesh& mesh, StlFormat format = StlFormat::Binary);

}  // namespace vxae
