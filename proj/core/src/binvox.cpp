#include "vxae/binvox.hpp"

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

#include "vxae/errors.hpp"

namespace vxae {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) words.push_back(line.substr(start, i - start));
  }
  return words;
}

template <typename Number>
Number parse_number(std::string_view word, std::string_view what) {
  Number value{};
  auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), value);
  if (ec != std::errc() || ptr != word.data() + word.size())
    throw FormatError("binvox: malformed " + std::string(what) + " value '" + std::string(word) + "'");
  return value;
}

// Order in the file: x slowest, then z, then y fastest.
template <typename Fn>
void for_each_file_order(int dim, Fn&& fn) {
  for (int x = 0; x < dim; ++x)
    for (int z = 0; z < dim; ++z)
      for (int y = 0; y < dim; ++y) fn(x, y, z);
}

}  // namespace

Bytes write_binvox(const VoxelGrid& grid) {
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("binvox: cannot encode grid: ") + e.what());
  }
  std::string header = "#binvox 1\ndim " + std::to_string(grid.dim) + " " + std::to_string(grid.dim) + " " +
                       std::to_string(grid.dim) + "\ntranslate ";
  for (int a = 0; a < 3; ++a) {
    append_number(header, grid.translate[a]);
    header += a < 2 ? " " : "\n";
  }
  header += "scale ";
  append_number(header, grid.scale);
  header += "\ndata\n";

  Bytes out(header.begin(), header.end());
  std::uint8_t current = 0;
  int run = 0;
  auto flush = [&] {
    if (run > 0) {
      out.push_back(current);
      out.push_back(static_cast<std::uint8_t>(run));
    }
  };
  for_each_file_order(grid.dim, [&](int x, int y, int z) {
    const std::uint8_t v = grid.at(x, y, z);
    if (run > 0 && (v != current || run == 255)) {
      flush();
      run = 0;
    }
    current = v;
    ++run;
  });
  flush();
  return out;
}

VoxelGrid read_binvox(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string_view {
    if (pos >= bytes.size()) throw FormatError("binvox: header ends before the 'data' line");
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw FormatError("binvox: header ends before the 'data' line");
    std::string_view line(reinterpret_cast<const char*>(bytes.data()) + start, pos - start);
    ++pos;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  const auto magic = split_words(next_line());
  if (magic.size() != 2 || magic[0] != "#binvox") throw FormatError("binvox: bad magic line (expected '#binvox 1')");
  if (magic[1] != "1") throw FormatError("binvox: unsupported version '" + std::string(magic[1]) + "'");

  int dim = -1;
  std::array<double, 3> translate{0, 0, 0};
  double scale = 1.0;
  for (;;) {
    const auto words = split_words(next_line());
    if (words.empty()) continue;
    if (words[0] == "data") break;
    if (words[0] == "dim") {
      if (words.size() != 4) throw FormatError("binvox: 'dim' needs three values");
      const int d0 = parse_number<int>(words[1], "dim"), d1 = parse_number<int>(words[2], "dim"),
                d2 = parse_number<int>(words[3], "dim");
      if (d0 != d1 || d1 != d2)
        throw FormatError("binvox: non-cubic dims " + std::to_string(d0) + "x" + std::to_string(d1) + "x" +
                          std::to_string(d2));
      if (d0 < 1) throw FormatError("binvox: dim must be positive");
      dim = d0;
    } else if (words[0] == "translate") {
      if (words.size() != 4) throw FormatError("binvox: 'translate' needs three values");
      for (int a = 0; a < 3; ++a) translate[a] = parse_number<double>(words[1 + a], "translate");
    } else if (words[0] == "scale") {
      if (words.size() != 2) throw FormatError("binvox: 'scale' needs one value");
      scale = parse_number<double>(words[1], "scale");
      if (!(scale > 0)) throw FormatError("binvox: scale must be positive");
    } else {
      throw FormatError("binvox: unknown header keyword '" + std::string(words[0]) + "'");
    }
  }
  if (dim < 0) throw FormatError("binvox: missing 'dim' line");
  if (dim > 1024) throw FormatError("binvox: dim " + std::to_string(dim) + " exceeds the supported maximum of 1024");

  VoxelGrid grid(dim);
  grid.translate = translate;
  grid.scale = scale;
  const std::size_t total = grid.voxel_count();
  // Decode runs into file order, then scatter into grid order.
  std::vector<std::uint8_t> linear;
  linear.reserve(total);
  while (linear.size() < total) {
    if (pos + 2 > bytes.size())
      throw FormatError("binvox: run-length data underrun, decoded " + std::to_string(linear.size()) + " of " +
                        std::to_string(total) + " voxels");
    const std::uint8_t value = bytes[pos], count = bytes[pos + 1];
    if (value > 1) throw FormatError("binvox: voxel value " + std::to_string(value) + " at byte " + std::to_string(pos));
    if (count == 0) throw FormatError("binvox: zero-length run at byte " + std::to_string(pos));
    if (linear.size() + count > total)
      throw FormatError("binvox: run-length data overrun at byte " + std::to_string(pos));
    linear.insert(linear.end(), count, value);
    pos += 2;
  }
  if (pos != bytes.size())
    throw FormatError("binvox: " + std::to_string(bytes.size() - pos) + " trailing bytes after voxel data");
  std::size_t i = 0;
  for_each_file_order(dim, [&](int x, int y, int z) { grid.occupancy[grid.index(x, y, z)] = linear[i++]; });
  return grid;
}

VoxelGrid read_binvox_file(const std::filesystem::path& path) { return read_binvox(read_file_bytes(path)); }

void write_binvox_file(const std::filesystem::path& path, const VoxelGrid& grid) {
  write_file_atomic(path, write_binvox(grid));
}

}  // namespace vxae
