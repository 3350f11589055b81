#include "vxae/stl.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <optional>
#include <string_view>

#include "vxae/errors.hpp"

namespace vxae {

namespace {

constexpr std::size_t kHeaderBytes = 80;
constexpr std::size_t kRecordBytes = 50;

std::uint32_t read_u32_le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

float read_f32_le(const std::uint8_t* p) { return std::bit_cast<float>(read_u32_le(p)); }

void put_u32_le(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32_le(Bytes& out, float v) { put_u32_le(out, std::bit_cast<std::uint32_t>(v)); }

TriangleMesh parse_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes + 4)
    throw ParseError("binary STL truncated before the triangle count", bytes.size(), false);
  const std::uint64_t count = read_u32_le(bytes.data() + kHeaderBytes);
  const std::uint64_t expected = kHeaderBytes + 4 + count * kRecordBytes;
  if (bytes.size() < expected) {
    const std::uint64_t complete = (bytes.size() - kHeaderBytes - 4) / kRecordBytes;
    throw ParseError("binary STL declares " + std::to_string(count) + " triangles but only " + std::to_string(complete) +
                         " complete records are present; record truncated",
                     kHeaderBytes + 4 + complete * kRecordBytes, false);
  }
  if (bytes.size() > expected)
    throw ParseError("binary STL declares " + std::to_string(count) + " triangles but the file holds " +
                         std::to_string(bytes.size() - expected) + " extra bytes",
                     expected, false);
  TriangleMesh mesh;
  mesh.triangles.resize(count);
  const std::uint8_t* p = bytes.data() + kHeaderBytes + 4;
  for (auto& t : mesh.triangles) {
    for (int a = 0; a < 3; ++a) t.normal[a] = read_f32_le(p + 4 * a);
    for (int v = 0; v < 3; ++v)
      for (int a = 0; a < 3; ++a) t.vertices[v][a] = read_f32_le(p + 12 + 12 * v + 4 * a);
    p += kRecordBytes;  // trailing u16 attribute byte count is ignored
  }
  return mesh;
}

// Whitespace tokenizer that tracks line numbers.
class AsciiLexer {
 public:
  explicit AsciiLexer(std::string_view text) : text_(text) {}

  struct Token {
    std::string_view text;
    std::uint64_t line = 0;
  };

  std::optional<Token> next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return std::nullopt;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return Token{text_.substr(start, pos_ - start), line_};
  }

  // Consumes the rest of the current line (used for the free-form solid name).
  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

  std::uint64_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::uint64_t line_ = 1;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

TriangleMesh parse_ascii(std::string_view text) {
  AsciiLexer lex(text);
  auto expect = [&](std::string_view keyword) {
    auto tok = lex.next();
    if (!tok) throw ParseError("ASCII STL: unexpected end of file, expected '" + std::string(keyword) + "'", lex.line(), true);
    if (!iequals(tok->text, keyword))
      throw ParseError("ASCII STL: expected '" + std::string(keyword) + "', found '" + std::string(tok->text) + "'",
                       tok->line, true);
  };
  auto number = [&]() -> float {
    auto tok = lex.next();
    if (!tok) throw ParseError("ASCII STL: unexpected end of file, expected a number", lex.line(), true);
    float value = 0;
    const char* first = tok->text.data();
    const char* last = first + tok->text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
      throw ParseError("ASCII STL: malformed number '" + std::string(tok->text) + "'", tok->line, true);
    return value;
  };

  expect("solid");
  lex.skip_line();
  TriangleMesh mesh;
  for (;;) {
    auto tok = lex.next();
    if (!tok) throw ParseError("ASCII STL: missing 'endsolid'", lex.line(), true);
    if (iequals(tok->text, "endsolid")) {
      lex.skip_line();
      if (auto extra = lex.next())
        throw ParseError("ASCII STL: content after 'endsolid': '" + std::string(extra->text) + "'", extra->line, true);
      return mesh;
    }
    if (!iequals(tok->text, "facet"))
      throw ParseError("ASCII STL: expected 'facet' or 'endsolid', found '" + std::string(tok->text) + "'", tok->line,
                       true);
    Triangle t;
    expect("normal");
    for (int a = 0; a < 3; ++a) t.normal[a] = number();
    expect("outer");
    expect("loop");
    for (int v = 0; v < 3; ++v) {
      expect("vertex");
      for (int a = 0; a < 3; ++a) t.vertices[v][a] = number();
    }
    expect("endloop");
    expect("endfacet");
    mesh.triangles.push_back(t);
  }
}

bool starts_with_solid(std::span<const std::uint8_t> bytes) {
  std::size_t i = 0;
  while (i < bytes.size() && std::isspace(bytes[i])) ++i;
  constexpr std::string_view kw = "solid";
  if (bytes.size() - i < kw.size()) return false;
  for (std::size_t k = 0; k < kw.size(); ++k)
    if (std::tolower(bytes[i + k]) != kw[k]) return false;
  return true;
}

void append_float(std::string& out, float v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

}  // namespace

TriangleMesh parse_stl(std::span<const std::uint8_t> bytes) {
  TriangleMesh mesh;
  if (starts_with_solid(bytes)) {
    try {
      mesh = parse_ascii(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    } catch (const ParseError& ascii_error) {
      // Binary files may legally start their header with "solid".
      try {
        mesh = parse_binary(bytes);
      } catch (const ParseError&) {
        throw ascii_error;
      }
    }
  } else {
    mesh = parse_binary(bytes);
  }
  try {
    mesh.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("STL: ") + e.what(), 0, false);
  }
  return mesh;
}

Bytes write_stl_binary(const TriangleMesh& mesh, std::string_view header) {
  Bytes out;
  out.reserve(kHeaderBytes + 4 + kRecordBytes * mesh.size());
  // The header must not start with "solid" or readers may take it for ASCII.
  std::string head(header.substr(0, kHeaderBytes));
  if (head.rfind("solid", 0) == 0) head[0] = '_';
  head.resize(kHeaderBytes, ' ');
  out.insert(out.end(), head.begin(), head.end());
  put_u32_le(out, static_cast<std::uint32_t>(mesh.size()));
  for (const auto& t : mesh.triangles) {
    for (float c : t.normal) put_f32_le(out, c);
    for (const auto& v : t.vertices)
      for (float c : v) put_f32_le(out, c);
    out.push_back(0);
    out.push_back(0);
  }
  return out;
}

std::string write_stl_ascii(const TriangleMesh& mesh, std::string_view name) {
  std::string out = "solid " + std::string(name) + "\n";
  for (const auto& t : mesh.triangles) {
    out += "  facet normal ";
    for (int a = 0; a < 3; ++a) {
      append_float(out, t.normal[a]);
      out += a < 2 ? " " : "\n";
    }
    out += "    outer loop\n";
    for (const auto& v : t.vertices) {
      out += "      vertex ";
      for (int a = 0; a < 3; ++a) {
        append_float(out, v[a]);
        out += a < 2 ? " " : "\n";
      }
    }
    out += "    endloop\n  endfacet\n";
  }
  out += "endsolid " + std::string(name) + "\n";
  return out;
}

TriangleMesh read_stl_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_stl(bytes);
}

void write_stl_file(const std::filesystem::path& path, const TriangleMesh& mesh, StlFormat format) {
  if (format == StlFormat::Binary)
    write_file_atomic(path, write_stl_binary(mesh));
  else
    write_file_atomic(path, write_stl_ascii(mesh));
}

}  // namespace vxae
