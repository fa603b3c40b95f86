#include "speech3d/geometry/obj.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <vector>

#include "speech3d/errors.hpp"

namespace speech3d::geometry {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double parse_double(std::string_view tok, std::size_t line_no) {
  double value = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ParseError(line_no, "not a finite number: '" + std::string(tok) + "'");
  }
  return value;
}

// Resolves the position index of a face corner ("7", "7/2", "7//3", "-1").
std::uint32_t parse_corner(std::string_view tok, std::size_t vertex_count, std::size_t line_no) {
  const auto slash = tok.find('/');
  std::string_view head = tok.substr(0, slash);
  long long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (head.empty() || ec != std::errc{} || ptr != head.data() + head.size()) {
    throw ParseError(line_no, "bad face index '" + std::string(tok) + "'");
  }
  const long long n = static_cast<long long>(vertex_count);
  long long resolved = idx > 0 ? idx - 1 : n + idx;
  if (idx == 0 || resolved < 0 || resolved >= n) {
    throw IndexError(line_no, "face index " + std::to_string(idx) + " out of range for " +
                                  std::to_string(vertex_count) + " vertices");
  }
  return static_cast<std::uint32_t>(resolved);
}

bool is_ignored(std::string_view keyword) {
  return keyword == "vn" || keyword == "vt" || keyword == "o" || keyword == "g" ||
         keyword == "s" || keyword == "mtllib" || keyword == "usemtl";
}

void append_fixed6(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  out.append(buf, ptr);
}

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

}  // namespace

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::set<Face> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tokens = split_tokens(line);
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string_view keyword = tokens[0];
    if (keyword == "v") {
      if (tokens.size() < 4) throw ParseError(line_no, "vertex needs 3 coordinates");
      for (std::size_t i = 4; i < tokens.size(); ++i) parse_double(tokens[i], line_no);
      mesh.vertices.push_back({parse_double(tokens[1], line_no), parse_double(tokens[2], line_no),
                               parse_double(tokens[3], line_no)});
    } else if (keyword == "f") {
      if (tokens.size() < 4) throw ParseError(line_no, "face needs at least 3 indices");
      std::vector<std::uint32_t> corners;
      corners.reserve(tokens.size() - 1);
      for (std::size_t i = 1; i < tokens.size(); ++i) {
        corners.push_back(parse_corner(tokens[i], mesh.vertices.size(), line_no));
      }
      for (std::size_t i = 1; i + 1 < corners.size(); ++i) {
        Face f{corners[0], corners[i], corners[i + 1]};
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) continue;
        if (!seen.insert(sorted_face(f)).second) continue;
        mesh.faces.push_back(f);
      }
    } else if (!is_ignored(keyword)) {
      throw ParseError(line_no, "unsupported directive '" + std::string(keyword) + "'");
    }
    if (end == text.size()) break;
  }
  if (mesh.vertices.empty()) throw EmptyMeshError("mesh has no vertices");
  if (mesh.faces.empty()) throw EmptyMeshError("mesh has no faces");
  return mesh;
}

std::string write_obj(const TriMesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 32 + mesh.faces.size() * 20);
  for (const auto& v : mesh.vertices) {
    out += "v ";
    append_fixed6(out, v.x);
    out += ' ';
    append_fixed6(out, v.y);
    out += ' ';
    append_fixed6(out, v.z);
    out += '\n';
  }
  for (const auto& f : mesh.faces) {
    out += "f ";
    append_uint(out, std::uint64_t{f[0]} + 1);
    out += ' ';
    append_uint(out, std::uint64_t{f[1]} + 1);
    out += ' ';
    append_uint(out, std::uint64_t{f[2]} + 1);
    out += '\n';
  }
  return out;
}

}  // namespace speech3d::geometry
