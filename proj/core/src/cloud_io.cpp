#include "pcmp/cloud_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace pcmp {

CloudFormat format_from_path(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot);
    if (ext == ".ply" || ext == ".PLY") return CloudFormat::kPlyAscii;
  }
  return CloudFormat::kXyz;
}

static double parse_coord(const std::string& tok, const std::string& path,
                          std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size())
    throw ParseError(path + ":" + std::to_string(line_no) +
                     ": non-numeric token '" + tok + "'");
  return v;
}

static std::vector<Point3> read_xyz(std::istream& in, const std::string& path) {
  std::vector<Point3> pts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!(ls >> a)) continue;  // blank line
    if (!(ls >> b >> c))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected three coordinates");
    std::string extra;
    if (ls >> extra)
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": trailing token '" + extra + "'");
    pts.push_back({parse_coord(a, path, line_no), parse_coord(b, path, line_no),
                   parse_coord(c, path, line_no)});
  }
  return pts;
}

static std::vector<Point3> read_ply(std::istream& in, const std::string& path) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line))
      throw ParseError(path + ": unexpected end of PLY header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  if (next_line() != "ply") throw ParseError(path + ": missing 'ply' magic");
  if (next_line() != "format ascii 1.0")
    throw ParseError(path + ": only 'format ascii 1.0' is supported");

  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  int coord_props = 0;
  for (;;) {
    std::istringstream ls(next_line());
    std::string kw;
    ls >> kw;
    if (kw == "end_header") break;
    if (kw == "comment") continue;
    if (kw == "element") {
      std::string name;
      ls >> name >> vertex_count;
      if (name != "vertex")
        throw ParseError(path + ": unsupported element '" + name + "'");
      in_vertex_element = true;
    } else if (kw == "property") {
      std::string type, name;
      ls >> type >> name;
      if (in_vertex_element && (name == "x" || name == "y" || name == "z"))
        ++coord_props;
      else
        throw ParseError(path + ": unsupported property '" + name + "'");
    } else {
      throw ParseError(path + ": unexpected header line '" + kw + "'");
    }
  }
  if (coord_props != 3)
    throw ParseError(path + ": PLY header must declare properties x, y, z");

  std::vector<Point3> pts;
  pts.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!std::getline(in, line))
      throw ParseError(path + ": vertex count mismatch (expected " +
                       std::to_string(vertex_count) + ", got " +
                       std::to_string(i) + ")");
    ++line_no;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!(ls >> a >> b >> c))
      throw ParseError(path + ":" + std::to_string(line_no) +
                       ": expected three coordinates");
    pts.push_back({parse_coord(a, path, line_no), parse_coord(b, path, line_no),
                   parse_coord(c, path, line_no)});
  }
  return pts;
}

PointCloud load_cloud(const std::string& path, CloudFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::vector<Point3> pts = format == CloudFormat::kXyz ? read_xyz(in, path)
                                                        : read_ply(in, path);
  if (pts.empty()) throw EmptyCloud(path + ": zero points");
  return PointCloud(std::move(pts), false);
}

PointCloud load_cloud(const std::string& path) {
  return load_cloud(path, format_from_path(path));
}

static void write_coord_line(FILE* f, const Point3& p) {
  // %.17g round-trips doubles exactly.
  std::fprintf(f, "%.17g %.17g %.17g\n", p.x, p.y, p.z);
}

void save_cloud(const PointCloud& cloud, const std::string& path,
                CloudFormat format) {
  const std::string tmp = path + ".tmp";
  FILE* f = std::fopen(tmp.c_str(), "w");
  if (!f) throw Error("cannot open " + tmp + " for writing");
  if (format == CloudFormat::kPlyAscii) {
    std::fprintf(f,
                 "ply\nformat ascii 1.0\nelement vertex %zu\n"
                 "property float x\nproperty float y\nproperty float z\n"
                 "end_header\n",
                 cloud.size());
  }
  for (const auto& p : cloud.points()) write_coord_line(f, p);
  std::fclose(f);
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename " + tmp + " to " + path);
}

void save_cloud(const PointCloud& cloud, const std::string& path) {
  save_cloud(cloud, path, format_from_path(path));
}

}  // namespace pcmp
