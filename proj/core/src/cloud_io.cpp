#include "rebartie/cloud_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "rebartie/error.hpp"

namespace rebartie {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::uint8_t to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

}  // namespace

CloudFormat parse_cloud_format(const std::string& name) {
  const std::string n = lower(name);
  if (n == "ply") return CloudFormat::kPly;
  if (n == "csv") return CloudFormat::kCsv;
  throw Error(ErrorCode::kConfig, "unknown cloud format '" + name + "'");
}

CloudFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower(path.extension().string());
  if (ext == ".ply") return CloudFormat::kPly;
  if (ext == ".csv") return CloudFormat::kCsv;
  throw Error(ErrorCode::kConfig,
              "cannot infer cloud format from " + path.string());
}

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || lower(line).rfind("ply", 0) != 0) {
    throw Error(ErrorCode::kIo, path.string() + ": missing ply magic");
  }

  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
    bool has_list = false;
  };
  std::vector<Element> elements;
  bool ascii = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (key == "element") {
      Element e;
      ls >> e.name >> e.count;
      elements.push_back(e);
    } else if (key == "property") {
      if (elements.empty()) throw Error(ErrorCode::kIo, "property before element");
      std::string type, name;
      ls >> type;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type;
        elements.back().has_list = true;
      }
      ls >> name;
      elements.back().properties.push_back(name);
    } else if (key == "end_header") {
      break;
    }
  }
  if (!ascii) throw Error(ErrorCode::kIo, path.string() + ": only ASCII PLY is supported");

  PointCloud cloud;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count && std::getline(in, line); ++i) {
      }
      continue;
    }
    auto find = [&](const std::string& n) -> int {
      auto it = std::find(e.properties.begin(), e.properties.end(), n);
      return it == e.properties.end() ? -1 : static_cast<int>(it - e.properties.begin());
    };
    const int ix = find("x"), iy = find("y"), iz = find("z");
    const int ir = find("red"), ig = find("green"), ib = find("blue");
    if (ix < 0 || iy < 0 || iz < 0) {
      throw Error(ErrorCode::kIo, path.string() + ": vertex lacks x/y/z");
    }
    const bool color = ir >= 0 && ig >= 0 && ib >= 0;
    cloud.points.reserve(e.count);
    if (color) cloud.colors.emplace();
    std::vector<double> values(e.properties.size());
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!std::getline(in, line)) {
        throw Error(ErrorCode::kIo, path.string() + ": truncated vertex list");
      }
      std::istringstream ls(line);
      for (double& v : values) {
        if (!(ls >> v)) throw Error(ErrorCode::kIo, path.string() + ": bad vertex row");
      }
      cloud.points.emplace_back(values[ix], values[iy], values[iz]);
      if (color) {
        cloud.colors->push_back(
            {to_channel(values[ir]), to_channel(values[ig]), to_channel(values[ib])});
      }
    }
  }
  cloud.validate();
  return cloud;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out = open_out(path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors()) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z();
    if (cloud.has_colors()) {
      const Rgb& c = (*cloud.colors)[i];
      out << ' ' << int(c[0]) << ' ' << int(c[1]) << ' ' << int(c[2]);
    }
    out << '\n';
  }
}

PointCloud read_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  PointCloud cloud;
  std::string line;
  bool first = true;
  int columns = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    const bool numeric = ls.eof();
    if (!numeric) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw Error(ErrorCode::kIo, path.string() + ": non-numeric row");
    }
    first = false;
    if (row.size() < 3) throw Error(ErrorCode::kIo, path.string() + ": row with < 3 columns");
    if (columns < 0) {
      columns = static_cast<int>(row.size());
      if (columns >= 6) cloud.colors.emplace();
    }
    cloud.points.emplace_back(row[0], row[1], row[2]);
    if (cloud.colors) {
      if (row.size() < 6) throw Error(ErrorCode::kIo, path.string() + ": inconsistent columns");
      cloud.colors->push_back({to_channel(row[3]), to_channel(row[4]), to_channel(row[5])});
    }
  }
  cloud.validate();
  return cloud;
}

namespace {

void write_csv_impl(const std::filesystem::path& path, const PointCloud& cloud,
                    const std::string* extra_name, std::span<const int> extra) {
  std::ofstream out = open_out(path);
  out << "x,y,z";
  if (cloud.has_colors()) out << ",r,g,b";
  if (extra_name) out << ',' << *extra_name;
  out << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    out << p.x() << ',' << p.y() << ',' << p.z();
    if (cloud.has_colors()) {
      const Rgb& c = (*cloud.colors)[i];
      out << ',' << int(c[0]) << ',' << int(c[1]) << ',' << int(c[2]);
    }
    if (extra_name) out << ',' << extra[i];
    out << '\n';
  }
}

}  // namespace

void write_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  write_csv_impl(path, cloud, nullptr, {});
}

void write_csv_with_column(const std::filesystem::path& path,
                           const PointCloud& cloud, const std::string& name,
                           std::span<const int> column) {
  if (column.size() != cloud.size()) {
    throw Error(ErrorCode::kShapeMismatch, "column length differs from cloud size");
  }
  write_csv_impl(path, cloud, &name, column);
}

PointCloud read_cloud(const std::filesystem::path& path) {
  return format_from_path(path) == CloudFormat::kPly ? read_ply(path)
                                                     : read_csv(path);
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                 CloudFormat format) {
  if (format == CloudFormat::kPly) {
    write_ply(path, cloud);
  } else {
    write_csv(path, cloud);
  }
}

}  // namespace rebartie
