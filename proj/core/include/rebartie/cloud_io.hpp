#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "rebartie/point_cloud.hpp"

namespace rebartie {

enum class CloudFormat { kPly, kCsv };

/// Parses "ply" / "csv" (case-insensitive); throws Config otherwise.
CloudFormat parse_cloud_format(const std::string& name);
/// Picks the format from the file extension (.ply / .csv).
CloudFormat format_from_path(const std::filesystem::path& path);

/// ASCII PLY with a `vertex` element holding x, y, z and optionally
/// red, green, blue. Other elements are skipped.
PointCloud read_ply(const std::filesystem::path& path);
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);

/// CSV rows x,y,z[,r,g,b]; an optional non-numeric header line is skipped.
PointCloud read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const PointCloud& cloud);
/// Point CSV with an extra integer column (e.g. cluster labels).
void write_csv_with_column(const std::filesystem::path& path,
                           const PointCloud& cloud, const std::string& name,
                           std::span<const int> column);

PointCloud read_cloud(const std::filesystem::path& path);
void write_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                 CloudFormat format);

}  // namespace rebartie
