#pragma once

#include <string>

#include "pcmp/point_cloud.hpp"

namespace pcmp {

enum class CloudFormat { kXyz, kPlyAscii };

// Guess from extension: .ply -> PLY ascii, anything else -> XYZ.
CloudFormat format_from_path(const std::string& path);

PointCloud load_cloud(const std::string& path, CloudFormat format);
PointCloud load_cloud(const std::string& path);

void save_cloud(const PointCloud& cloud, const std::string& path,
                CloudFormat format);
void save_cloud(const PointCloud& cloud, const std::string& path);

}  // namespace pcmp
