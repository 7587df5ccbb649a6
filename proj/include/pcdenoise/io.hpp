// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>

#include "pcdenoise/geometry.hpp"

namespace pcdn {

// ASCII XYZ: one "x y z" triple per line, 9 significant digits, '#' comments
// ignored on read.
void write_xyz(const std::string& path, const PointCloud& cloud);
PointCloud read_xyz(const std::string& path);

// ASCII vertex-only PLY, read support for interoperability.
PointCloud read_ply(const std::string& path);

// Dispatch on extension: .ply uses the PLY reader, everything else XYZ.
PointCloud read_cloud(const std::string& path);

// Sidecar metadata and config files share a "key = value" line format;
// '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(const std::string& path, const KeyValues& kv);
KeyValues read_key_values(const std::string& path);

}  // namespace pcdn
