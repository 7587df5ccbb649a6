// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcdenoise/errors.hpp"

namespace pcdn {

namespace {

bool blank_or_comment(const std::string& line) {
    for (char c : line) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

Vec3 parse_point_line(const std::string& line, const std::string& path, int line_no) {
    std::istringstream is(line);
    Vec3 p;
    if (!(is >> p.x >> p.y >> p.z))
        throw ParseError(path + ":" + std::to_string(line_no) + ": expected three coordinates");
    return p;
}

}  // namespace

void write_xyz(const std::string& path, const PointCloud& cloud) {
    std::ofstream os(path);
    if (!os) throw IoError("write_xyz: cannot open " + path + " for writing");
    char buf[96];
    for (const Vec3& p : cloud.points) {
        std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
        os << buf;
    }
    if (!os) throw IoError("write_xyz: write failed for " + path);
}

PointCloud read_xyz(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_xyz: cannot open " + path);
    PointCloud cloud;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        cloud.points.push_back(parse_point_line(line, path, line_no));
    }
    if (cloud.empty()) throw ParseError(path + ": no points found");
    return cloud;
}

PointCloud read_ply(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_ply: cannot open " + path);
    std::string line;
    int line_no = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(is, line)) return false;
        ++line_no;
        return true;
    };

    if (!next_line() || trim(line) != "ply")
        throw ParseError(path + ":1: not a PLY file");

    int vertex_count = -1;
    int property_count = 0;
    bool in_vertex_element = false;
    bool ascii = false;
    while (next_line()) {
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        if (word == "format") {
            std::string fmt;
            ls >> fmt;
            ascii = fmt == "ascii";
        } else if (word == "element") {
            std::string name;
            int count = 0;
            ls >> name >> count;
            in_vertex_element = name == "vertex";
            if (in_vertex_element) vertex_count = count;
        } else if (word == "property" && in_vertex_element) {
            ++property_count;
        } else if (word == "end_header") {
            break;
        }
    }
    if (!ascii) throw ParseError(path + ": only ASCII PLY is supported");
    if (vertex_count < 1) throw ParseError(path + ": missing vertex element");
    if (property_count < 3) throw ParseError(path + ": vertex element needs x y z properties");

    PointCloud cloud;
    cloud.points.reserve(static_cast<size_t>(vertex_count));
    while (static_cast<int>(cloud.points.size()) < vertex_count && next_line()) {
        if (blank_or_comment(line)) continue;
        cloud.points.push_back(parse_point_line(line, path, line_no));
    }
    if (static_cast<int>(cloud.points.size()) != vertex_count)
        throw ParseError(path + ": truncated vertex list");
    return cloud;
}

PointCloud read_cloud(const std::string& path) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".ply") return read_ply(path);
    return read_xyz(path);
}

void write_key_values(const std::string& path, const KeyValues& kv) {
    std::ofstream os(path);
    if (!os) throw IoError("write_key_values: cannot open " + path + " for writing");
    for (const auto& [k, v] : kv) os << k << " = " << v << '\n';
    if (!os) throw IoError("write_key_values: write failed for " + path);
}

KeyValues read_key_values(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("read_key_values: cannot open " + path);
    KeyValues kv;
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (blank_or_comment(line)) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected key = value");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace pcdn
