// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#include "pcdenoise/metrics.hpp"

#include <iomanip>
#include <sstream>

#include "pcdenoise/errors.hpp"

namespace pcdn {

namespace {
std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}
}  // namespace

std::string EvalReport::csv_header() const {
    return "chamfer,p2s_mean,sigma_estimated,tau_hat,wall_time";
}

std::string EvalReport::csv_row() const {
    std::ostringstream os;
    os << (chamfer >= 0.0 ? fmt(chamfer) : "") << ',' << (p2s_mean >= 0.0 ? fmt(p2s_mean) : "")
       << ',' << (sigma_estimated >= 0.0 ? fmt(sigma_estimated) : "") << ','
       << (tau_hat >= 0 ? std::to_string(tau_hat) : "") << ',' << fmt(wall_time);
    return os.str();
}

std::string EvalReport::table() const {
    std::ostringstream os;
    if (chamfer >= 0.0) os << "chamfer          " << fmt(chamfer) << '\n';
    if (p2s_mean >= 0.0) os << "p2s_mean         " << fmt(p2s_mean) << '\n';
    if (sigma_estimated >= 0.0) os << "sigma_estimated  " << fmt(sigma_estimated) << '\n';
    if (tau_hat >= 0) os << "tau_hat          " << tau_hat << '\n';
    os << "wall_time        " << fmt(wall_time) << '\n';
    return os.str();
}

double chamfer(const PointCloud& a, const PointCloud& b) {
    if (a.empty() || b.empty()) throw InvalidInput("chamfer: empty cloud");
    NeighborIndex ia(a);
    NeighborIndex ib(b);
    double sum_ab = 0.0;
    for (const Vec3& p : a.points) sum_ab += dist_sq(p, b[ib.nearest(p)]);
    double sum_ba = 0.0;
    for (const Vec3& p : b.points) sum_ba += dist_sq(p, a[ia.nearest(p)]);
    return sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size());
}

double point_to_surface(const PointCloud& cloud, const ShapeSpec& shape) {
    if (cloud.empty()) throw InvalidInput("point_to_surface: empty cloud");
    double sum = 0.0;
    for (const Vec3& p : cloud.points) sum += shape.surface_distance(p);
    return sum / static_cast<double>(cloud.size());
}

}  // namespace pcdn
