// Copyright (c) 2026 pcdenoise contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "pcdenoise/datagen.hpp"
#include "pcdenoise/geometry.hpp"

namespace pcdn {

struct EvalReport {
    double chamfer = -1.0;           // < 0: not computed
    double p2s_mean = -1.0;          // < 0: not computed
    double sigma_estimated = -1.0;
    int tau_hat = -1;
    double wall_time = 0.0;          // seconds

    std::string csv_header() const;
    std::string csv_row() const;
    std::string table() const;
};

// Symmetric Chamfer distance with the squared-distance convention:
// mean over a of squared NN distance to b, plus the same with a and b swapped.
double chamfer(const PointCloud& a, const PointCloud& b);

// Mean absolute analytic distance to the shape surface.
double point_to_surface(const PointCloud& cloud, const ShapeSpec& shape);

}  // namespace pcdn
