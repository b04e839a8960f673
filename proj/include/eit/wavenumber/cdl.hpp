// SPDX-License-Identifier: Apache-2.0
//
// eit-mimo: electromagnetic channel modelling and capacity analysis toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#ifndef EIT_WAVENUMBER_CDL_HPP
#define EIT_WAVENUMBER_CDL_HPP

#include "eit/core/wave.hpp"
#include "eit/io/cluster_table.hpp"
#include "eit/wavenumber/support.hpp"
#include "eit/wavenumber/vmf.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace eit::wavenumber
{
    // Global-to-array frame for a planar array whose normal lies in the horizontal plane at
    // azimuth `normal_azimuth` (rad): local z = normal, local y = global z, local x = y cross z.
    inline Eigen::Matrix3d array_frame(double normal_azimuth)
    {
        const Position3 z_l(std::cos(normal_azimuth), std::sin(normal_azimuth), 0.0);
        const Position3 y_l = Position3::UnitZ();
        const Position3 x_l = y_l.cross(z_l);
        Eigen::Matrix3d r;
        r.row(0) = x_l.transpose();
        r.row(1) = y_l.transpose();
        r.row(2) = z_l.transpose();
        return r;
    }

    // VMF mixture built from a cluster table: one lobe per cluster at its arrival (receiver)
    // or departure (transmitter) direction, concentration 1/spread^2 with the spread in radians.
    inline VmfMixture aps_from_clusters(const io::ClusterTable &table, Side side, double normal_azimuth = 0.0,
                                        std::optional<double> spread_deg = std::nullopt)
    {
        const auto powers = table.linear_powers();
        const Eigen::Matrix3d frame = array_frame(normal_azimuth);
        const double deg = pi / 180.0;
        const double spread = spread_deg.value_or(side == Side::receiver ? table.c_asa : table.c_asd) * deg;
        detail::require_positive(spread, "cluster angular spread");
        std::vector<VmfCluster> clusters;
        for (std::size_t i = 0; i < table.rows.size(); ++i)
        {
            const auto &r = table.rows[i];
            const double theta = (side == Side::receiver ? r.zoa : r.zod) * deg;
            const double phi = (side == Side::receiver ? r.aoa : r.aod) * deg;
            const Position3 g(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
            const Position3 l = frame * g;
            VmfCluster c;
            c.weight = powers[i];
            c.mean_theta = std::acos(std::clamp(l.z(), -1.0, 1.0));
            c.mean_phi = std::atan2(l.y(), l.x());
            c.concentration = 1.0 / (spread * spread);
            clusters.push_back(c);
        }
        return VmfMixture::normalized(std::move(clusters));
    }
}

#endif
