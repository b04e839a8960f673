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
#ifndef EIT_NEARFIELD_RAYS_HPP
#define EIT_NEARFIELD_RAYS_HPP

#include "eit/core/random.hpp"
#include "eit/io/cluster_table.hpp"
#include "eit/nearfield/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace eit::nearfield
{
    struct RayConfig
    {
        double delay_spread = 100e-9;  // s
        double first_excess = 20e-9;   // s, excess delay of the first cluster over the LOS path
        int rays_per_cluster = 20;     // 1..20
        double xpr_std_db = 0.0;       // XPR mean comes from the table

        void validate() const
        {
            detail::require(delay_spread >= 0.0, "delay spread must be non-negative");
            detail::require(first_excess > 0.0, "first-cluster excess delay must be positive");
            detail::require(rays_per_cluster >= 1 && rays_per_cluster <= 20, "rays per cluster must be in [1, 20]");
            detail::require(xpr_std_db >= 0.0, "XPR spread must be non-negative");
        }
    };

    // Ray offset angles of a cluster, in units of the cluster spread
    inline constexpr std::array<double, 20> ray_offsets{0.0447,  -0.0447, 0.1413,  -0.1413, 0.2492,  -0.2492, 0.3715,
                                                       -0.3715, 0.5129,  -0.5129, 0.6797,  -0.6797, 0.8844,  -0.8844,
                                                       1.1481,  -1.1481, 1.5195,  -1.5195, 2.1551,  -2.1551};

    // Rays of a cluster delay line anchored on the direct path between the reference elements.
    // Table azimuths are offsets from the LOS departure (AoD) and from the reversed LOS arrival
    // (AoA - 180 deg); table zeniths are offsets from 90 deg.
    inline std::vector<ClusterRay> generate_rays(const io::ClusterTable &table, const ArrayGeometry &geom,
                                                 const RayConfig &cfg, std::uint64_t seed)
    {
        cfg.validate();
        geom.validate();
        const double deg = pi / 180.0;
        const Position3 los = geom.rx_ref() - geom.tx_ref();
        const double d0 = los.norm();
        detail::require(d0 > 0.0, "Tx and Rx reference elements coincide");
        const auto [zod0, aod0] = antenna::angles_of(los);
        const auto [zoa0, aoa0] = antenna::angles_of(-los);
        const auto powers = table.linear_powers();
        const int M = cfg.rays_per_cluster;
        const double eps = 1e-6;

        std::vector<ClusterRay> rays;
        for (std::size_t n = 0; n < table.rows.size(); ++n)
        {
            const auto &row = table.rows[n];
            Rng rng(derive_seed(seed, n));
            std::array<std::vector<int>, 4> order;
            for (auto &o : order)
            {
                o.resize(static_cast<std::size_t>(M));
                std::iota(o.begin(), o.end(), 0);
                std::shuffle(o.begin(), o.end(), rng);
            }
            for (int m = 0; m < M; ++m)
            {
                auto off = [&](int k) { return ray_offsets[static_cast<std::size_t>(order[k][m])]; };
                ClusterRay r;
                r.cluster = static_cast<int>(n);
                r.ray = m;
                r.rays_in_cluster = M;
                r.power = powers[n];
                r.delay = d0 / speed_of_light + cfg.first_excess + row.delay_norm * cfg.delay_spread;
                r.aod = aod0 + (row.aod + table.c_asd * off(0)) * deg;
                r.aoa = aoa0 + (row.aoa - 180.0 + table.c_asa * off(1)) * deg;
                r.zod = std::clamp(zod0 + (row.zod - 90.0 + table.c_zsd * off(2)) * deg, eps, pi - eps);
                r.zoa = std::clamp(zoa0 + (row.zoa - 90.0 + table.c_zsa * off(3)) * deg, eps, pi - eps);
                r.xpr = db_to_linear(cfg.xpr_std_db > 0.0 ? sample_normal(rng, table.xpr_db, cfg.xpr_std_db) : table.xpr_db);
                for (auto &p : r.phases)
                    p = sample_uniform(rng, -pi, pi);
                rays.push_back(r);
            }
        }
        return rays;
    }
}

#endif
