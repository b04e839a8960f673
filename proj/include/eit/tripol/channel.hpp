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
#ifndef EIT_TRIPOL_CHANNEL_HPP
#define EIT_TRIPOL_CHANNEL_HPP

#include "eit/capacity/capacity.hpp"
#include "eit/io/cluster_table.hpp"
#include "eit/nearfield/channel.hpp"
#include "eit/nearfield/rays.hpp"
#include "eit/tripol/estimation.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace eit::tripol
{
    using nearfield::Element;
    using nearfield::PatternSet;

    // Local-to-global rotation of a vertical panel whose normal points at azimuth `facing` (rad)
    inline Eigen::Matrix3d panel_orientation(double facing)
    {
        const Position3 z(std::cos(facing), std::sin(facing), 0.0);
        const Position3 y = Position3::UnitZ();
        Eigen::Matrix3d r;
        r.col(0) = y.cross(z);
        r.col(1) = y;
        r.col(2) = z;
        return r;
    }

    // Analytic stand-ins for the UE element patterns: patches polarised along the panel's
    // horizontal (x) and vertical (y) axes, and a short dipole along the panel normal (z)
    // scaled by `third_gain_db`
    inline PatternSet ue_pattern(Pol p, const Eigen::Matrix3d &orientation, double third_gain_db = -10.0)
    {
        switch (p)
        {
        case Pol::x:
            return PatternSet::patch(Position3::UnitX()).rotated(orientation);
        case Pol::y:
            return PatternSet::patch(Position3::UnitY()).rotated(orientation);
        default:
        {
            const double g = std::pow(10.0, third_gain_db / 20.0);
            const PatternSet dipole = PatternSet::short_dipole(Position3::UnitZ());
            return PatternSet(
                       [dipole, g](double t, double ph) {
                           const auto f = dipole(t, ph);
                           return antenna::FieldPair{g * f.theta, g * f.phi};
                       },
                       "dipole-z")
                .rotated(orientation);
        }
        }
    }

    // UE panel (M, N, P): M rows x N columns of ports at half-wavelength spacing,
    // ports split evenly over P polarizations in contiguous x | y | z blocks
    struct UeLayout
    {
        int rows = 2, cols = 6, pols = 3;
        double third_gain_db = -10.0;

        PortCounts counts() const
        {
            const Index per = rows * cols / pols;
            return {per, pols >= 2 ? per : 0, pols >= 3 ? per : 0};
        }

        void validate() const
        {
            detail::require(rows >= 1 && cols >= 1, "UE panel needs at least one row and column");
            detail::require(pols >= 1 && pols <= 3, "UE polarizations must be 1, 2 or 3");
            detail::require((rows * cols) % pols == 0, "UE ports must split evenly over the polarizations");
        }
    };

    inline std::vector<Element> ue_array(const UeLayout &layout, const Position3 &centre, double facing,
                                         double spacing)
    {
        layout.validate();
        const Eigen::Matrix3d r = panel_orientation(facing);
        const auto pos = nearfield::planar_array(centre, r.col(0), r.col(1), layout.cols, layout.rows, spacing,
                                                 spacing, PatternSet::isotropic_vertical());
        const auto counts = layout.counts();
        std::vector<Element> out;
        for (int p = 0; p < layout.pols; ++p)
            for (Index i = 0; i < counts.count(static_cast<Pol>(p)); ++i)
            {
                Element e = pos[out.size()];
                e.pattern = ue_pattern(static_cast<Pol>(p), r, layout.third_gain_db);
                out.push_back(e);
            }
        return out;
    }

    // BS panel facing +x: h x v positions, each with a +45 and a -45 deg slanted patch port
    inline std::vector<Element> bs_array(int h, int v, double width, double height, const Position3 &centre)
    {
        detail::require(h >= 2 && v >= 2, "BS panel needs at least 2 x 2 positions");
        const Eigen::Matrix3d r = panel_orientation(0.0);
        const PatternSet patch = PatternSet::patch(Position3::UnitY()).rotated(r);
        auto plus = nearfield::planar_array(centre, r.col(0), r.col(1), h, v, width / (h - 1), height / (v - 1), patch,
                                            pi / 4);
        const auto minus = nearfield::planar_array(centre, r.col(0), r.col(1), h, v, width / (h - 1),
                                                   height / (v - 1), patch, -pi / 4);
        nearfield::centre_reference(plus);
        plus.insert(plus.end(), minus.begin(), minus.end());
        return plus;
    }

    struct DropConfig
    {
        UeLayout ue;
        int bs_h = 8, bs_v = 16;
        double bs_width = 0.33, bs_height = 1.5; // m
        double bs_z = 25.0, ue_z = 1.5;          // m
        double min_distance = 35.0, max_distance = 300.0;
        double sector_half_width = pi / 3;
        double facing_spread = pi / 3; // UE panel normal within +-spread of the BS direction
        io::ClusterTable clusters;
        nearfield::RayConfig rays;

        void validate() const
        {
            ue.validate();
            detail::require(min_distance > 0.0 && max_distance >= min_distance, "invalid UE distance range");
            detail::require(!clusters.rows.empty(), "drop needs a cluster table");
            rays.validate();
        }
    };

    // One UE drop. The channel is normalised so the strongest UE port has unit mean entry power.
    inline TriPolChannel generate_channel(const DropConfig &cfg, const WaveContext &ctx, std::uint64_t seed)
    {
        cfg.validate();
        Rng rng(derive_seed(seed, 0));
        const double d = sample_uniform(rng, cfg.min_distance, cfg.max_distance);
        const double az = sample_uniform(rng, -cfg.sector_half_width, cfg.sector_half_width);
        const double facing = az + pi + sample_uniform(rng, -cfg.facing_spread, cfg.facing_spread);

        nearfield::ArrayGeometry g;
        g.tx = bs_array(cfg.bs_h, cfg.bs_v, cfg.bs_width, cfg.bs_height, {0.0, 0.0, cfg.bs_z});
        g.rx = ue_array(cfg.ue, {d * std::cos(az), d * std::sin(az), cfg.ue_z}, facing, ctx.wavelength() / 2);
        const auto rays = nearfield::generate_rays(cfg.clusters, g, cfg.rays, derive_seed(seed, 1));

        TriPolChannel ch;
        ch.H = nearfield::planar_narrowband(g, rays, ctx);
        ch.H /= std::sqrt(reference_power(ch.H));
        ch.rx = cfg.ue.counts();
        ch.tx = {static_cast<Index>(cfg.bs_h * cfg.bs_v), static_cast<Index>(cfg.bs_h * cfg.bs_v), 0};
        ch.validate();
        return ch;
    }

    // Rate of SVD precoding designed on `estimate`, equal power over min(N_R, N_S) streams, on the true channel
    inline double precoded_rate(const CMatrix &truth, const CMatrix &estimate, double snr_linear)
    {
        detail::require_shape(truth.rows() == estimate.rows() && truth.cols() == estimate.cols(),
                              "estimate and truth differ in shape");
        const Index k = std::min(truth.rows(), truth.cols());
        Eigen::JacobiSVD<CMatrix> svd(estimate, Eigen::ComputeThinV);
        const CMatrix v = svd.matrixV().leftCols(k);
        return capacity::capacity_equal_power(truth * v, snr_linear, 1.0).capacity;
    }

    struct TrialConfig
    {
        double uplink_snr_db = 10.0;   // at the strongest port
        double downlink_snr_db = 20.0;
        double capacity_snr_db = 10.0;
        int feedback_bits = 0;
        GroupingOptions grouping{};
    };

    struct TrialResult
    {
        double rate_joint = 0.0, rate_benchmark = 0.0, rate_perfect = 0.0;
        double mse_joint = 0.0, mse_benchmark = 0.0; // squared aligned relative error
        std::size_t g2_size = 0, z_ports_in_g2 = 0;
    };

    // Per-port uplink SNR: the reference SNR shifted by each port's power deficit to the strongest port
    inline std::vector<double> uplink_profile(const CMatrix &H, double uplink_snr_db)
    {
        const auto p = port_powers(H);
        const double top = *std::max_element(p.begin(), p.end());
        std::vector<double> snr;
        for (double v : p)
            snr.push_back(uplink_snr_db + 10.0 * std::log10(std::max(v, top * 1e-30) / top));
        return snr;
    }

    // Joint protocol against the uplink-only benchmark on one channel; both share the uplink noise
    inline TrialResult compare_estimators(const TriPolChannel &ch, const TrialConfig &cfg, std::uint64_t seed)
    {
        ch.validate();
        TrialResult r;
        const auto grouping = group_ports(port_powers(ch.H), cfg.grouping);
        ProtocolConfig pc;
        pc.uplink_snr_db = uplink_profile(ch.H, cfg.uplink_snr_db);
        pc.downlink_snr_db = cfg.downlink_snr_db;
        pc.feedback_bits = cfg.feedback_bits;
        const auto joint = run_protocol(ch.H, grouping, pc, seed);
        const CMatrix bench = benchmark_uplink_only(ch.H, pc.uplink_snr_db, seed);

        const double snr = std::pow(10.0, cfg.capacity_snr_db / 10.0);
        r.rate_joint = precoded_rate(ch.H, joint.H, snr);
        r.rate_benchmark = precoded_rate(ch.H, bench, snr);
        r.rate_perfect = precoded_rate(ch.H, ch.H, snr);
        r.mse_joint = std::pow(aligned_error(joint.H, ch.H), 2);
        r.mse_benchmark = std::pow(aligned_error(bench, ch.H), 2);
        r.g2_size = grouping.g2.size();
        const Index z0 = ch.rx.offset(Pol::z);
        for (Index p : grouping.g2)
            r.z_ports_in_g2 += (p >= z0 && p < z0 + ch.rx.z) ? 1 : 0;
        return r;
    }
}

#endif
