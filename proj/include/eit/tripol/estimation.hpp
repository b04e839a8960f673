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
#ifndef EIT_TRIPOL_ESTIMATION_HPP
#define EIT_TRIPOL_ESTIMATION_HPP

#include "eit/core/error.hpp"
#include "eit/core/random.hpp"
#include "eit/core/wave.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace eit::tripol
{
    using Index = Eigen::Index;

    enum class Pol
    {
        x = 0,
        y = 1,
        z = 2
    };

    // Ports per polarization, laid out as contiguous x | y | z blocks
    struct PortCounts
    {
        Index x = 0, y = 0, z = 0;

        Index total() const { return x + y + z; }
        Index count(Pol p) const { return std::array<Index, 3>{x, y, z}[static_cast<int>(p)]; }
        Index offset(Pol p) const
        {
            return p == Pol::x ? 0 : p == Pol::y ? x : x + y;
        }
    };

    struct TriPolChannel
    {
        CMatrix H; // N_R x N_S
        PortCounts rx, tx;

        void validate() const
        {
            detail::require(rx.x >= 0 && rx.y >= 0 && rx.z >= 0 && tx.x >= 0 && tx.y >= 0 && tx.z >= 0,
                            "port counts must be non-negative");
            detail::require_shape(H.rows() == rx.total() && H.cols() == tx.total(),
                                  "channel is " + std::to_string(H.rows()) + "x" + std::to_string(H.cols()) +
                                      " but the port counts give " + std::to_string(rx.total()) + "x" +
                                      std::to_string(tx.total()));
        }

        // H_ij: Rx polarization i, Tx polarization j
        CMatrix block(Pol i, Pol j) const
        {
            validate();
            return H.block(rx.offset(i), tx.offset(j), rx.count(i), tx.count(j));
        }
    };

    struct PortGrouping
    {
        std::vector<Index> g1, g2; // ascending Rx port indices
        std::vector<double> power; // per Rx port, linear

        void validate(Index ports) const
        {
            std::vector<int> seen(static_cast<std::size_t>(ports), 0);
            for (const auto *g : {&g1, &g2})
                for (Index p : *g)
                {
                    detail::require(p >= 0 && p < ports, "port index " + std::to_string(p) + " out of range");
                    ++seen[static_cast<std::size_t>(p)];
                }
            detail::require(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }),
                            "port groups must partition the ports");
        }
    };

    enum class GroupingRule
    {
        median,   // G1 = ports with power >= median
        threshold // G1 = ports with power >= theta * max
    };

    struct GroupingOptions
    {
        GroupingRule rule = GroupingRule::median;
        double theta = 0.1;
    };

    inline PortGrouping group_ports(const std::vector<double> &power, const GroupingOptions &opt = {})
    {
        detail::require(!power.empty(), "port grouping needs at least one port");
        for (double p : power)
            detail::require(p >= 0.0 && std::isfinite(p), "port powers must be finite and non-negative");
        double cut;
        if (opt.rule == GroupingRule::median)
        {
            std::vector<double> s = power;
            std::sort(s.begin(), s.end());
            const std::size_t n = s.size();
            cut = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
        }
        else
        {
            detail::require(opt.theta > 0.0 && opt.theta <= 1.0, "grouping threshold must lie in (0, 1]");
            cut = opt.theta * *std::max_element(power.begin(), power.end());
        }
        PortGrouping g;
        g.power = power;
        for (std::size_t i = 0; i < power.size(); ++i)
            (power[i] >= cut ? g.g1 : g.g2).push_back(static_cast<Index>(i));
        return g;
    }

    // Squared norm of each Rx row
    inline std::vector<double> port_powers(const CMatrix &H)
    {
        std::vector<double> p;
        for (Index r = 0; r < H.rows(); ++r)
            p.push_back(H.row(r).squaredNorm());
        return p;
    }

    // Mean entry power of the strongest Rx row; pilot SNRs are quoted against it
    inline double reference_power(const CMatrix &H)
    {
        double best = 0.0;
        for (Index r = 0; r < H.rows(); ++r)
            best = std::max(best, H.row(r).squaredNorm() / static_cast<double>(H.cols()));
        return best;
    }

    inline double noise_variance(double reference, double snr_db)
    {
        if (std::isinf(snr_db) && snr_db > 0)
            return 0.0;
        return reference * std::pow(10.0, -snr_db / 10.0);
    }

    inline CMatrix select_rows(const CMatrix &M, const std::vector<Index> &rows)
    {
        CMatrix out(static_cast<Index>(rows.size()), M.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            out.row(static_cast<Index>(i)) = M.row(rows[i]);
        return out;
    }

    namespace detail_est
    {
        // Unit-variance complex Gaussian matrix drawn in a fixed order, so that
        // estimates sharing a seed share their noise row by row
        inline CMatrix unit_noise(Index rows, Index cols, std::uint64_t seed)
        {
            Rng rng(seed);
            CMatrix n(rows, cols);
            for (Index r = 0; r < rows; ++r)
                for (Index c = 0; c < cols; ++c)
                    n(r, c) = sample_cn(rng);
            return n;
        }
    }

    // Uplink estimate of the given Rx rows with a per-row pilot SNR (dB, +inf for noiseless)
    inline CMatrix uplink_estimate(const CMatrix &H, const std::vector<Index> &rows,
                                   const std::vector<double> &row_snr_db, std::uint64_t seed)
    {
        detail::require(!rows.empty(), "uplink estimation needs a nonempty port group");
        detail::require_shape(row_snr_db.size() == rows.size(), "one pilot SNR per estimated port is required");
        const double ref = reference_power(H);
        const CMatrix noise = detail_est::unit_noise(H.rows(), H.cols(), seed);
        CMatrix out(static_cast<Index>(rows.size()), H.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
            detail::require(rows[i] >= 0 && rows[i] < H.rows(), "port index out of range");
            const double var = noise_variance(ref, row_snr_db[i]);
            out.row(static_cast<Index>(i)) = H.row(rows[i]);
            if (var > 0.0)
                out.row(static_cast<Index>(i)) += std::sqrt(var) * noise.row(rows[i]);
        }
        return out;
    }

    inline CMatrix uplink_estimate(const CMatrix &H, const std::vector<Index> &rows, double snr_db,
                                   std::uint64_t seed)
    {
        return uplink_estimate(H, rows, std::vector<double>(rows.size(), snr_db), seed);
    }

    struct DownlinkMeasurement
    {
        CMatrix h1, h2; // rows of G1 and G2
    };

    inline DownlinkMeasurement downlink_measure(const CMatrix &H, const PortGrouping &grouping, double snr_db,
                                                std::uint64_t seed)
    {
        grouping.validate(H.rows());
        const double var = noise_variance(reference_power(H), snr_db);
        CMatrix hd = H;
        if (var > 0.0)
            hd += std::sqrt(var) * detail_est::unit_noise(H.rows(), H.cols(), seed);
        return {select_rows(hd, grouping.g1), select_rows(hd, grouping.g2)};
    }

    struct NormalizationRecord
    {
        double amplitude = 1.0; // rho
        double phase = 0.0;     // omega, rad
    };

    // M' = M / (rho e^{j omega}); rho = Frobenius norm, omega = phase of the first nonzero entry (row-major)
    inline std::pair<CMatrix, NormalizationRecord> normalize(const CMatrix &M)
    {
        const double rho = M.norm();
        detail::require(rho > 0.0 && std::isfinite(rho), "cannot normalise a zero matrix");
        NormalizationRecord rec{rho, 0.0};
        bool found = false;
        for (Index r = 0; r < M.rows() && !found; ++r)
            for (Index c = 0; c < M.cols() && !found; ++c)
                if (M(r, c) != cplx(0.0, 0.0))
                {
                    rec.phase = std::arg(M(r, c));
                    found = true;
                }
        return {M / std::polar(rho, rec.phase), rec};
    }

    inline cplx combining_reference(const NormalizationRecord &rec1, const NormalizationRecord &rec2)
    {
        detail::require(rec2.amplitude > 0.0, "combining reference needs a nonzero second amplitude");
        return std::polar(rec1.amplitude, rec1.phase) / std::polar(rec2.amplitude, rec2.phase);
    }

    // Uniform mid-rise quantizer on [-1, 1] applied to real and imaginary parts; bits = 0 is lossless
    inline CMatrix quantize(const CMatrix &M, int bits)
    {
        detail::require(bits >= 0 && bits <= 30, "quantizer bits must lie in [0, 30]");
        if (bits == 0)
            return M;
        const double levels = std::ldexp(1.0, bits);
        const double step = 2.0 / levels;
        auto q = [&](double v) {
            const double k = std::clamp(std::floor((v + 1.0) / step), 0.0, levels - 1.0);
            return -1.0 + (k + 0.5) * step;
        };
        return M.unaryExpr([&](const cplx &z) { return cplx(q(z.real()), q(z.imag())); });
    }

    struct TriPolEstimate
    {
        CMatrix h1u_adjusted; // G1 rows, normalised uplink estimate scaled by delta
        CMatrix h2d_normalized;
        cplx delta{1.0, 0.0};
        CMatrix H; // assembled, rows in the original port order
    };

    inline TriPolEstimate joint_estimate(const CMatrix &h1u, cplx delta, const CMatrix &h2d_normalized,
                                         const PortGrouping &grouping)
    {
        detail::require(delta != cplx(0.0, 0.0), "combining reference is zero");
        const auto n1 = static_cast<Index>(grouping.g1.size());
        const auto n2 = static_cast<Index>(grouping.g2.size());
        grouping.validate(n1 + n2);
        detail::require_shape(h1u.rows() == n1, "uplink estimate rows do not match G1");
        detail::require_shape(h2d_normalized.rows() == n2, "downlink estimate rows do not match G2");
        detail::require_shape(n2 == 0 || h1u.cols() == h2d_normalized.cols(), "estimate column counts differ");

        TriPolEstimate est;
        est.delta = delta;
        est.h1u_adjusted = normalize(h1u).first * delta;
        est.h2d_normalized = h2d_normalized;
        est.H.resize(n1 + n2, h1u.cols());
        for (Index i = 0; i < n1; ++i)
            est.H.row(grouping.g1[static_cast<std::size_t>(i)]) = est.h1u_adjusted.row(i);
        for (Index i = 0; i < n2; ++i)
            est.H.row(grouping.g2[static_cast<std::size_t>(i)]) = h2d_normalized.row(i);
        return est;
    }

    struct ProtocolConfig
    {
        std::vector<double> uplink_snr_db; // per Rx port
        double downlink_snr_db = 10.0;
        int feedback_bits = 0;             // 0: unquantised feedback
    };

    // Steps 2-5 for a given grouping. Uplink noise uses derive_seed(seed, 1), downlink derive_seed(seed, 2).
    inline TriPolEstimate run_protocol(const CMatrix &H, const PortGrouping &grouping, const ProtocolConfig &cfg,
                                       std::uint64_t seed)
    {
        grouping.validate(H.rows());
        detail::require_shape(static_cast<Index>(cfg.uplink_snr_db.size()) == H.rows(),
                              "one uplink SNR per Rx port is required");
        std::vector<double> snr1;
        for (Index p : grouping.g1)
            snr1.push_back(cfg.uplink_snr_db[static_cast<std::size_t>(p)]);
        const CMatrix h1u = uplink_estimate(H, grouping.g1, snr1, derive_seed(seed, 1));
        if (grouping.g2.empty())
            return joint_estimate(h1u, 1.0, CMatrix(0, H.cols()), grouping);

        const auto dl = downlink_measure(H, grouping, cfg.downlink_snr_db, derive_seed(seed, 2));
        const auto [h2n, rec2] = normalize(dl.h2);
        const auto rec1 = normalize(dl.h1).second;
        return joint_estimate(h1u, combining_reference(rec1, rec2), quantize(h2n, cfg.feedback_bits), grouping);
    }

    // Uplink-only estimate of every port at its own pilot SNR
    inline CMatrix benchmark_uplink_only(const CMatrix &H, const std::vector<double> &port_snr_db, std::uint64_t seed)
    {
        std::vector<Index> all(static_cast<std::size_t>(H.rows()));
        std::iota(all.begin(), all.end(), Index{0});
        return uplink_estimate(H, all, port_snr_db, derive_seed(seed, 1));
    }

    // Relative error after the best complex scalar alignment of the estimate onto the truth
    inline double aligned_error(const CMatrix &estimate, const CMatrix &truth)
    {
        detail::require_shape(estimate.rows() == truth.rows() && estimate.cols() == truth.cols(),
                              "estimate and truth differ in shape");
        const double e2 = estimate.squaredNorm();
        detail::require(e2 > 0.0 && truth.norm() > 0.0, "aligned error of a zero matrix");
        const cplx c = (estimate.array().conjugate() * truth.array()).sum() / e2;
        return (c * estimate - truth).norm() / truth.norm();
    }
}

#endif
