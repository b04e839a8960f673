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

#ifndef EIT_EM_CHANNEL_HPP
#define EIT_EM_CHANNEL_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"
#include "eit/em/green.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <span>
#include <string>
#include <vector>

namespace eit::em
{
    // Point/weight discretisation of a linear, planar or volumetric aperture.
    // Weights carry m, m^2 or m^3 depending on the dimensionality.
    class Aperture
    {
    public:
        Aperture(std::vector<Position3> points, std::vector<double> weights, int dimensionality)
            : points_(std::move(points)), weights_(std::move(weights)), dimensionality_(dimensionality)
        {
            detail::require_shape(!points_.empty(), "aperture needs at least one point");
            detail::require_shape(points_.size() == weights_.size(), "aperture points/weights size mismatch");
            detail::require(dimensionality_ >= 1 && dimensionality_ <= 3, "aperture dimensionality must be 1, 2 or 3");
            for (std::size_t i = 0; i < points_.size(); ++i)
            {
                detail::require(is_finite(points_[i]), "aperture point " + std::to_string(i) + " is not finite");
                detail::require(weights_[i] > 0.0, "aperture weight " + std::to_string(i) + " must be positive");
            }
            for (std::size_t a = 0; a < points_.size(); ++a)
                for (std::size_t b = a + 1; b < points_.size(); ++b)
                    extent_ = std::max(extent_, (points_[a] - points_[b]).norm());
        }

        // Unit-weight point set: conventional antennas as delta functions
        static Aperture discrete(std::vector<Position3> points)
        {
            std::vector<double> w(points.size(), 1.0);
            return Aperture(std::move(points), std::move(w), 1);
        }

        // Midpoint rule on a segment [start, start + length * axis]
        static Aperture line(const Position3 &start, const Position3 &axis, double length, std::size_t cells)
        {
            detail::require_positive(length, "line aperture length");
            detail::require(cells >= 1, "line aperture needs at least one cell");
            const Position3 dir = axis.normalized();
            const double h = length / static_cast<double>(cells);
            std::vector<Position3> pts;
            for (std::size_t i = 0; i < cells; ++i)
                pts.push_back(start + (static_cast<double>(i) + 0.5) * h * dir);
            return Aperture(std::move(pts), std::vector<double>(cells, h), 1);
        }

        // Midpoint rule on an Lx x Ly rectangle spanned by (ex, ey) from `origin`
        static Aperture rectangle(const Position3 &origin, const Position3 &ex, const Position3 &ey, double lx, double ly,
                                  std::size_t nx, std::size_t ny)
        {
            detail::require_positive(lx, "rectangle aperture Lx");
            detail::require_positive(ly, "rectangle aperture Ly");
            detail::require(nx >= 1 && ny >= 1, "rectangle aperture needs at least one cell per axis");
            const double hx = lx / static_cast<double>(nx), hy = ly / static_cast<double>(ny);
            std::vector<Position3> pts;
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t ix = 0; ix < nx; ++ix)
                    pts.push_back(origin + (ix + 0.5) * hx * ex.normalized() + (iy + 0.5) * hy * ey.normalized());
            return Aperture(std::move(pts), std::vector<double>(nx * ny, hx * hy), 2);
        }

        const std::vector<Position3> &points() const { return points_; }
        const std::vector<double> &weights() const { return weights_; }
        int dimensionality() const { return dimensionality_; }
        std::size_t size() const { return points_.size(); }
        double extent() const { return extent_; } // largest pairwise distance

    private:
        std::vector<Position3> points_;
        std::vector<double> weights_;
        int dimensionality_;
        double extent_ = 0.0;
    };

    enum class PortKind
    {
        precoding, // psi_n(s): port signal -> current density on the Tx aperture
        combining  // phi_m(r): field sampling on the Rx aperture
    };

    // A port's vector function sampled on the points of its aperture
    struct PortFunction
    {
        std::vector<CVector3> samples;
        PortKind kind = PortKind::precoding;

        // Delta at point `index` of an aperture with `count` points, carrying polarisation `pol`
        static PortFunction delta(std::size_t count, std::size_t index, const CVector3 &pol, PortKind kind)
        {
            detail::require(index < count, "delta port index out of range");
            PortFunction f{std::vector<CVector3>(count, CVector3::Zero()), kind};
            f.samples[index] = pol;
            return f;
        }
    };

    using EmChannelMatrix = CMatrix;

    namespace detail_channel
    {
        inline void check_samples(const PortFunction &f, const Aperture &ap, const char *what)
        {
            if (f.samples.size() != ap.size())
                throw shape_error(std::string(what) + " has " + std::to_string(f.samples.size()) +
                                  " samples but its aperture has " + std::to_string(ap.size()) + " points");
        }

        // E_n(r_q) = sum_p w_p G(r_q, s_p) psi_n(s_p)
        inline std::vector<CVector3> radiated_field(const PortFunction &psi, const Aperture &rx, const Aperture &tx,
                                                    const WaveContext &ctx)
        {
            std::vector<CVector3> field(rx.size(), CVector3::Zero());
            for (std::size_t q = 0; q < rx.size(); ++q)
                for (std::size_t p = 0; p < tx.size(); ++p)
                {
                    if (psi.samples[p].isZero(0.0))
                    {
                        if ((rx.points()[q] - tx.points()[p]).norm() == 0.0)
                            throw singularity_error("receive and transmit apertures share a point");
                        continue;
                    }
                    field[q] += tx.weights()[p] * (dyadic_green(rx.points()[q], tx.points()[p], ctx) * psi.samples[p]);
                }
            return field;
        }
    }

    // g_{m,n} = -j w mu sum_q sum_p w_q w_p phi_m(r_q)^H G(r_q, s_p) psi_n(s_p)
    inline cplx em_channel_entry(const PortFunction &phi_m, const PortFunction &psi_n, const Aperture &aperture_r,
                                 const Aperture &aperture_s, const WaveContext &ctx)
    {
        detail_channel::check_samples(phi_m, aperture_r, "combining function");
        detail_channel::check_samples(psi_n, aperture_s, "precoding function");
        cplx acc = 0.0;
        for (std::size_t q = 0; q < aperture_r.size(); ++q)
            for (std::size_t p = 0; p < aperture_s.size(); ++p)
            {
                const DyadicValue g = dyadic_green(aperture_r.points()[q], aperture_s.points()[p], ctx);
                acc += aperture_r.weights()[q] * aperture_s.weights()[p] * phi_m.samples[q].dot(g * psi_n.samples[p]);
            }
        return -j * ctx.angular_frequency() * ctx.permeability() * acc;
    }

    // M x N port-to-port matrix G. Each precoding function's field is computed once and
    // reused for all combining functions.
    inline EmChannelMatrix assemble_em_channel(std::span<const PortFunction> phis, std::span<const PortFunction> psis,
                                               const Aperture &aperture_r, const Aperture &aperture_s,
                                               const WaveContext &ctx)
    {
        detail::require_shape(!phis.empty() && !psis.empty(), "need at least one combining and one precoding function");
        for (const auto &f : phis)
            detail_channel::check_samples(f, aperture_r, "combining function");
        for (const auto &f : psis)
            detail_channel::check_samples(f, aperture_s, "precoding function");

        const cplx scale = -j * ctx.angular_frequency() * ctx.permeability();
        EmChannelMatrix G(static_cast<Eigen::Index>(phis.size()), static_cast<Eigen::Index>(psis.size()));
        for (std::size_t n = 0; n < psis.size(); ++n)
        {
            const auto field = detail_channel::radiated_field(psis[n], aperture_r, aperture_s, ctx);
            for (std::size_t m = 0; m < phis.size(); ++m)
            {
                cplx acc = 0.0;
                for (std::size_t q = 0; q < aperture_r.size(); ++q)
                    acc += aperture_r.weights()[q] * phis[m].samples[q].dot(field[q]);
                G(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = scale * acc;
            }
        }
        return G;
    }
}

#endif
