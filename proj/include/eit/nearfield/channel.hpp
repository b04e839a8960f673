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
#ifndef EIT_NEARFIELD_CHANNEL_HPP
#define EIT_NEARFIELD_CHANNEL_HPP

#include "eit/core/random.hpp"
#include "eit/nearfield/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace eit::nearfield
{
    enum class Wavefront
    {
        spherical, // exact per-element distances and angles
        planar     // angles at the reference elements, linear phase across the arrays
    };

    namespace detail_channel
    {
        inline cplx contract(const FieldPair &rx, const cplx (&m)[2][2], const FieldPair &tx)
        {
            return rx.theta * (m[0][0] * tx.theta + m[0][1] * tx.phi) + rx.phi * (m[1][0] * tx.theta + m[1][1] * tx.phi);
        }

        inline cplx doppler(const Position3 &rhat, const MotionState &motion, double t, double lambda)
        {
            if (t == 0.0)
                return 1.0;
            return std::exp(j * (2.0 * pi * rhat.dot(motion.velocity) / lambda * t));
        }
    }

    // LOS coefficient between Rx element u and Tx element s
    inline cplx los_coefficient(std::size_t u, std::size_t s, double t, const ArrayGeometry &geom,
                                const MotionState &motion, const WaveContext &ctx,
                                Wavefront wavefront = Wavefront::spherical)
    {
        detail::require(u < geom.rx.size() && s < geom.tx.size(), "element index out of range");
        const double lambda = ctx.wavelength();
        const Position3 &pu = geom.rx[u].position;
        const Position3 &ps = geom.tx[s].position;
        const Position3 r00 = geom.rx_ref() - geom.tx_ref();
        const double d00 = r00.norm();
        detail::require(d00 > 0.0, "Tx and Rx reference elements coincide");

        Position3 dep;    // unit, Tx element toward Rx element
        double excess;    // d00 - d_us
        if (wavefront == Wavefront::spherical)
        {
            const Position3 r = pu - ps;
            const double dus = r.norm();
            detail::require(dus > 0.0, "Tx element " + std::to_string(s) + " coincides with Rx element " +
                                           std::to_string(u));
            dep = r / dus;
            excess = d00 - dus;
        }
        else
        {
            dep = r00 / d00;
            excess = -dep.dot(pu - geom.rx_ref()) + dep.dot(ps - geom.tx_ref());
        }
        static constexpr cplx pol[2][2] = {{1.0, 0.0}, {0.0, -1.0}};
        const cplx gain = detail_channel::contract(geom.rx[u].field(-dep), pol, geom.tx[s].field(dep));
        return gain * std::exp(-j * (2.0 * pi * d00 / lambda)) * std::exp(j * (2.0 * pi * excess / lambda)) *
               detail_channel::doppler(-dep, motion, t, lambda);
    }

    // NLOS coefficient of one ray. The bounce geometry is ignored for the planar wavefront,
    // which uses the ray's angles at the reference elements.
    inline cplx nlos_coefficient(std::size_t u, std::size_t s, const ClusterRay &ray, const BounceGeometry &bounce,
                                 double t, const ArrayGeometry &geom, const MotionState &motion,
                                 const WaveContext &ctx, Wavefront wavefront = Wavefront::spherical)
    {
        detail::require(u < geom.rx.size() && s < geom.tx.size(), "element index out of range");
        const double lambda = ctx.wavelength();
        Position3 arr, dep;
        double phase_len;
        if (wavefront == Wavefront::spherical)
        {
            detail::require_shape(bounce.d_rx.size() == geom.rx.size() && bounce.d_tx.size() == geom.tx.size(),
                                  "bounce geometry does not match the arrays");
            arr = antenna::direction(bounce.rx_angles[u].first, bounce.rx_angles[u].second);
            dep = antenna::direction(bounce.tx_angles[s].first, bounce.tx_angles[s].second);
            phase_len = (bounce.d_rx[0] - bounce.d_rx[u]) + (bounce.d_tx[0] - bounce.d_tx[s]);
        }
        else
        {
            arr = ray.arrival();
            dep = ray.departure();
            phase_len = arr.dot(geom.rx[u].position - geom.rx_ref()) + dep.dot(geom.tx[s].position - geom.tx_ref());
        }
        const double ik = 1.0 / std::sqrt(ray.xpr);
        const auto &ph = ray.phases;
        const cplx pol[2][2] = {{std::exp(j * ph[0]), ik * std::exp(j * ph[1])},
                                {ik * std::exp(j * ph[2]), std::exp(j * ph[3])}};
        const cplx gain = detail_channel::contract(geom.rx[u].field(arr), pol, geom.tx[s].field(dep));
        return std::sqrt(ray.power / ray.rays_in_cluster) * gain * std::exp(j * (2.0 * pi * phase_len / lambda)) *
               detail_channel::doppler(arr, motion, t, lambda);
    }

    struct VisibilityModel
    {
        double A = 0.6;
        double lambda_exp = 0.1;
        double B = 0.4;
        double xi = 0.05;
        double C = 10.0;

        void validate() const
        {
            detail::require(A >= 0.0, "visibility A must be >= 0");
            detail::require(lambda_exp > 0.0, "visibility lambda must be > 0");
            detail::require(B >= 0.0 && B <= 1.0, "visibility B must lie in [0, 1]");
            detail::require(xi >= 0.0, "visibility xi must be >= 0");
            detail::require(C > 0.0, "visibility roll-off C must be > 0");
        }
    };

    // V_n = clamp(A exp(-(max - P_n)/lambda) + B + delta, 0, 1), delta ~ N(0, xi^2) drawn from `seed`
    inline double visibility_probability(double power, double max_power, const VisibilityModel &model,
                                         std::uint64_t seed)
    {
        model.validate();
        detail::require(power <= max_power * (1.0 + 1e-12), "cluster power exceeds the maximum power");
        double delta = 0.0;
        if (model.xi > 0.0)
        {
            Rng rng(seed);
            delta = sample_normal(rng, 0.0, model.xi);
        }
        return std::clamp(model.A * std::exp(-(max_power - power) / model.lambda_exp) + model.B + delta, 0.0, 1.0);
    }

    inline double attenuation_factor(double delta_d, double C)
    {
        detail::require_positive(C, "roll-off coefficient C");
        return 1.0 / (1.0 + std::exp(delta_d * C));
    }

    // Normalised distance of Tx element s to the cluster, minus V_n
    inline double distance_offset(const std::vector<double> &d_tx, std::size_t s, double visibility)
    {
        detail::require(s < d_tx.size(), "element index out of range");
        const auto [lo, hi] = std::minmax_element(d_tx.begin(), d_tx.end());
        if (!(*hi > *lo))
            return -visibility;
        return (d_tx[s] - *lo) / (*hi - *lo) - visibility;
    }

    struct Tap
    {
        double delay = 0.0;
        int cluster = -1; // -1 for the LOS tap
        int ray = -1;
        CMatrix h;        // N_rx x N_tx
        RVector alpha;    // attenuation per Tx element
    };

    struct ImpulseResponse
    {
        std::vector<Tap> taps; // LOS first, then rays in input order; equal delays are not merged
        double alpha_threshold = 0.0;

        Eigen::Index rx_count() const { return taps.empty() ? 0 : taps.front().h.rows(); }
        Eigen::Index tx_count() const { return taps.empty() ? 0 : taps.front().h.cols(); }

        // (delay, coefficient) taps of one element pair; NLOS taps with alpha <= threshold are dropped
        std::vector<std::pair<double, cplx>> at(Eigen::Index u, Eigen::Index s) const
        {
            std::vector<std::pair<double, cplx>> out;
            for (const auto &tap : taps)
                if (tap.cluster < 0 || tap.alpha(s) > alpha_threshold)
                    out.emplace_back(tap.delay, tap.h(u, s));
            return out;
        }

        // Every tap coefficient stacked into one vector, tap-major
        CVector flatten() const
        {
            CVector v(static_cast<Eigen::Index>(taps.size()) * rx_count() * tx_count());
            Eigen::Index k = 0;
            for (const auto &tap : taps)
                for (Eigen::Index i = 0; i < tap.h.size(); ++i)
                    v(k++) = tap.h.reshaped()(i);
            return v;
        }

        // Narrowband channel: sum over taps
        CMatrix narrowband() const
        {
            CMatrix h = CMatrix::Zero(rx_count(), tx_count());
            for (const auto &tap : taps)
                h += tap.h;
            return h;
        }

        double total_power() const
        {
            double p = 0.0;
            for (const auto &tap : taps)
                p += tap.h.squaredNorm();
            return p;
        }
    };

    struct CirOptions
    {
        double k_factor = 1.0; // linear; infinity keeps only the LOS tap's energy
        bool include_los = true;
        std::optional<VisibilityModel> visibility = VisibilityModel{};
        std::uint64_t seed = 0; // visibility draws use derive_seed(seed, n + 1); the LOS tap uses n = 0
        double alpha_threshold = 0.0;
    };

    namespace detail_channel
    {
        inline RVector attenuation(const std::vector<double> &d_tx, double vis, double C)
        {
            RVector a(static_cast<Eigen::Index>(d_tx.size()));
            for (std::size_t s = 0; s < d_tx.size(); ++s)
                a(static_cast<Eigen::Index>(s)) = attenuation_factor(distance_offset(d_tx, s, vis), C);
            return a;
        }
    }

    inline ImpulseResponse channel_impulse_response(const ArrayGeometry &geom, const std::vector<ClusterRay> &rays,
                                                    const CirOptions &opt, double t, const MotionState &motion,
                                                    const WaveContext &ctx,
                                                    Wavefront wavefront = Wavefront::spherical)
    {
        geom.validate();
        motion.validate();
        detail::require(opt.k_factor >= 0.0, "K-factor must be non-negative");
        if (opt.visibility)
            opt.visibility->validate();
        const auto nr = static_cast<Eigen::Index>(geom.rx.size());
        const auto ns = static_cast<Eigen::Index>(geom.tx.size());
        double w_los = 0.0, w_nlos = 1.0;
        if (opt.include_los)
        {
            if (std::isinf(opt.k_factor))
                w_los = 1.0, w_nlos = 0.0;
            else
                w_los = std::sqrt(opt.k_factor / (opt.k_factor + 1.0)), w_nlos = std::sqrt(1.0 / (opt.k_factor + 1.0));
        }

        double max_power = 0.0;
        for (const auto &r : rays)
            max_power = std::max(max_power, r.power);

        ImpulseResponse out;
        out.alpha_threshold = opt.alpha_threshold;
        if (opt.include_los)
        {
            Tap tap;
            tap.delay = (geom.rx_ref() - geom.tx_ref()).norm() / speed_of_light;
            tap.alpha = RVector::Ones(ns);
            if (opt.visibility)
            {
                std::vector<double> d;
                for (const auto &e : geom.tx)
                    d.push_back((e.position - geom.rx_ref()).norm());
                const double v = visibility_probability(1.0, 1.0, *opt.visibility, derive_seed(opt.seed, 0));
                tap.alpha = detail_channel::attenuation(d, v, opt.visibility->C);
            }
            tap.h.resize(nr, ns);
            for (Eigen::Index s = 0; s < ns; ++s)
                for (Eigen::Index u = 0; u < nr; ++u)
                    tap.h(u, s) = w_los * tap.alpha(s) *
                                  los_coefficient(static_cast<std::size_t>(u), static_cast<std::size_t>(s), t, geom,
                                                  motion, ctx, wavefront);
            out.taps.push_back(std::move(tap));
        }
        for (const auto &ray : rays)
        {
            const BounceGeometry bounce = locate_bounce_scatterers(ray, geom, ctx);
            Tap tap;
            tap.delay = ray.delay;
            tap.cluster = ray.cluster;
            tap.ray = ray.ray;
            tap.alpha = RVector::Ones(ns);
            if (opt.visibility)
            {
                const double rel = max_power > 0.0 ? ray.power / max_power : 1.0;
                const double v = visibility_probability(rel, 1.0, *opt.visibility,
                                                        derive_seed(opt.seed, static_cast<std::uint64_t>(ray.cluster) + 1));
                tap.alpha = detail_channel::attenuation(bounce.d_tx, v, opt.visibility->C);
            }
            tap.h.resize(nr, ns);
            for (Eigen::Index s = 0; s < ns; ++s)
                for (Eigen::Index u = 0; u < nr; ++u)
                    tap.h(u, s) = w_nlos * tap.alpha(s) *
                                  nlos_coefficient(static_cast<std::size_t>(u), static_cast<std::size_t>(s), ray, bounce,
                                                   t, geom, motion, ctx, wavefront);
            out.taps.push_back(std::move(tap));
        }
        return out;
    }

    // Far-field baseline: same construction with planar wavefronts
    inline ImpulseResponse planar_wave_channel(const ArrayGeometry &geom, const std::vector<ClusterRay> &rays,
                                               const CirOptions &opt, double t, const MotionState &motion,
                                               const WaveContext &ctx)
    {
        return channel_impulse_response(geom, rays, opt, t, motion, ctx, Wavefront::planar);
    }

    // Narrowband NLOS sum of planar_wave_channel at t = 0, without visibility or K-factor,
    // evaluated as one rank-2 outer product per ray
    inline CMatrix planar_narrowband(const ArrayGeometry &geom, const std::vector<ClusterRay> &rays,
                                     const WaveContext &ctx)
    {
        geom.validate();
        const auto nr = static_cast<Eigen::Index>(geom.rx.size());
        const auto ns = static_cast<Eigen::Index>(geom.tx.size());
        const double k = 2.0 * pi / ctx.wavelength();
        auto steer = [k](const std::vector<Element> &els, const Position3 &ref, const Position3 &dir) {
            Eigen::Matrix2Xcd a(2, static_cast<Eigen::Index>(els.size()));
            for (std::size_t i = 0; i < els.size(); ++i)
            {
                const FieldPair f = els[i].field(dir);
                const cplx ph = std::exp(j * (k * dir.dot(els[i].position - ref)));
                a(0, static_cast<Eigen::Index>(i)) = f.theta * ph;
                a(1, static_cast<Eigen::Index>(i)) = f.phi * ph;
            }
            return a;
        };
        CMatrix h = CMatrix::Zero(nr, ns);
        for (const auto &ray : rays)
        {
            ray.validate();
            const double ik = 1.0 / std::sqrt(ray.xpr);
            const auto &ph = ray.phases;
            Eigen::Matrix2cd pol;
            pol << std::exp(j * ph[0]), ik * std::exp(j * ph[1]), ik * std::exp(j * ph[2]), std::exp(j * ph[3]);
            const auto ar = steer(geom.rx, geom.rx_ref(), ray.arrival());
            const auto at = steer(geom.tx, geom.tx_ref(), ray.departure());
            h.noalias() += std::sqrt(ray.power / ray.rays_in_cluster) * (ar.transpose() * pol * at);
        }
        return h;
    }

    inline double spatial_correlation(const CVector &h_pwa, const CVector &h_swa)
    {
        detail::require_shape(h_pwa.size() == h_swa.size(), "correlation inputs differ in length");
        const double na = h_pwa.norm(), nb = h_swa.norm();
        detail::require(na > 0.0 && nb > 0.0, "correlation of a zero vector");
        return std::min(1.0, std::abs(h_pwa.dot(h_swa)) / (na * nb));
    }
}

#endif
