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
#ifndef EIT_NEARFIELD_GEOMETRY_HPP
#define EIT_NEARFIELD_GEOMETRY_HPP

#include "eit/antenna/pattern.hpp"
#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace eit::nearfield
{
    using antenna::FieldPair;
    using antenna::PatternSet;

    struct Element
    {
        Position3 position = Position3::Zero();
        PatternSet pattern = PatternSet::isotropic_vertical();
        double slant = 0.0; // polarization slant angle, rad

        // Field components along the global theta/phi unit vectors of direction d
        FieldPair field(const Position3 &d) const
        {
            const FieldPair f = pattern.global(d);
            if (slant == 0.0)
                return f;
            const double c = std::cos(slant), s = std::sin(slant);
            return {c * f.theta - s * f.phi, s * f.theta + c * f.phi};
        }
    };

    // Element 0 on each side is the phase reference
    struct ArrayGeometry
    {
        std::vector<Element> tx, rx;

        void validate() const
        {
            detail::require(!tx.empty() && !rx.empty(), "array geometry needs at least one Tx and one Rx element");
            for (const auto &e : tx)
                detail::require(is_finite(e.position), "non-finite Tx element position");
            for (const auto &e : rx)
                detail::require(is_finite(e.position), "non-finite Rx element position");
        }

        const Position3 &tx_ref() const { return tx.front().position; }
        const Position3 &rx_ref() const { return rx.front().position; }
    };

    // n elements centred on `centre`, spaced along `axis`
    inline std::vector<Element> linear_array(const Position3 &centre, const Position3 &axis, int n, double spacing,
                                             const PatternSet &pattern, double slant = 0.0)
    {
        detail::require(n >= 1, "array needs at least one element");
        const Position3 a = axis.normalized();
        std::vector<Element> out;
        for (int i = 0; i < n; ++i)
            out.push_back({centre + (i - 0.5 * (n - 1)) * spacing * a, pattern, slant});
        return out;
    }

    // n1 x n2 grid centred on `centre`, raster order with axis1 fastest
    inline std::vector<Element> planar_array(const Position3 &centre, const Position3 &axis1, const Position3 &axis2,
                                             int n1, int n2, double d1, double d2, const PatternSet &pattern,
                                             double slant = 0.0)
    {
        detail::require(n1 >= 1 && n2 >= 1, "array needs at least one element per axis");
        const Position3 a1 = axis1.normalized(), a2 = axis2.normalized();
        std::vector<Element> out;
        for (int j = 0; j < n2; ++j)
            for (int i = 0; i < n1; ++i)
                out.push_back({centre + (i - 0.5 * (n1 - 1)) * d1 * a1 + (j - 0.5 * (n2 - 1)) * d2 * a2, pattern, slant});
        return out;
    }

    // Moves the element nearest the centroid to index 0, making it the phase reference
    inline void centre_reference(std::vector<Element> &elements)
    {
        detail::require(!elements.empty(), "array needs at least one element");
        Position3 c = Position3::Zero();
        for (const auto &e : elements)
            c += e.position;
        c /= static_cast<double>(elements.size());
        std::size_t best = 0;
        for (std::size_t i = 1; i < elements.size(); ++i)
            if ((elements[i].position - c).norm() < (elements[best].position - c).norm() - 1e-12)
                best = i;
        std::swap(elements[0], elements[best]);
    }

    struct MotionState
    {
        Position3 velocity = Position3::Zero(); // m/s, of the receiver

        void validate() const { detail::require(is_finite(velocity), "velocity must be finite"); }
    };

    // One ray of a cluster. Departure angles point from the Tx reference toward the first
    // bounce, arrival angles from the Rx reference toward the last bounce.
    struct ClusterRay
    {
        int cluster = 0;
        int ray = 0;
        int rays_in_cluster = 1;
        double power = 0.0; // cluster power P_n, linear
        double delay = 0.0; // absolute, s
        double zod = pi / 2, aod = 0.0, zoa = pi / 2, aoa = 0.0;
        double xpr = 1.0;                     // linear
        std::array<double, 4> phases{};        // theta-theta, theta-phi, phi-theta, phi-phi

        void validate() const
        {
            detail::require(power >= 0.0, "ray power must be non-negative");
            detail::require(xpr > 0.0, "ray XPR must be positive");
            detail::require(delay >= 0.0, "ray delay must be non-negative");
            detail::require(rays_in_cluster >= 1, "cluster must contain at least one ray");
            for (double a : {zod, aod, zoa, aoa})
                detail::require(std::isfinite(a), "ray angles must be finite");
        }

        Position3 departure() const { return antenna::direction(zod, aod); }
        Position3 arrival() const { return antenna::direction(zoa, aoa); }
    };

    struct BounceGeometry
    {
        Position3 first_bounce = Position3::Zero();
        Position3 last_bounce = Position3::Zero();
        std::vector<double> d_tx, d_rx;                         // per element, m
        std::vector<std::pair<double, double>> tx_angles, rx_angles; // (theta, phi) per element

        double path_length() const { return d_tx.front() + (last_bounce - first_bounce).norm() + d_rx.front(); }
    };

    namespace detail_geometry
    {
        inline void fill_elements(BounceGeometry &b, const ArrayGeometry &geom)
        {
            auto fill = [](const std::vector<Element> &els, const Position3 &target, std::vector<double> &dist,
                           std::vector<std::pair<double, double>> &ang) {
                for (const auto &e : els)
                {
                    const Position3 v = target - e.position;
                    const double d = v.norm();
                    if (!(d > 0.0))
                        throw infeasible_geometry_error("scatterer coincides with an array element");
                    dist.push_back(d);
                    ang.push_back(antenna::angles_of(v));
                }
            };
            fill(geom.tx, b.first_bounce, b.d_tx, b.tx_angles);
            fill(geom.rx, b.last_bounce, b.d_rx, b.rx_angles);
        }
    }

    // Places the first bounce on the departure ray and the last bounce on the arrival ray so that
    // |first - T0| + |last - first| + |R0 - last| = c tau. Both distances are scaled together from the
    // rays' closest-approach points (k t*, k r*), with k found by bisection.
    inline BounceGeometry locate_bounce_scatterers(const ClusterRay &ray, const ArrayGeometry &geom,
                                                   const WaveContext & /*ctx*/)
    {
        ray.validate();
        geom.validate();
        const Position3 &T0 = geom.tx_ref();
        const Position3 &R0 = geom.rx_ref();
        const Position3 b = ray.departure();
        const Position3 a = ray.arrival();
        const double L = speed_of_light * ray.delay;
        const double D0 = (R0 - T0).norm();
        if (!(L > D0 * (1.0 + 1e-12)))
            throw infeasible_geometry_error("ray (" + std::to_string(ray.cluster) + "," + std::to_string(ray.ray) +
                                            ") path length " + std::to_string(L) +
                                            " m does not exceed the direct distance " + std::to_string(D0) + " m");

        // Closest points of T0 + t b and R0 + r a
        const Position3 w = T0 - R0;
        const double bb = b.dot(a), db = b.dot(w), da = a.dot(w);
        const double den = 1.0 - bb * bb;
        double ts = 0.0, rs = 0.0;
        if (den > 1e-12)
        {
            ts = (bb * da - db) / den;
            rs = (da - bb * db) / den;
        }
        const double floor = 1e-9 * std::max(D0, L);
        if (!(ts > floor && rs > floor))
            ts = rs = D0 > 0 ? D0 : L; // diverging or parallel rays: equal split

        auto g = [&](double k) { return k * (ts + rs) + (R0 - T0 + k * (rs * a - ts * b)).norm(); };
        double lo = 0.0, hi = 1.0;
        while (g(hi) < L)
            hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            (g(mid) < L ? lo : hi) = mid;
        }
        const double k = 0.5 * (lo + hi);

        BounceGeometry out;
        out.first_bounce = T0 + k * ts * b;
        out.last_bounce = R0 + k * rs * a;
        detail_geometry::fill_elements(out, geom);
        return out;
    }
}

#endif
