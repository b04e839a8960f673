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

#ifndef EIT_WAVENUMBER_SUPPORT_HPP
#define EIT_WAVENUMBER_SUPPORT_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace eit::wavenumber
{
    enum class Side
    {
        receiver,
        transmitter
    };

    struct WavenumberIndex
    {
        int x = 0;
        int y = 0;
        friend bool operator==(const WavenumberIndex &, const WavenumberIndex &) = default;
    };

    // Integer wavenumber pairs of the propagating-wave ellipse of an Lx x Ly aperture
    struct WavenumberSupport
    {
        std::vector<WavenumberIndex> indices; // row-major in (y, x), ascending
        Side side = Side::receiver;
        double lx = 0.0; // aperture, m
        double ly = 0.0;

        std::size_t size() const { return indices.size(); }
    };

    // Points on the ellipse boundary are accepted with this relative slack so that
    // (l lambda / L)^2 == 1 survives rounding of lambda
    inline constexpr double support_tolerance = 1e-12;

    inline double ellipse_radius2(int lx, int ly, double Lx, double Ly, double lambda)
    {
        const double a = lx * lambda / Lx, b = ly * lambda / Ly;
        return a * a + b * b;
    }

    inline WavenumberSupport wavenumber_support(double Lx, double Ly, const WaveContext &ctx, Side side)
    {
        detail::require_positive(Lx, "aperture Lx");
        detail::require_positive(Ly, "aperture Ly");
        const double lambda = ctx.wavelength();
        const int mx = static_cast<int>(std::floor(Lx / lambda * (1.0 + support_tolerance)));
        const int my = static_cast<int>(std::floor(Ly / lambda * (1.0 + support_tolerance)));
        WavenumberSupport s;
        s.side = side;
        s.lx = Lx;
        s.ly = Ly;
        for (int y = -my; y <= my; ++y)
            for (int x = -mx; x <= mx; ++x)
                if (ellipse_radius2(x, y, Lx, Ly, lambda) <= 1.0 + support_tolerance)
                    s.indices.push_back({x, y});
        return s;
    }

    // gamma(l) = sqrt(k0^2 - kx^2 - ky^2), the axial wavenumber of a propagating plane wave
    inline double axial_wavenumber(int lx, int ly, double Lx, double Ly, const WaveContext &ctx)
    {
        const double r2 = ellipse_radius2(lx, ly, Lx, Ly, ctx.wavelength());
        if (r2 > 1.0 + support_tolerance)
            throw domain_error("wavenumber index (" + std::to_string(lx) + "," + std::to_string(ly) +
                               ") is evanescent (outside the support ellipse)");
        const double k0 = ctx.wavenumber();
        return k0 * std::sqrt(std::max(0.0, 1.0 - r2));
    }

    // Direction (zenith from the array normal, azimuth) of the plane wave with index (lx, ly)
    inline std::pair<double, double> wavenumber_to_angles(int lx, int ly, double Lx, double Ly, const WaveContext &ctx)
    {
        const double kz = axial_wavenumber(lx, ly, Lx, Ly, ctx);
        const double kx = 2 * pi * lx / Lx, ky = 2 * pi * ly / Ly;
        const double theta = std::acos(std::clamp(kz / ctx.wavenumber(), -1.0, 1.0));
        const double phi = (lx == 0 && ly == 0) ? 0.0 : std::atan2(ky, kx);
        return {theta, phi};
    }
}

#endif
