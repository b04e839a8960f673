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

#ifndef EIT_EM_GREEN_HPP
#define EIT_EM_GREEN_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>

namespace eit::em
{
    template <typename T>
    using Dyadic = Eigen::Matrix<std::complex<T>, 3, 3>;

    using DyadicValue = Dyadic<double>;

    // Near-field / far-field parts of the free-space dyadic Green's function.
    // Each term keeps its own power of R: inf ~ 1/R^3, rnf ~ 1/R^2, ff ~ 1/R.
    template <typename T>
    struct GreenTerms
    {
        Dyadic<T> reactive;  // G_INF
        Dyadic<T> radiating; // G_RNF
        Dyadic<T> far;       // G_FF

        Dyadic<T> sum() const { return reactive + radiating + far; }
    };

    enum class FieldRegion
    {
        reactive_near,
        radiating_near,
        far
    };

    inline const char *to_string(FieldRegion region)
    {
        switch (region)
        {
        case FieldRegion::reactive_near:
            return "reactive-near";
        case FieldRegion::radiating_near:
            return "radiating-near";
        default:
            return "far";
        }
    }

    // Scalar Green's function exp(-j k0 |p|) / (4 pi |p|)
    template <typename T = double>
    std::complex<T> scalar_green(const Eigen::Matrix<T, 3, 1> &p, const WaveContext &ctx)
    {
        const T r = p.norm();
        if (!(r > T(0)))
            throw singularity_error("scalar Green's function evaluated at |p| = 0");
        const T k0 = static_cast<T>(ctx.wavenumber());
        return std::polar(T(1) / (T(4) * static_cast<T>(pi) * r), -k0 * r);
    }

    template <typename T = double>
    GreenTerms<T> green_decomposition(const Eigen::Matrix<T, 3, 1> &r, const Eigen::Matrix<T, 3, 1> &s,
                                      const WaveContext &ctx)
    {
        const Eigen::Matrix<T, 3, 1> R = r - s;
        const T dist = R.norm();
        if (!(dist > T(0)))
            throw singularity_error("dyadic Green's function evaluated at r = s (self term is not modelled)");

        const T k0 = static_cast<T>(ctx.wavenumber());
        const Eigen::Matrix<T, 3, 1> u = R / dist;
        const Eigen::Matrix<T, 3, 3> uu = u * u.transpose();
        const Eigen::Matrix<T, 3, 3> I = Eigen::Matrix<T, 3, 3>::Identity();
        const std::complex<T> g = std::polar(T(1) / (T(4) * static_cast<T>(pi) * dist), -k0 * dist);
        const T kr = k0 * dist;
        const std::complex<T> jc(T(0), T(1));

        GreenTerms<T> out;
        out.reactive = (g / (kr * kr)) * (T(3) * uu - I).template cast<std::complex<T>>();
        // -j pairs with exp(-j k0 R); see the Hessian of scalar_green
        out.radiating = (-jc * g / kr) * (I - T(3) * uu).template cast<std::complex<T>>();
        out.far = g * (I - uu).template cast<std::complex<T>>();
        return out;
    }

    // [I + grad grad^T / k0^2] G0(|r - s|) in closed form, R != 0
    template <typename T = double>
    Dyadic<T> dyadic_green(const Eigen::Matrix<T, 3, 1> &r, const Eigen::Matrix<T, 3, 1> &s, const WaveContext &ctx)
    {
        const Eigen::Matrix<T, 3, 1> R = r - s;
        const T dist = R.norm();
        if (!(dist > T(0)))
            throw singularity_error("dyadic Green's function evaluated at r = s (self term is not modelled)");

        const T k0 = static_cast<T>(ctx.wavenumber());
        const T kr = k0 * dist;
        const std::complex<T> jc(T(0), T(1));
        const std::complex<T> g = std::polar(T(1) / (T(4) * static_cast<T>(pi) * dist), -k0 * dist);
        const std::complex<T> a = T(1) - jc / kr - T(1) / (kr * kr);
        const std::complex<T> b = T(-1) + T(3) * jc / kr + T(3) / (kr * kr);

        const Eigen::Matrix<T, 3, 1> u = R / dist;
        Dyadic<T> out;
        for (int i = 0; i < 3; ++i)
            for (int k = 0; k < 3; ++k)
                out(i, k) = g * ((i == k ? a : std::complex<T>(0)) + b * (u(i) * u(k)));
        return out;
    }

    // Far-field (Rayleigh) distance 2 D^2 / lambda
    inline double rayleigh_distance(double aperture_d, const WaveContext &ctx)
    {
        detail::require_positive(aperture_d, "aperture extent D");
        return 2.0 * aperture_d * aperture_d / ctx.wavelength();
    }

    // Outer boundary of the reactive near field, 0.62 sqrt(D^3 / lambda)
    inline double reactive_boundary(double aperture_d, const WaveContext &ctx)
    {
        detail::require_positive(aperture_d, "aperture extent D");
        return 0.62 * std::sqrt(aperture_d * aperture_d * aperture_d / ctx.wavelength());
    }

    inline FieldRegion field_region(double distance, double aperture_d, const WaveContext &ctx)
    {
        detail::require_positive(distance, "distance");
        detail::require_positive(aperture_d, "aperture extent D");
        if (distance < reactive_boundary(aperture_d, ctx))
            return FieldRegion::reactive_near;
        if (distance < rayleigh_distance(aperture_d, ctx))
            return FieldRegion::radiating_near;
        return FieldRegion::far;
    }
}

#endif
