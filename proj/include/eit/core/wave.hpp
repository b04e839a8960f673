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

#ifndef EIT_CORE_WAVE_HPP
#define EIT_CORE_WAVE_HPP

#include "eit/core/error.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

namespace eit
{
    using cplx = std::complex<double>;
    using Position3 = Eigen::Vector3d;
    using CVector3 = Eigen::Vector3cd;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RVector = Eigen::VectorXd;

    inline constexpr double speed_of_light = 299792458.0;                   // m/s
    inline constexpr double vacuum_permeability = 4.0e-7 * std::numbers::pi; // H/m
    inline constexpr double pi = std::numbers::pi;
    inline constexpr cplx j{0.0, 1.0};

    // Monochromatic wave constants shared by all physics modules.
    // Only the frequency and the permeability are free; everything else is derived.
    class WaveContext
    {
    public:
        explicit WaveContext(double frequency_hz, double permeability = vacuum_permeability)
            : frequency_(frequency_hz), permeability_(permeability)
        {
            detail::require_positive(frequency_hz, "frequency");
            detail::require_positive(permeability, "permeability");
        }

        static WaveContext from_wavelength(double wavelength_m, double permeability = vacuum_permeability)
        {
            detail::require_positive(wavelength_m, "wavelength");
            return WaveContext(speed_of_light / wavelength_m, permeability);
        }

        double frequency() const { return frequency_; }
        double wavelength() const { return speed_of_light / frequency_; }
        double wavenumber() const { return 2.0 * pi / wavelength(); }
        double angular_frequency() const { return 2.0 * pi * frequency_; }
        double permeability() const { return permeability_; }

    private:
        double frequency_;
        double permeability_;
    };

    inline bool is_finite(const Position3 &p)
    {
        return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z());
    }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
    inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
}

#endif
