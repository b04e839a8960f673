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

#ifndef EIT_ANTENNA_PATTERN_HPP
#define EIT_ANTENNA_PATTERN_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace eit::antenna
{
    // Field components along the spherical unit vectors theta-hat and phi-hat
    struct FieldPair
    {
        cplx theta{0.0, 0.0};
        cplx phi{0.0, 0.0};
    };

    inline Position3 theta_hat(double theta, double phi)
    {
        return {std::cos(theta) * std::cos(phi), std::cos(theta) * std::sin(phi), -std::sin(theta)};
    }

    inline Position3 phi_hat(double /*theta*/, double phi) { return {-std::sin(phi), std::cos(phi), 0.0}; }

    inline Position3 direction(double theta, double phi)
    {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    }

    // Zenith in [0, pi], azimuth in (-pi, pi]; azimuth is 0 on the z axis
    inline std::pair<double, double> angles_of(const Position3 &d)
    {
        const double n = d.norm();
        detail::require(n > 0.0, "direction vector has zero length");
        const double theta = std::acos(std::clamp(d.z() / n, -1.0, 1.0));
        const double phi = (d.x() == 0.0 && d.y() == 0.0) ? 0.0 : std::atan2(d.y(), d.x());
        return {theta, phi};
    }

    // Complex directivity table on a rectangular (theta, phi) grid with bilinear interpolation.
    // Azimuth wraps around; the zenith grid must cover [0, pi/2].
    class PatternTable
    {
    public:
        PatternTable(std::vector<double> theta_grid, std::vector<double> phi_grid, std::vector<FieldPair> values)
            : theta_(std::move(theta_grid)), phi_(std::move(phi_grid)), values_(std::move(values))
        {
            detail::require_shape(theta_.size() >= 2 && phi_.size() >= 2, "pattern grid needs >= 2 points per axis");
            detail::require_shape(values_.size() == theta_.size() * phi_.size(),
                                  "pattern value count does not match the grid");
            detail::require(std::is_sorted(theta_.begin(), theta_.end()) &&
                                std::adjacent_find(theta_.begin(), theta_.end()) == theta_.end(),
                            "pattern zenith grid must be strictly increasing");
            detail::require(std::is_sorted(phi_.begin(), phi_.end()) &&
                                std::adjacent_find(phi_.begin(), phi_.end()) == phi_.end(),
                            "pattern azimuth grid must be strictly increasing");
            detail::require(theta_.front() <= 1e-9 && theta_.back() >= pi / 2 - 1e-9,
                            "pattern zenith grid must cover the upper hemisphere [0, 90] deg");
            detail::require(phi_.back() - phi_.front() < 2 * pi + 1e-9, "pattern azimuth grid spans more than 360 deg");
            for (const auto &v : values_)
                detail::require(std::isfinite(v.theta.real()) && std::isfinite(v.theta.imag()) &&
                                    std::isfinite(v.phi.real()) && std::isfinite(v.phi.imag()),
                                "pattern table contains non-finite values");
        }

        FieldPair operator()(double theta, double phi) const
        {
            theta = std::clamp(theta, theta_.front(), theta_.back());
            const auto it = std::upper_bound(theta_.begin(), theta_.end(), theta);
            std::size_t i1 = std::min<std::size_t>(static_cast<std::size_t>(it - theta_.begin()), theta_.size() - 1);
            std::size_t i0 = i1 - 1;
            const double tt = (theta - theta_[i0]) / (theta_[i1] - theta_[i0]);

            // Azimuth: wrap into [phi0, phi0 + 2pi), the last cell closes the circle
            const double p0 = phi_.front();
            double p = std::fmod(phi - p0, 2 * pi);
            if (p < 0)
                p += 2 * pi;
            p += p0;
            std::size_t k0, k1;
            double tp;
            if (p >= phi_.back())
            {
                k0 = phi_.size() - 1;
                k1 = 0;
                const double span = p0 + 2 * pi - phi_.back();
                tp = span > 0 ? (p - phi_.back()) / span : 0.0;
            }
            else
            {
                const auto pit = std::upper_bound(phi_.begin(), phi_.end(), p);
                k1 = static_cast<std::size_t>(pit - phi_.begin());
                k0 = k1 - 1;
                tp = (p - phi_[k0]) / (phi_[k1] - phi_[k0]);
            }
            auto at = [&](std::size_t i, std::size_t k) -> const FieldPair & { return values_[i * phi_.size() + k]; };
            FieldPair out;
            out.theta = (1 - tt) * ((1 - tp) * at(i0, k0).theta + tp * at(i0, k1).theta) +
                        tt * ((1 - tp) * at(i1, k0).theta + tp * at(i1, k1).theta);
            out.phi = (1 - tt) * ((1 - tp) * at(i0, k0).phi + tp * at(i0, k1).phi) +
                      tt * ((1 - tp) * at(i1, k0).phi + tp * at(i1, k1).phi);
            return out;
        }

        const std::vector<double> &theta_grid() const { return theta_; }
        const std::vector<double> &phi_grid() const { return phi_; }

    private:
        std::vector<double> theta_, phi_;
        std::vector<FieldPair> values_; // row-major: [theta][phi]
    };

    // Reads a pattern table:
    //   # comment
    //   theta_deg phi_deg re(F_theta) im(F_theta) re(F_phi) im(F_phi)
    // Rows may come in any order but must form a complete rectangular grid.
    inline PatternTable load_pattern_table(std::istream &in, const std::string &source = "<stream>")
    {
        std::map<std::pair<double, double>, FieldPair> rows;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line))
        {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            std::istringstream ss(line);
            double t, p, a, b, c, d;
            if (!(ss >> t))
                continue;
            if (!(ss >> p >> a >> b >> c >> d))
                throw io_error(source + ":" + std::to_string(lineno) + ": expected 6 numeric columns");
            std::string extra;
            if (ss >> extra)
                throw io_error(source + ":" + std::to_string(lineno) + ": unexpected trailing field '" + extra + "'");
            if (!rows.emplace(std::pair{t, p}, FieldPair{{a, b}, {c, d}}).second)
                throw io_error(source + ":" + std::to_string(lineno) + ": duplicate grid point");
        }
        std::vector<double> th, ph;
        for (const auto &[key, v] : rows)
        {
            th.push_back(key.first);
            ph.push_back(key.second);
        }
        std::sort(th.begin(), th.end());
        th.erase(std::unique(th.begin(), th.end()), th.end());
        std::sort(ph.begin(), ph.end());
        ph.erase(std::unique(ph.begin(), ph.end()), ph.end());
        if (rows.size() != th.size() * ph.size())
            throw io_error(source + ": pattern rows do not form a complete theta x phi grid");
        std::vector<FieldPair> values;
        values.reserve(rows.size());
        for (double t : th)
            for (double p : ph)
                values.push_back(rows.at({t, p}));
        for (auto &t : th)
            t *= pi / 180.0;
        for (auto &p : ph)
            p *= pi / 180.0;
        try
        {
            return PatternTable(std::move(th), std::move(ph), std::move(values));
        }
        catch (const error &e)
        {
            throw io_error(source + ": " + e.what());
        }
    }

    inline PatternTable load_pattern_table(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw io_error("cannot open pattern table '" + path + "'");
        return load_pattern_table(in, path);
    }

    // Element directivity pattern. The pattern is defined in the element's local frame;
    // `orientation` maps local coordinates to the global frame.
    class PatternSet
    {
    public:
        using Function = std::function<FieldPair(double theta, double phi)>;

        PatternSet() : PatternSet(isotropic_dual()) {}
        PatternSet(Function f, std::string name, Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity())
            : f_(std::move(f)), name_(std::move(name)), orientation_(orientation)
        {
        }
        explicit PatternSet(std::shared_ptr<const PatternTable> table, std::string name = "table")
            : name_(std::move(name))
        {
            f_ = [table](double t, double p) { return (*table)(t, p); };
        }

        // Local-frame evaluation
        FieldPair operator()(double theta, double phi) const { return f_(theta, phi); }

        // Components along the global theta-hat / phi-hat of global direction `d`
        FieldPair global(const Position3 &d) const
        {
            const auto [tg, pg] = angles_of(d);
            if (orientation_.isIdentity(0.0))
                return f_(tg, pg);
            const auto [tl, pl] = angles_of(orientation_.transpose() * d);
            const FieldPair fl = f_(tl, pl);
            const Eigen::Vector3cd field = (orientation_ * theta_hat(tl, pl)).cast<cplx>() * fl.theta +
                                           (orientation_ * phi_hat(tl, pl)).cast<cplx>() * fl.phi;
            return {theta_hat(tg, pg).cast<cplx>().dot(field), phi_hat(tg, pg).cast<cplx>().dot(field)};
        }

        PatternSet rotated(const Eigen::Matrix3d &orientation) const { return PatternSet(f_, name_, orientation); }

        const std::string &name() const { return name_; }
        const Eigen::Matrix3d &orientation() const { return orientation_; }

        // F_theta = F_phi = 1: the "no pattern distortion" reference
        static PatternSet isotropic_dual()
        {
            return PatternSet([](double, double) { return FieldPair{1.0, 1.0}; }, "isotropic");
        }

        // Single-polarised isotropic radiator: F_theta = 1, F_phi = 0
        static PatternSet isotropic_vertical()
        {
            return PatternSet([](double, double) { return FieldPair{1.0, 0.0}; }, "isotropic-v");
        }

        // Short dipole along local unit axis `axis`: F = (axis . theta-hat, axis . phi-hat)
        static PatternSet short_dipole(const Position3 &axis)
        {
            const Position3 a = axis.normalized();
            return PatternSet(
                [a](double t, double p) { return FieldPair{a.dot(theta_hat(t, p)), a.dot(phi_hat(t, p))}; },
                "dipole");
        }

        // Cosine-power patch envelope with the given half-power beamwidth, boresight on local +z.
        // Back hemisphere is held at `back_level_db`.
        static double patch_envelope(double theta, double hpbw_deg = 70.0, double back_level_db = -30.0)
        {
            const double half = 0.5 * hpbw_deg * pi / 180.0;
            const double n = std::log(0.5) / std::log(std::cos(half)); // power exponent
            const double floor = std::pow(10.0, back_level_db / 20.0);
            const double c = std::cos(theta);
            return c > 0.0 ? std::max(std::pow(c, n / 2.0), floor) : floor;
        }

        // Patch element, linearly polarised along local `axis` (x: horizontal, y: vertical)
        static PatternSet patch(const Position3 &axis = Position3::UnitY(), double hpbw_deg = 70.0)
        {
            const Position3 a = axis.normalized();
            return PatternSet(
                [a, hpbw_deg](double t, double p) {
                    const double g = patch_envelope(t, hpbw_deg);
                    return FieldPair{g * a.dot(theta_hat(t, p)), g * a.dot(phi_hat(t, p))};
                },
                "patch");
        }

    private:
        Function f_;
        std::string name_;
        Eigen::Matrix3d orientation_ = Eigen::Matrix3d::Identity();
    };
}

#endif
