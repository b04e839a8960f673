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

#ifndef EIT_WAVENUMBER_VMF_HPP
#define EIT_WAVENUMBER_VMF_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace eit::wavenumber
{
    struct VmfCluster
    {
        double weight = 1.0;
        double mean_theta = 0.0; // rad, from the array normal
        double mean_phi = 0.0;   // rad
        double concentration = 0.0;
    };

    // von Mises-Fisher density on the unit sphere (1/sr)
    inline double vmf_pdf(double theta, double phi, const VmfCluster &c)
    {
        if (c.concentration < 0.0)
            throw domain_error("VMF concentration must be >= 0");
        const double a = c.concentration;
        if (a < 1e-12)
            return 1.0 / (4.0 * pi);
        const double cosang = std::sin(theta) * std::sin(c.mean_theta) * std::cos(phi - c.mean_phi) +
                              std::cos(theta) * std::cos(c.mean_theta);
        // a/(4 pi sinh a) e^{a cosang}, rewritten so large a does not overflow
        return a * std::exp(a * (cosang - 1.0)) / (2.0 * pi * -std::expm1(-2.0 * a));
    }

    // Weighted VMF mixture used as an angular power spectrum
    class VmfMixture
    {
    public:
        VmfMixture() = default;
        explicit VmfMixture(std::vector<VmfCluster> clusters) : clusters_(std::move(clusters)) { validate(); }

        static VmfMixture isotropic() { return VmfMixture({VmfCluster{1.0, 0.0, 0.0, 0.0}}); }

        // Clusters with arbitrary nonnegative weights, rescaled to sum to one
        static VmfMixture normalized(std::vector<VmfCluster> clusters)
        {
            double total = 0.0;
            for (const auto &c : clusters)
                total += c.weight;
            detail::require(total > 0.0, "VMF mixture weights sum to zero");
            for (auto &c : clusters)
                c.weight /= total;
            return VmfMixture(std::move(clusters));
        }

        double operator()(double theta, double phi) const
        {
            double acc = 0.0;
            for (const auto &c : clusters_)
                acc += c.weight * vmf_pdf(theta, phi, c);
            return acc;
        }

        // Same density for a unit direction vector
        double density(const Position3 &d) const
        {
            double acc = 0.0;
            for (std::size_t i = 0; i < clusters_.size(); ++i)
            {
                const double a = clusters_[i].concentration;
                if (a < 1e-12)
                    acc += clusters_[i].weight / (4.0 * pi);
                else
                    acc += clusters_[i].weight * a * std::exp(a * (d.dot(means_[i]) - 1.0)) /
                           (2.0 * pi * -std::expm1(-2.0 * a));
            }
            return acc;
        }

        const std::vector<VmfCluster> &clusters() const { return clusters_; }

    private:
        void validate()
        {
            detail::require(!clusters_.empty(), "VMF mixture needs at least one cluster");
            double total = 0.0;
            for (std::size_t i = 0; i < clusters_.size(); ++i)
            {
                const auto &c = clusters_[i];
                detail::require(c.weight >= 0.0, "VMF weight " + std::to_string(i) + " is negative");
                detail::require(c.concentration >= 0.0, "VMF concentration " + std::to_string(i) + " is negative");
                total += c.weight;
            }
            detail::require(std::abs(total - 1.0) <= 1e-12,
                            "VMF mixture weights must sum to 1, got " + std::to_string(total));
            for (const auto &c : clusters_)
                means_.emplace_back(std::sin(c.mean_theta) * std::cos(c.mean_phi),
                                    std::sin(c.mean_theta) * std::sin(c.mean_phi), std::cos(c.mean_theta));
        }

        std::vector<VmfCluster> clusters_;
        std::vector<Position3> means_;
    };
}

#endif
