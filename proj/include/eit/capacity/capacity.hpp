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

#ifndef EIT_CAPACITY_CAPACITY_HPP
#define EIT_CAPACITY_CAPACITY_HPP

#include "eit/core/error.hpp"
#include "eit/core/parallel.hpp"
#include "eit/core/random.hpp"
#include "eit/core/wave.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

namespace eit::capacity
{
    struct CapacityResult
    {
        double capacity = 0.0;  // bit/s/Hz
        RVector allocation;     // power per eigenmode (descending eigenvalue order), W
        RVector eigenvalues;    // of G^H G, descending, K entries
        double water_level = 0.0; // only set by water-filling
    };

    enum class Allocation
    {
        equal_power,
        water_filling
    };

    inline const char *to_string(Allocation a) { return a == Allocation::equal_power ? "equal-power" : "water-filling"; }

    // Eigenvalues of G^H G (K = cols), descending. Computed from the smaller Gram matrix;
    // the remaining K - rank values are exact zeros. Tiny negative round-off is clipped.
    inline RVector gram_eigenvalues(const CMatrix &g)
    {
        detail::require(g.allFinite(), "channel matrix has non-finite entries");
        const Eigen::Index k = g.cols();
        RVector out = RVector::Zero(k);
        if (g.size() == 0)
            return out;
        const CMatrix gram = g.rows() < g.cols() ? CMatrix(g * g.adjoint()) : CMatrix(g.adjoint() * g);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
        RVector ev = es.eigenvalues().cwiseMax(0.0);
        std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
        out.head(ev.size()) = ev;
        return out;
    }

    // log2 det(I + P / (K sigma^2) G G^H), K = number of transmit streams
    inline CapacityResult capacity_equal_power(const CMatrix &g, double power, double noise)
    {
        detail::require_positive(noise, "noise power");
        detail::require(power >= 0.0, "transmit power must be >= 0");
        detail::require_shape(g.cols() >= 1, "channel has no transmit dimension");
        CapacityResult r;
        r.eigenvalues = gram_eigenvalues(g);
        const double per = power / static_cast<double>(g.cols());
        r.allocation = RVector::Constant(g.cols(), per);
        for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
            r.capacity += std::log2(1.0 + per * r.eigenvalues(i) / noise);
        return r;
    }

    // Optimal diagonal input covariance in the eigenbasis of G^H G, water level by the
    // exact active-set recursion over sorted eigenvalues
    inline CapacityResult capacity_waterfilling(const CMatrix &g, double power, double noise)
    {
        detail::require_positive(noise, "noise power");
        detail::require_positive(power, "transmit power");
        CapacityResult r;
        r.eigenvalues = gram_eigenvalues(g);
        r.allocation = RVector::Zero(r.eigenvalues.size());
        const double top = r.eigenvalues.size() ? r.eigenvalues(0) : 0.0;
        Eigen::Index usable = 0;
        while (usable < r.eigenvalues.size() && r.eigenvalues(usable) > top * 1e-14 && r.eigenvalues(usable) > 0.0)
            ++usable;
        if (usable == 0)
            return r; // rank-0 channel

        // Largest active set whose weakest mode still gets positive power
        double nu = 0.0;
        Eigen::Index active = usable;
        for (; active >= 1; --active)
        {
            double inv = 0.0;
            for (Eigen::Index i = 0; i < active; ++i)
                inv += noise / r.eigenvalues(i);
            nu = (power + inv) / static_cast<double>(active);
            if (nu - noise / r.eigenvalues(active - 1) > 0.0)
                break;
        }
        r.water_level = nu;
        for (Eigen::Index i = 0; i < active; ++i)
        {
            r.allocation(i) = nu - noise / r.eigenvalues(i);
            r.capacity += std::log2(1.0 + r.allocation(i) * r.eigenvalues(i) / noise);
        }
        return r;
    }

    inline CapacityResult capacity(const CMatrix &g, double power, double noise, Allocation a)
    {
        return a == Allocation::equal_power ? capacity_equal_power(g, power, noise)
                                            : capacity_waterfilling(g, power, noise);
    }

    struct CdfPoint
    {
        double value;
        double probability;
    };

    struct EnsembleStats
    {
        std::vector<double> capacities; // by realization index
        double mean = 0.0;
        std::vector<CdfPoint> cdf; // sorted values with P(C <= value)

        double percentile(double p) const
        {
            detail::require(!cdf.empty(), "empty ensemble");
            detail::require(p >= 0.0 && p <= 1.0, "percentile must lie in [0, 1]");
            // smallest value whose empirical CDF reaches p
            for (const auto &pt : cdf)
                if (pt.probability >= p - 1e-15)
                    return pt.value;
            return cdf.back().value;
        }
    };

    inline EnsembleStats summarize(std::vector<double> capacities)
    {
        EnsembleStats s;
        s.capacities = std::move(capacities);
        if (s.capacities.empty())
            return s;
        s.mean = std::accumulate(s.capacities.begin(), s.capacities.end(), 0.0) /
                 static_cast<double>(s.capacities.size());
        std::vector<double> sorted = s.capacities;
        std::sort(sorted.begin(), sorted.end());
        const double n = static_cast<double>(sorted.size());
        for (std::size_t i = 0; i < sorted.size(); ++i)
            s.cdf.push_back({sorted[i], static_cast<double>(i + 1) / n});
        return s;
    }

    using ChannelGenerator = std::function<CMatrix(std::uint64_t seed)>;

    // Monte Carlo capacity ensemble; realization i uses derive_seed(master, study, i)
    inline EnsembleStats ergodic_capacity(const ChannelGenerator &generator, std::size_t realizations, double power,
                                          double noise, Allocation allocation, std::uint64_t master_seed,
                                          std::string_view study = "ergodic", unsigned threads = 1)
    {
        detail::require(realizations >= 1, "need at least one realization");
        std::vector<double> caps(realizations, 0.0);
        parallel_for(
            realizations,
            [&](std::size_t i) {
                try
                {
                    caps[i] = capacity(generator(derive_seed(master_seed, study, i)), power, noise, allocation).capacity;
                }
                catch (const std::exception &e)
                {
                    throw error("realization " + std::to_string(i) + ": " + e.what());
                }
            },
            threads);
        return summarize(std::move(caps));
    }
}

#endif
