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

#ifndef EIT_NUMERIC_GAUSS_LEGENDRE_HPP
#define EIT_NUMERIC_GAUSS_LEGENDRE_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"

#include <cmath>
#include <vector>

namespace eit::numeric
{
    struct QuadratureRule
    {
        std::vector<double> nodes;
        std::vector<double> weights;
    };

    // n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n)
    inline QuadratureRule gauss_legendre(int n)
    {
        detail::require(n >= 1, "Gauss-Legendre order must be >= 1");
        if (n == 1)
            return {{0.0}, {2.0}};
        QuadratureRule rule;
        rule.nodes.resize(static_cast<std::size_t>(n));
        rule.weights.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < (n + 1) / 2; ++i)
        {
            double x = std::cos(pi * (i + 0.75) / (n + 0.5));
            double dp = 1.0;
            for (int iter = 0; iter < 100; ++iter)
            {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k)
                {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16)
                    break;
            }
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            rule.nodes[static_cast<std::size_t>(i)] = -x;
            rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
            rule.weights[static_cast<std::size_t>(i)] = w;
            rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
        }
        return rule;
    }

    // Composite rule: `panels` equal panels on [a, b], `order` points each
    inline QuadratureRule composite_gauss_legendre(double a, double b, int panels, int order)
    {
        detail::require(panels >= 1, "panel count must be >= 1");
        const QuadratureRule base = gauss_legendre(order);
        QuadratureRule out;
        const double h = (b - a) / panels;
        for (int p = 0; p < panels; ++p)
        {
            const double mid = a + (p + 0.5) * h;
            for (std::size_t k = 0; k < base.nodes.size(); ++k)
            {
                out.nodes.push_back(mid + 0.5 * h * base.nodes[k]);
                out.weights.push_back(0.5 * h * base.weights[k]);
            }
        }
        return out;
    }
}

#endif
