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


#ifndef EIT_WAVENUMBER_VARIANCES_HPP
#define EIT_WAVENUMBER_VARIANCES_HPP

#include "eit/core/error.hpp"
#include "eit/core/wave.hpp"
#include "eit/wavenumber/support.hpp"
#include "eit/wavenumber/vmf.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

namespace eit::wavenumber
{
    // Settings for the angular cell integrals: tanh-sinh across the cell, adaptive
    // Gauss-Kronrod along each chord
    struct CellQuadrature
    {
        double tolerance = 1e-10; // relative, per cell
        unsigned max_depth = 15;  // refinement levels of either rule
    };

    struct CouplingVariances
    {
        Eigen::MatrixXd sigma2; // |E_R| x |E_S|
        CMatrix mean;           // deterministic part, zero unless set

        Eigen::Index rows() const { return sigma2.rows(); }
        Eigen::Index cols() const { return sigma2.cols(); }
    };

    namespace detail_cells
    {
        // Direction-cosine rectangle [a0,a1] x [b0,b1] of one lattice point
        struct Rect
        {
            double a0, a1, b0, b1;
        };

        // Lattice rectangle that intersects the unit disk, with the support indices sharing it
        struct Cell
        {
            Rect rect;
            std::vector<std::size_t> owners;
        };

        // Rectangles of in-support indices belong to that index. Rectangles of evanescent
        // indices that still reach into the disk go to the nearest support index in index
        // space (shared equally on ties), so the cells tile the disk.
        inline std::vector<Cell> lattice_cells(const WavenumberSupport &support, double lambda)
        {
            const double sx = lambda / support.lx, sy = lambda / support.ly;
            const int mx = static_cast<int>(std::ceil(1.0 / sx + 0.5)), my = static_cast<int>(std::ceil(1.0 / sy + 0.5));
            std::vector<Cell> cells;
            for (int y = -my; y <= my; ++y)
                for (int x = -mx; x <= mx; ++x)
                {
                    const Rect r{(x - 0.5) * sx, (x + 0.5) * sx, (y - 0.5) * sy, (y + 0.5) * sy};
                    const double na = std::clamp(0.0, r.a0, r.a1), nb = std::clamp(0.0, r.b0, r.b1);
                    if (na * na + nb * nb >= 1.0)
                        continue;
                    Cell c{r, {}};
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < support.indices.size(); ++i)
                    {
                        const double du = x - support.indices[i].x, dv = y - support.indices[i].y;
                        const double d = du * du + dv * dv;
                        if (d < best - 1e-12)
                        {
                            best = d;
                            c.owners.assign(1, i);
                        }
                        else if (std::abs(d - best) <= 1e-12)
                            c.owners.push_back(i);
                    }
                    cells.push_back(std::move(c));
                }
            return cells;
        }

        struct Integral
        {
            double value = 0.0;
            double error = 0.0;
        };

        // Front-hemisphere integral of the spectrum over a direction-cosine rectangle. The sphere is
        // parametrised as d = (sin s, cos s sin t, cos s cos t), dOmega = cos s ds dt, so the a-edges
        // are lines of constant s and the disk rim carries no Jacobian singularity. The chord limits
        // still have square-root kinks where the b-edges meet the rim; those become panel ends.
        inline Integral rect_integral(const Rect &r, const VmfMixture &aps, const CellQuadrature &quad)
        {
            using boost::math::quadrature::gauss_kronrod;
            using boost::math::quadrature::tanh_sinh;
            const double a0 = std::max(r.a0, -1.0), a1 = std::min(r.a1, 1.0);
            if (a0 >= a1)
                return {};
            const double s0 = std::asin(a0), s1 = std::asin(a1);

            auto inner = [&](double s) {
                const double w = std::cos(s);
                if (w <= 0.0)
                    return 0.0;
                const double lo = std::clamp(r.b0 / w, -1.0, 1.0), hi = std::clamp(r.b1 / w, -1.0, 1.0);
                if (lo >= hi)
                    return 0.0;
                const double sa = std::sin(s), t0 = std::asin(lo), span = std::asin(hi) - t0;
                // mapped onto [0, 1]: the rule's error estimate is not scaled by the interval length,
                // so short chords near the rim would otherwise refine to full depth
                auto f = [&](double u) {
                    const double t = t0 + u * span;
                    return aps.density(Position3(sa, w * std::sin(t), w * std::cos(t)));
                };
                return w * span * gauss_kronrod<double, 15>::integrate(f, 0.0, 1.0, quad.max_depth, 0.1 * quad.tolerance);
            };

            // split where the b-edges meet the rim (cos s = |b|): the chord limits kink there
            std::vector<double> knots{s0, s1};
            for (double b : {r.b0, r.b1})
                if (std::abs(b) < 1.0)
                    for (double k : {std::acos(std::abs(b)), -std::acos(std::abs(b))})
                        if (k > s0 && k < s1)
                            knots.push_back(k);
            std::sort(knots.begin(), knots.end());

            Integral out;
            // building the abscissa tables dominates the cost of a single cell; keep one per thread
            thread_local std::map<unsigned, tanh_sinh<double>> rules;
            auto &outer = rules.try_emplace(quad.max_depth, quad.max_depth).first->second;
            for (std::size_t i = 0; i + 1 < knots.size(); ++i)
            {
                double err = 0.0;
                out.value += outer.integrate(inner, knots[i], knots[i + 1], quad.tolerance, &err);
                out.error += err;
            }
            return out;
        }

        // Unnormalised cell masses; `total` receives the front-hemisphere mass
        inline std::vector<double> raw_masses(const WavenumberSupport &support, const VmfMixture &aps,
                                              const WaveContext &ctx, const CellQuadrature &quad, double &total)
        {
            std::vector<double> mass(support.size(), 0.0);
            total = 0.0;
            double error = 0.0;
            for (const auto &cell : lattice_cells(support, ctx.wavelength()))
            {
                const Integral v = rect_integral(cell.rect, aps, quad);
                for (std::size_t o : cell.owners)
                    mass[o] += v.value / static_cast<double>(cell.owners.size());
                total += v.value;
                error += v.error;
            }
            if (!(error <= 100 * quad.tolerance * std::max(total, 1e-12)))
            {
                std::ostringstream msg;
                msg << "angular cell quadrature did not converge: front-hemisphere mass " << total
                    << ", estimated error " << error << " (tolerance " << quad.tolerance << ", max depth "
                    << quad.max_depth << ", " << aps.clusters().size() << " clusters)";
                throw numerical_error(msg.str());
            }
            return mass;
        }
    }

    // Share of the angular power spectrum falling into each wavenumber cell of `support`.
    // The spectrum is restricted to the front hemisphere (k_z >= 0) and renormalised there,
    // so the shares always sum to one.
    inline std::vector<double> cell_masses(const WavenumberSupport &support, const VmfMixture &aps,
                                           const WaveContext &ctx, const CellQuadrature &quad = {})
    {
        detail::require(!support.indices.empty(), "wavenumber support is empty");
        double total = 0.0;
        auto mass = detail_cells::raw_masses(support, aps, ctx, quad, total);
        if (!(total > 1e-12))
            throw numerical_error("angular power spectrum has no mass in the front hemisphere");
        for (auto &m : mass)
            m /= total;
        return mass;
    }

    // sigma^2_{beta,alpha} = (Rx cell mass beta) * (Tx cell mass alpha)
    inline CouplingVariances coupling_variances(const WavenumberSupport &support_r, const WavenumberSupport &support_s,
                                                const VmfMixture &aps_r, const VmfMixture &aps_s,
                                                const WaveContext &ctx, const CellQuadrature &quad = {})
    {
        const auto mr = cell_masses(support_r, aps_r, ctx, quad);
        const auto ms = cell_masses(support_s, aps_s, ctx, quad);
        CouplingVariances out;
        out.sigma2.resize(static_cast<Eigen::Index>(mr.size()), static_cast<Eigen::Index>(ms.size()));
        for (std::size_t b = 0; b < mr.size(); ++b)
            for (std::size_t a = 0; a < ms.size(); ++a)
                out.sigma2(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = mr[b] * ms[a];
        out.mean = CMatrix::Zero(out.sigma2.rows(), out.sigma2.cols());
        return out;
    }
}

#endif
