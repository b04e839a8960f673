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

#ifndef EIT_WAVENUMBER_CHANNEL_HPP
#define EIT_WAVENUMBER_CHANNEL_HPP

#include "eit/antenna/pattern.hpp"
#include "eit/core/error.hpp"
#include "eit/core/random.hpp"
#include "eit/core/wave.hpp"
#include "eit/wavenumber/support.hpp"
#include "eit/wavenumber/variances.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace eit::wavenumber
{
    // Uniform planar array in the local xy plane; elements sit at the centres of
    // Delta_x x Delta_y cells, so positions stay inside [0, Lx] x [0, Ly].
    struct PlanarArray
    {
        double lx = 0.0, ly = 0.0;           // aperture, m
        double dx = 0.0, dy = 0.0;           // spacing, m
        std::vector<Position3> positions;    // local coordinates, m

        std::size_t size() const { return positions.size(); }

        static PlanarArray uniform(double Lx, double Ly, double spacing_x, double spacing_y)
        {
            detail::require_positive(Lx, "array Lx");
            detail::require_positive(Ly, "array Ly");
            detail::require_positive(spacing_x, "array spacing x");
            detail::require_positive(spacing_y, "array spacing y");
            const auto nx = static_cast<std::size_t>(std::max(1.0, std::floor(Lx / spacing_x + 1e-9)));
            const auto ny = static_cast<std::size_t>(std::max(1.0, std::floor(Ly / spacing_y + 1e-9)));
            PlanarArray a{Lx, Ly, spacing_x, spacing_y, {}};
            const double ox = 0.5 * (Lx - (nx - 1) * spacing_x), oy = 0.5 * (Ly - (ny - 1) * spacing_y);
            for (std::size_t iy = 0; iy < ny; ++iy)
                for (std::size_t ix = 0; ix < nx; ++ix)
                    a.positions.push_back({ox + ix * spacing_x, oy + iy * spacing_y, 0.0});
            return a;
        }
    };

    // Four polarised wavenumber-domain blocks
    struct PolarizedWavenumberChannel
    {
        CMatrix tt, tp, pt, pp; // theta-theta, theta-phi, phi-theta, phi-phi
        double xpr_mean_db = 0.0;
        double xpr_std_db = 0.0;

        // [[tt, tp], [pt, pp]]
        CMatrix block() const
        {
            CMatrix out(2 * tt.rows(), 2 * tt.cols());
            out << tt, tp, pt, pp;
            return out;
        }
    };

    struct Harmonics
    {
        CMatrix theta; // N x |E|
        CMatrix phi;
    };

    // Diagonal element efficiencies, each in (0, 1]
    class EfficiencyMatrix
    {
    public:
        explicit EfficiencyMatrix(RVector eta) : eta_(std::move(eta))
        {
            for (Eigen::Index i = 0; i < eta_.size(); ++i)
                detail::require(eta_(i) > 0.0 && eta_(i) <= 1.0, "element efficiency must lie in (0, 1]");
        }
        static EfficiencyMatrix uniform(std::size_t n, double eta)
        {
            return EfficiencyMatrix(RVector::Constant(static_cast<Eigen::Index>(n), eta));
        }
        static EfficiencyMatrix identity(std::size_t n) { return uniform(n, 1.0); }

        const RVector &diagonal() const { return eta_; }
        Eigen::Index size() const { return eta_.size(); }

    private:
        RVector eta_;
    };

    // Mutual-coupling efficiency bound pi dx dy / lambda^2, capped at 1
    inline double hannan_efficiency(double dx, double dy, const WaveContext &ctx)
    {
        detail::require_positive(dx, "element spacing x");
        detail::require_positive(dy, "element spacing y");
        const double lambda = ctx.wavelength();
        return std::min(1.0, pi * dx * dy / (lambda * lambda));
    }

    // Independent CN(mean, sigma^2) draw per wavenumber pair
    inline CMatrix sample_wavenumber_channel(const CouplingVariances &v, std::uint64_t seed)
    {
        Rng rng(seed);
        CMatrix h(v.rows(), v.cols());
        const bool has_mean = v.mean.size() == v.sigma2.size();
        // column-major fill keeps the draw order fixed for a given shape
        for (Eigen::Index c = 0; c < v.cols(); ++c)
            for (Eigen::Index r = 0; r < v.rows(); ++r)
            {
                detail::require(v.sigma2(r, c) >= 0.0 && std::isfinite(v.sigma2(r, c)), "invalid coupling variance");
                const cplx z = sample_cn(rng, v.sigma2(r, c));
                h(r, c) = (has_mean ? v.mean(r, c) : cplx{0.0, 0.0}) + z;
            }
        return h;
    }

    // Random per-entry phases on all four blocks; cross-polar blocks scaled by kappa^{-1/2}
    // with kappa = 10^{X/10}, X ~ N(mean_db, std_db^2)
    inline PolarizedWavenumberChannel apply_polarization(const CMatrix &h, double xpr_mean_db, double xpr_std_db,
                                                         std::uint64_t seed)
    {
        detail::require(h.allFinite(), "wavenumber channel has non-finite entries");
        detail::require(xpr_std_db >= 0.0, "XPR standard deviation must be >= 0");
        Rng rng(seed);
        PolarizedWavenumberChannel out;
        out.xpr_mean_db = xpr_mean_db;
        out.xpr_std_db = xpr_std_db;
        out.tt.resize(h.rows(), h.cols());
        out.tp.resize(h.rows(), h.cols());
        out.pt.resize(h.rows(), h.cols());
        out.pp.resize(h.rows(), h.cols());
        for (Eigen::Index c = 0; c < h.cols(); ++c)
            for (Eigen::Index r = 0; r < h.rows(); ++r)
            {
                const double ptt = sample_uniform(rng, -pi, pi);
                const double ptp = sample_uniform(rng, -pi, pi);
                const double ppt = sample_uniform(rng, -pi, pi);
                const double ppp = sample_uniform(rng, -pi, pi);
                const double x_db = xpr_std_db > 0.0 ? sample_normal(rng, xpr_mean_db, xpr_std_db) : xpr_mean_db;
                const double inv_sqrt_kappa = std::pow(10.0, -x_db / 20.0);
                out.tt(r, c) = h(r, c) * std::polar(1.0, ptt);
                out.pp(r, c) = h(r, c) * std::polar(1.0, ppp);
                out.tp(r, c) = h(r, c) * std::polar(inv_sqrt_kappa, ptp);
                out.pt(r, c) = h(r, c) * std::polar(inv_sqrt_kappa, ppt);
            }
        return out;
    }

    // Fourier harmonics with embedded element patterns. `patterns` holds one pattern
    // shared by every element or one per element.
    inline Harmonics fourier_harmonics(const PlanarArray &array, const WavenumberSupport &support,
                                       std::span<const antenna::PatternSet> patterns, const WaveContext &ctx)
    {
        detail::require_shape(!array.positions.empty(), "array has no elements");
        detail::require_shape(patterns.size() == 1 || patterns.size() == array.size(),
                              "need one pattern or one per element");
        const auto n = static_cast<Eigen::Index>(array.size());
        const auto e = static_cast<Eigen::Index>(support.size());
        Harmonics out{CMatrix(n, e), CMatrix(n, e)};
        const double norm = 1.0 / std::sqrt(static_cast<double>(n));
        for (Eigen::Index b = 0; b < e; ++b)
        {
            const auto idx = support.indices[static_cast<std::size_t>(b)];
            const double gamma = axial_wavenumber(idx.x, idx.y, array.lx, array.ly, ctx);
            const auto [theta, phi] = wavenumber_to_angles(idx.x, idx.y, array.lx, array.ly, ctx);
            const double kx = 2 * pi * idx.x / array.lx, ky = 2 * pi * idx.y / array.ly;
            for (Eigen::Index q = 0; q < n; ++q)
            {
                const Position3 &r = array.positions[static_cast<std::size_t>(q)];
                const cplx steer = std::polar(norm, kx * r.x() + ky * r.y() + gamma * r.z());
                const auto &pat = patterns[patterns.size() == 1 ? 0 : static_cast<std::size_t>(q)];
                const antenna::FieldPair f = pat(theta, phi);
                out.theta(q, b) = steer * f.theta;
                out.phi(q, b) = steer * f.phi;
            }
        }
        return out;
    }

    // H = Gamma_R [Psi_R^th, Psi_R^ph] H_pol [Psi_S^th, Psi_S^ph]^H Gamma_S
    inline CMatrix assemble_channel(const EfficiencyMatrix &gamma_r, const Harmonics &psi_r,
                                    const PolarizedWavenumberChannel &h, const Harmonics &psi_s,
                                    const EfficiencyMatrix &gamma_s)
    {
        const Eigen::Index er = psi_r.theta.cols(), es = psi_s.theta.cols();
        detail::require_shape(psi_r.phi.rows() == psi_r.theta.rows() && psi_r.phi.cols() == er &&
                                  psi_s.phi.rows() == psi_s.theta.rows() && psi_s.phi.cols() == es,
                              "harmonic blocks disagree in shape");
        for (const CMatrix *b : {&h.tt, &h.tp, &h.pt, &h.pp})
            detail::require_shape(b->rows() == er && b->cols() == es,
                                  "wavenumber blocks do not match the harmonic support sizes");
        detail::require_shape(gamma_r.size() == psi_r.theta.rows() && gamma_s.size() == psi_s.theta.rows(),
                              "efficiency matrix size does not match the array");

        CMatrix pr(psi_r.theta.rows(), 2 * er), ps(psi_s.theta.rows(), 2 * es);
        pr << psi_r.theta, psi_r.phi;
        ps << psi_s.theta, psi_s.phi;
        CMatrix out = pr * h.block() * ps.adjoint();
        out = gamma_r.diagonal().asDiagonal() * out;
        out = out * gamma_s.diagonal().asDiagonal();
        return out;
    }

    // Everything about one Rx/Tx configuration that does not change between realizations
    struct DenselySpacedModel
    {
        PlanarArray rx, tx;
        WavenumberSupport support_r, support_s;
        CouplingVariances variances;
        Harmonics psi_r, psi_s;
        EfficiencyMatrix gamma_r = EfficiencyMatrix::identity(1);
        EfficiencyMatrix gamma_s = EfficiencyMatrix::identity(1);
        double xpr_mean_db = 8.0;
        double xpr_std_db = 3.0;
        // Scale so each element pair has unit average gain when Gamma = I;
        // the raw 1/sqrt(N) harmonics otherwise shrink every entry as arrays densify.
        bool unit_element_gain = true;

        CMatrix realize(std::uint64_t seed) const
        {
            const CMatrix ha = sample_wavenumber_channel(variances, derive_seed(seed, 1));
            const auto hp = apply_polarization(ha, xpr_mean_db, xpr_std_db, derive_seed(seed, 2));
            CMatrix h = assemble_channel(gamma_r, psi_r, hp, psi_s, gamma_s);
            if (unit_element_gain)
                h *= std::sqrt(static_cast<double>(rx.size() * tx.size()));
            return h;
        }
    };

    struct DenselySpacedConfig
    {
        PlanarArray rx, tx;
        VmfMixture aps_r = VmfMixture::isotropic();
        VmfMixture aps_s = VmfMixture::isotropic();
        std::vector<antenna::PatternSet> patterns_r{antenna::PatternSet::isotropic_dual()};
        std::vector<antenna::PatternSet> patterns_s{antenna::PatternSet::isotropic_dual()};
        double efficiency_r = 1.0;
        double efficiency_s = 1.0;
        double xpr_mean_db = 8.0;
        double xpr_std_db = 3.0;
        CellQuadrature quadrature{};
    };

    inline DenselySpacedModel build_model(const DenselySpacedConfig &cfg, const WaveContext &ctx)
    {
        DenselySpacedModel m;
        m.rx = cfg.rx;
        m.tx = cfg.tx;
        m.support_r = wavenumber_support(cfg.rx.lx, cfg.rx.ly, ctx, Side::receiver);
        m.support_s = wavenumber_support(cfg.tx.lx, cfg.tx.ly, ctx, Side::transmitter);
        m.variances = coupling_variances(m.support_r, m.support_s, cfg.aps_r, cfg.aps_s, ctx, cfg.quadrature);
        m.psi_r = fourier_harmonics(cfg.rx, m.support_r, cfg.patterns_r, ctx);
        m.psi_s = fourier_harmonics(cfg.tx, m.support_s, cfg.patterns_s, ctx);
        m.gamma_r = EfficiencyMatrix::uniform(cfg.rx.size(), cfg.efficiency_r);
        m.gamma_s = EfficiencyMatrix::uniform(cfg.tx.size(), cfg.efficiency_s);
        m.xpr_mean_db = cfg.xpr_mean_db;
        m.xpr_std_db = cfg.xpr_std_db;
        return m;
    }
}

#endif
