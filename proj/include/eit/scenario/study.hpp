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
#ifndef EIT_SCENARIO_STUDY_HPP
#define EIT_SCENARIO_STUDY_HPP

#include "eit/capacity/capacity.hpp"
#include "eit/core/parallel.hpp"
#include "eit/em/channel.hpp"
#include "eit/em/green.hpp"
#include "eit/io/cluster_table.hpp"
#include "eit/io/results.hpp"
#include "eit/nearfield/channel.hpp"
#include "eit/nearfield/rays.hpp"
#include "eit/scenario/scenario.hpp"
#include "eit/tripol/channel.hpp"
#include "eit/wavenumber/cdl.hpp"
#include "eit/wavenumber/channel.hpp"

#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#ifndef EIT_DATA_DIR
#define EIT_DATA_DIR "data"
#endif

namespace eit::scenario
{
    // How one output table maps onto a figure
    struct PlotAxes
    {
        std::string table, title, x, y, series;
    };

    struct StudyResult
    {
        std::vector<io::ResultTable> tables;
        std::vector<PlotAxes> axes;
    };

    namespace detail_study
    {
        inline constexpr double deg = pi / 180.0;

        inline unsigned threads(const Scenario &s) { return static_cast<unsigned>(s.threads); }

        inline io::ClusterTable clusters(const Scenario &s, const std::string &path)
        {
            if (path.empty())
                return io::load_cluster_table(std::string(EIT_DATA_DIR) + "/cdl_b.txt");
            return io::load_cluster_table(resolve_data_path(s, path).string());
        }

        // Runs f(i) for every index, tagging failures with the item
        template <typename Body>
        void for_each_item(const Scenario &s, std::size_t count, const std::string &what, Body &&body)
        {
            parallel_for(
                count,
                [&](std::size_t i) {
                    try
                    {
                        body(i);
                    }
                    catch (const std::exception &e)
                    {
                        throw study_error(what + " " + std::to_string(i) + ": " + e.what());
                    }
                },
                threads(s));
        }

        inline wavenumber::VmfMixture mixture(const std::vector<VmfLobe> &lobes)
        {
            std::vector<wavenumber::VmfCluster> c;
            for (const auto &l : lobes)
                c.push_back({l.weight, l.theta_deg * deg, l.phi_deg * deg, l.concentration});
            return wavenumber::VmfMixture(std::move(c));
        }

        inline StudyResult densely_spaced(const Scenario &s)
        {
            const auto &p = s.densely_spaced;
            const WaveContext ctx(p.frequency_hz);
            const double lambda = ctx.wavelength();
            const auto n = static_cast<std::size_t>(s.scaled(p.realizations));
            const bool needs_table = p.rx_mixture.empty() || p.tx_mixture.empty();
            const auto table = needs_table ? clusters(s, p.cluster_table) : io::ClusterTable{};
            const auto aps_r = p.rx_mixture.empty()
                                   ? wavenumber::aps_from_clusters(table, wavenumber::Side::receiver,
                                                                   p.rx_normal_azimuth_deg * deg)
                                   : mixture(p.rx_mixture);
            const auto aps_s = p.tx_mixture.empty()
                                   ? wavenumber::aps_from_clusters(table, wavenumber::Side::transmitter,
                                                                   p.tx_normal_azimuth_deg * deg)
                                   : mixture(p.tx_mixture);
            const auto dipole = antenna::PatternSet::short_dipole(Position3::UnitX());

            io::ResultTable t;
            t.name = "capacity_vs_spacing";
            t.columns = {{"scheme", "1"},
                         {"rx_spacing", "lambda"},
                         {"rx_elements", "1"},
                         {"tx_elements", "1"},
                         {"mean_capacity", "bit/s/Hz"},
                         {"std_capacity", "bit/s/Hz"},
                         {"p10_capacity", "bit/s/Hz"},
                         {"p50_capacity", "bit/s/Hz"},
                         {"p90_capacity", "bit/s/Hz"},
                         {"realizations", "1"}};
            for (double spacing : p.rx_spacings_wavelengths)
                for (Scheme scheme : p.schemes)
                {
                    wavenumber::DenselySpacedConfig cfg;
                    cfg.rx = wavenumber::PlanarArray::uniform(p.rx_aperture_x_wavelengths * lambda,
                                                              p.rx_aperture_y_wavelengths * lambda, spacing * lambda,
                                                              spacing * lambda);
                    cfg.tx = wavenumber::PlanarArray::uniform(p.tx_aperture_x_wavelengths * lambda,
                                                              p.tx_aperture_y_wavelengths * lambda,
                                                              p.tx_spacing_wavelengths * lambda,
                                                              p.tx_spacing_wavelengths * lambda);
                    if (scheme != Scheme::ideal)
                        cfg.aps_r = aps_r, cfg.aps_s = aps_s;
                    if (scheme == Scheme::ni_pd || scheme == Scheme::proposed)
                        cfg.patterns_r = cfg.patterns_s = {dipole};
                    if (scheme == Scheme::proposed)
                        cfg.efficiency_r = cfg.efficiency_s = p.proposed_efficiency;
                    cfg.xpr_mean_db = p.xpr_mean_db;
                    cfg.xpr_std_db = p.xpr_std_db;
                    cfg.quadrature.tolerance = p.quadrature_tolerance;

                    const std::string where = std::string("scheme ") + to_string(scheme) + ", rx spacing " +
                                              io::format_number(spacing) + " lambda";
                    spdlog::info("densely-spaced: {} ({} realizations)", where, n);
                    try
                    {
                        const auto model = wavenumber::build_model(cfg, ctx);
                        // every scheme and spacing reuses the same realization seeds
                        const auto stats = capacity::ergodic_capacity(
                            [&](std::uint64_t seed) { return model.realize(seed); }, n, db_to_linear(p.snr_db), 1.0,
                            p.allocation, s.seed, "densely-spaced", threads(s));
                        double var = 0.0;
                        for (double c : stats.capacities)
                            var += (c - stats.mean) * (c - stats.mean);
                        var /= static_cast<double>(std::max<std::size_t>(1, n - 1));
                        t.add_row({std::string(to_string(scheme)), spacing,
                                   static_cast<std::int64_t>(cfg.rx.size()), static_cast<std::int64_t>(cfg.tx.size()),
                                   stats.mean, n > 1 ? std::sqrt(var) : 0.0, stats.percentile(0.1),
                                   stats.percentile(0.5), stats.percentile(0.9), static_cast<std::int64_t>(n)});
                    }
                    catch (const std::exception &e)
                    {
                        throw study_error(where + ": " + e.what());
                    }
                }
            return {{t},
                    {{t.name, "Ergodic capacity vs receive element spacing", "rx_spacing", "mean_capacity",
                      "scheme"}}};
        }

        inline std::vector<nearfield::Element> bs_panel(const NearFieldParams &p)
        {
            const auto patch = antenna::PatternSet::patch(Position3::UnitY()).rotated(tripol::panel_orientation(0.0));
            auto els = nearfield::planar_array({0.0, 0.0, p.bs_z_m}, Position3::UnitY(), Position3::UnitZ(),
                                               static_cast<int>(p.bs_columns), static_cast<int>(p.bs_rows),
                                               p.bs_width_m / static_cast<double>(p.bs_columns - 1),
                                               p.bs_height_m / static_cast<double>(p.bs_rows - 1), patch);
            nearfield::centre_reference(els);
            return els;
        }

        inline std::vector<nearfield::Element> ue_line(const NearFieldParams &p, const Position3 &centre,
                                                       const Position3 &axis, double lambda)
        {
            auto els = nearfield::linear_array(centre, axis, static_cast<int>(p.ue_elements),
                                               p.ue_spacing_wavelengths * lambda,
                                               antenna::PatternSet::isotropic_vertical());
            nearfield::centre_reference(els);
            return els;
        }

        inline double wrap(double a) { return std::remainder(a, 2.0 * pi); }

        inline StudyResult near_field(const Scenario &s)
        {
            const auto &p = s.near_field;
            const WaveContext ctx(p.frequency_hz);
            const double lambda = ctx.wavelength();
            const double rayleigh = em::rayleigh_distance(std::hypot(p.bs_width_m, p.bs_height_m), ctx);
            const auto table = clusters(s, p.cluster_table);
            nearfield::RayConfig rc;
            rc.delay_spread = p.delay_spread_s;
            rc.first_excess = p.first_excess_delay_s;
            rc.rays_per_cluster = static_cast<int>(p.rays_per_cluster);
            nearfield::VisibilityModel vis{p.visibility_a, p.visibility_lambda, p.visibility_b, p.visibility_xi,
                                           p.visibility_c};
            const auto bs = bs_panel(p);

            // UE drops
            const auto n = static_cast<std::size_t>(s.scaled(p.ue_count));
            spdlog::info("near-field: {} UE drops at {} Hz", n, p.frequency_hz);
            struct Drop
            {
                Position3 pos;
                double distance = 0.0, rho = 0.0, alpha = 0.0;
                bool los = false;
            };
            std::vector<Drop> drops(n);
            for_each_item(s, n, "UE", [&](std::size_t i) {
                const std::uint64_t seed = derive_seed(s.seed, "near-field", i);
                Rng rng(derive_seed(seed, 0));
                Drop &d = drops[i];
                const double r = std::sqrt(sample_uniform(rng, p.min_distance_m * p.min_distance_m,
                                                          p.max_distance_m * p.max_distance_m));
                const double az = sample_uniform(rng, -p.sector_half_width_deg, p.sector_half_width_deg) * deg;
                d.los = sample_uniform(rng, 0.0, 1.0) < p.outdoor_fraction;
                d.pos = {r * std::cos(az), r * std::sin(az), p.ue_z_m};

                nearfield::ArrayGeometry g;
                g.tx = bs;
                g.rx = ue_line(p, d.pos, {-std::sin(az), std::cos(az), 0.0}, lambda);
                const auto rays = nearfield::generate_rays(table, g, rc, derive_seed(seed, 1));
                nearfield::CirOptions opt;
                opt.k_factor = db_to_linear(p.k_factor_db);
                opt.include_los = d.los;
                opt.visibility = p.visibility ? std::optional(vis) : std::nullopt;
                opt.seed = derive_seed(seed, 2);
                const auto swa = nearfield::channel_impulse_response(g, rays, opt, 0.0, {}, ctx);
                const auto pwa = nearfield::planar_wave_channel(g, rays, opt, 0.0, {}, ctx);
                d.rho = nearfield::spatial_correlation(pwa.flatten(), swa.flatten());
                d.distance = (g.rx_ref() - g.tx_ref()).norm();
                double acc = 0.0;
                for (const auto &tap : swa.taps)
                    acc += tap.alpha.mean();
                d.alpha = swa.taps.empty() ? 1.0 : acc / static_cast<double>(swa.taps.size());
            });
            io::ResultTable ues;
            ues.name = "ue_correlation";
            ues.columns = {{"ue", "1"},       {"x", "m"},   {"y", "m"},          {"z", "m"},
                           {"distance", "m"}, {"los", "1"}, {"rho", "1"},        {"mean_alpha", "1"}};
            for (std::size_t i = 0; i < n; ++i)
            {
                const Drop &d = drops[i];
                ues.add_row({static_cast<std::int64_t>(i), d.pos.x(), d.pos.y(), d.pos.z(), d.distance,
                             static_cast<std::int64_t>(d.los), d.rho, d.alpha});
            }

            // LOS correlation along broadside at the BS height, far to near
            const auto m = static_cast<std::size_t>(p.sweep_points);
            std::vector<double> sweep_rho(m), sweep_d(m);
            for_each_item(s, m, "sweep point", [&](std::size_t i) {
                const double f = static_cast<double>(i) / static_cast<double>(m - 1);
                sweep_d[i] = p.sweep_max_distance_m * std::pow(p.sweep_min_distance_m / p.sweep_max_distance_m, f);
                nearfield::ArrayGeometry g;
                g.tx = bs;
                g.rx = ue_line(p, {sweep_d[i], 0.0, p.bs_z_m}, Position3::UnitY(), lambda);
                nearfield::CirOptions opt;
                opt.k_factor = HUGE_VAL;
                opt.visibility.reset();
                const auto swa = nearfield::channel_impulse_response(g, {}, opt, 0.0, {}, ctx);
                const auto pwa = nearfield::planar_wave_channel(g, {}, opt, 0.0, {}, ctx);
                sweep_rho[i] = nearfield::spatial_correlation(pwa.flatten(), swa.flatten());
            });
            io::ResultTable sweep;
            sweep.name = "los_sweep";
            sweep.columns = {{"distance", "m"}, {"distance_over_rayleigh", "1"}, {"rho", "1"}};
            for (std::size_t i = 0; i < m; ++i)
                sweep.add_row({sweep_d[i], sweep_d[i] / rayleigh, sweep_rho[i]});

            // Per-element LOS phase along a long horizontal arm, against exact path lengths
            io::ResultTable phase;
            phase.name = "phase_profile";
            phase.columns = {{"element", "1"},        {"position", "m"},       {"phase_swa", "rad"},
                             {"phase_pwa", "rad"},    {"phase_oracle", "rad"}, {"swa_minus_oracle", "rad"},
                             {"swa_minus_pwa", "rad"}};
            try
            {
                const auto ne = static_cast<int>(p.phase_elements);
                const double step = p.phase_aperture_m / static_cast<double>(ne - 1);
                nearfield::ArrayGeometry g;
                g.tx = nearfield::linear_array({0.0, 0.0, p.bs_z_m}, Position3::UnitY(), ne, step,
                                               antenna::PatternSet::isotropic_vertical());
                g.rx = nearfield::linear_array({p.phase_distance_m, 0.0, p.bs_z_m}, Position3::UnitY(),
                                               static_cast<int>(p.ue_elements), p.ue_spacing_wavelengths * lambda,
                                               antenna::PatternSet::isotropic_vertical());
                nearfield::CirOptions opt;
                opt.k_factor = HUGE_VAL;
                opt.visibility.reset();
                const CMatrix hs = nearfield::channel_impulse_response(g, {}, opt, 0.0, {}, ctx).narrowband();
                const CMatrix hp = nearfield::planar_wave_channel(g, {}, opt, 0.0, {}, ctx).narrowband();
                const Position3 &u = g.rx_ref();
                const long double k = 2.0L * std::numbers::pi_v<long double> / static_cast<long double>(lambda);
                auto dist = [&](int e) {
                    const Eigen::Matrix<long double, 3, 1> v = (u - g.tx[static_cast<std::size_t>(e)].position).cast<long double>();
                    return std::sqrt(v.squaredNorm());
                };
                double unwrapped_s = 0.0, unwrapped_p = 0.0, prev_s = 0.0, prev_p = 0.0;
                for (int e = 0; e < ne; ++e)
                {
                    const double as = std::arg(hs(0, e) / hs(0, 0)), ap = std::arg(hp(0, e) / hp(0, 0));
                    unwrapped_s = e == 0 ? 0.0 : unwrapped_s + wrap(as - prev_s);
                    unwrapped_p = e == 0 ? 0.0 : unwrapped_p + wrap(ap - prev_p);
                    prev_s = as, prev_p = ap;
                    const double oracle = static_cast<double>(-k * (dist(e) - dist(0)));
                    phase.add_row({static_cast<std::int64_t>(e), (static_cast<double>(e) - 0.5 * (ne - 1)) * step,
                                   unwrapped_s, unwrapped_p, oracle, wrap(unwrapped_s - oracle),
                                   unwrapped_s - unwrapped_p});
                }
            }
            catch (const std::exception &e)
            {
                throw study_error(std::string("phase profile: ") + e.what());
            }

            return {{ues, sweep, phase},
                    {{ues.name, "Correlation of planar and spherical wavefront channels per UE", "distance", "rho",
                      "los"},
                     {sweep.name, "LOS correlation vs distance along broadside", "distance", "rho", ""},
                     {phase.name, "Per-element LOS phase along the array", "element", "phase_swa", ""}}};
        }

        inline StudyResult tri_pol(const Scenario &s)
        {
            const auto &p = s.tri_pol;
            const WaveContext ctx(p.frequency_hz);
            tripol::DropConfig cfg;
            cfg.ue.rows = static_cast<int>(p.ue_rows);
            cfg.ue.cols = static_cast<int>(p.ue_cols);
            cfg.ue.pols = static_cast<int>(p.ue_pols);
            cfg.ue.third_gain_db = p.ue_third_gain_db;
            cfg.bs_h = static_cast<int>(p.bs_columns);
            cfg.bs_v = static_cast<int>(p.bs_rows);
            cfg.bs_width = p.bs_width_m;
            cfg.bs_height = p.bs_height_m;
            cfg.bs_z = p.bs_z_m;
            cfg.ue_z = p.ue_z_m;
            cfg.min_distance = p.min_distance_m;
            cfg.max_distance = p.max_distance_m;
            cfg.sector_half_width = p.sector_half_width_deg * deg;
            cfg.facing_spread = p.facing_spread_deg * deg;
            cfg.clusters = clusters(s, p.cluster_table);
            cfg.rays.delay_spread = p.delay_spread_s;
            cfg.rays.first_excess = p.first_excess_delay_s;
            cfg.rays.rays_per_cluster = static_cast<int>(p.rays_per_cluster);

            tripol::TrialConfig tc;
            tc.uplink_snr_db = p.uplink_snr_db;
            tc.downlink_snr_db = p.downlink_snr_db();
            tc.capacity_snr_db = p.capacity_snr_db;
            tc.feedback_bits = static_cast<int>(p.feedback_bits);
            tc.grouping = {p.grouping, p.grouping_threshold};

            const auto per_cell = static_cast<std::size_t>(s.scaled(p.ues_per_cell));
            const std::size_t n = per_cell * static_cast<std::size_t>(p.cells);
            spdlog::info("tri-pol: {} cells x {} UEs, UL {} dB, DL {} dB", p.cells, per_cell, tc.uplink_snr_db,
                         tc.downlink_snr_db);
            std::vector<tripol::TrialResult> res(n);
            for_each_item(s, n, "UE", [&](std::size_t i) {
                const std::uint64_t seed = derive_seed(s.seed, "tri-pol", i);
                const auto ch = tripol::generate_channel(cfg, ctx, derive_seed(seed, 0));
                res[i] = tripol::compare_estimators(ch, tc, derive_seed(seed, 1));
            });

            io::ResultTable ues;
            ues.name = "ue_rates";
            ues.columns = {{"ue", "1"},
                           {"cell", "1"},
                           {"capacity_joint", "bit/s/Hz"},
                           {"capacity_benchmark", "bit/s/Hz"},
                           {"capacity_perfect_csi", "bit/s/Hz"},
                           {"mse_joint", "1"},
                           {"mse_benchmark", "1"},
                           {"g2_ports", "1"},
                           {"z_ports_in_g2", "1"}};
            std::vector<double> joint, bench;
            for (std::size_t i = 0; i < n; ++i)
            {
                const auto &r = res[i];
                ues.add_row({static_cast<std::int64_t>(i), static_cast<std::int64_t>(i / per_cell), r.rate_joint,
                             r.rate_benchmark, r.rate_perfect, r.mse_joint, r.mse_benchmark,
                             static_cast<std::int64_t>(r.g2_size), static_cast<std::int64_t>(r.z_ports_in_g2)});
                joint.push_back(r.rate_joint);
                bench.push_back(r.rate_benchmark);
            }
            std::sort(joint.begin(), joint.end());
            std::sort(bench.begin(), bench.end());
            io::ResultTable cdf;
            cdf.name = "capacity_cdf";
            cdf.columns = {{"probability", "1"}, {"capacity_joint", "bit/s/Hz"}, {"capacity_benchmark", "bit/s/Hz"}};
            for (std::size_t i = 0; i < n; ++i)
                cdf.add_row({static_cast<double>(i + 1) / static_cast<double>(n), joint[i], bench[i]});
            return {{ues, cdf},
                    {{ues.name, "Per-UE capacity of joint and uplink-only estimation", "ue", "capacity_joint", ""},
                     {cdf.name, "Capacity CDF, joint vs uplink-only benchmark", "capacity_joint, capacity_benchmark",
                      "probability", ""}}};
        }

        inline StudyResult em_core(const Scenario &s)
        {
            const auto &p = s.em_core;
            const WaveContext ctx(p.frequency_hz);
            const double k0 = ctx.wavenumber();

            const auto n = static_cast<std::size_t>(s.scaled(p.samples));
            std::vector<double> k0r(n), err(n);
            for_each_item(s, n, "sample", [&](std::size_t i) {
                Rng rng(derive_seed(s.seed, "em-core-validation", i));
                k0r[i] = std::exp(sample_uniform(rng, std::log(p.k0r_min), std::log(p.k0r_max)));
                Position3 dir(sample_normal(rng, 0, 1), sample_normal(rng, 0, 1), sample_normal(rng, 0, 1));
                dir.normalize();
                const Position3 src(sample_uniform(rng, -1, 1), sample_uniform(rng, -1, 1), sample_uniform(rng, -1, 1));
                const Position3 obs = src + (k0r[i] / k0) * dir;
                const auto g = em::dyadic_green(obs, src, ctx);
                err[i] = (em::green_decomposition(obs, src, ctx).sum() - g).norm() / g.norm();
            });
            io::ResultTable green;
            green.name = "green_decomposition";
            green.columns = {{"sample", "1"}, {"k0r", "1"}, {"relative_error", "1"}};
            for (std::size_t i = 0; i < n; ++i)
                green.add_row({static_cast<std::int64_t>(i), k0r[i], err[i]});

            // delta ports on two perpendicular lines reproduce the point-to-point channel
            io::ResultTable degen;
            degen.name = "conventional_degeneration";
            degen.columns = {{"m", "1"}, {"n", "1"}, {"abs_error", "1"}, {"relative_error", "1"}};
            {
                const auto ports = static_cast<std::size_t>(p.ports);
                Rng rng(derive_seed(s.seed, "em-core-degeneration", 0));
                std::vector<Position3> rx, tx;
                std::vector<CVector3> pr, pt;
                auto unit = [&] {
                    Position3 v(sample_normal(rng, 0, 1), sample_normal(rng, 0, 1), sample_normal(rng, 0, 1));
                    return CVector3(v.normalized().cast<cplx>());
                };
                for (std::size_t i = 0; i < ports; ++i)
                {
                    rx.emplace_back(0.05 * static_cast<double>(i), 0.0, 3.0);
                    tx.emplace_back(0.0, 0.04 * static_cast<double>(i), 0.0);
                    pr.push_back(unit());
                    pt.push_back(unit());
                }
                const auto ap_r = em::Aperture::discrete(rx), ap_s = em::Aperture::discrete(tx);
                std::vector<em::PortFunction> phis, psis;
                for (std::size_t i = 0; i < ports; ++i)
                {
                    phis.push_back(em::PortFunction::delta(ports, i, pr[i], em::PortKind::combining));
                    psis.push_back(em::PortFunction::delta(ports, i, pt[i], em::PortKind::precoding));
                }
                const auto G = em::assemble_em_channel(phis, psis, ap_r, ap_s, ctx);
                for (std::size_t m = 0; m < ports; ++m)
                    for (std::size_t q = 0; q < ports; ++q)
                    {
                        const cplx ref = -j * ctx.angular_frequency() * ctx.permeability() *
                                         pr[m].dot(em::dyadic_green(rx[m], tx[q], ctx) * pt[q]);
                        const double a = std::abs(G(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(q)) - ref);
                        degen.add_row({static_cast<std::int64_t>(m), static_cast<std::int64_t>(q), a,
                                       a / std::abs(ref)});
                    }
            }

            io::ResultTable regions;
            regions.name = "field_regions";
            regions.columns = {{"frequency", "Hz"},
                               {"aperture", "m"},
                               {"wavelength", "m"},
                               {"reactive_boundary", "m"},
                               {"rayleigh_distance", "m"}};
            for (const auto &c : p.apertures)
            {
                const WaveContext w(c.frequency_hz);
                regions.add_row({c.frequency_hz, c.aperture_m, w.wavelength(),
                                 em::reactive_boundary(c.aperture_m, w), em::rayleigh_distance(c.aperture_m, w)});
            }

            io::ResultTable hannan;
            hannan.name = "hannan_efficiency";
            hannan.columns = {{"spacing", "lambda"}, {"efficiency", "1"}, {"analytic", "1"}};
            for (double sp : p.hannan_spacings_wavelengths)
            {
                const double lambda = ctx.wavelength();
                hannan.add_row({sp, wavenumber::hannan_efficiency(sp * lambda, sp * lambda, ctx),
                                std::min(1.0, pi * sp * sp)});
            }
            return {{green, degen, regions, hannan},
                    {{green.name, "Near/far decomposition residual", "k0r", "relative_error", ""},
                     {degen.name, "Delta-port EM channel vs point-to-point Green channel", "n", "abs_error", "m"},
                     {regions.name, "Field-region boundaries", "aperture", "rayleigh_distance", "frequency"},
                     {hannan.name, "Hannan efficiency vs spacing", "spacing", "efficiency", ""}}};
        }
    }

    inline StudyResult run_study(const Scenario &s)
    {
        StudyResult out;
        const std::string label = "scenario '" + (s.name.empty() ? std::string(to_string(s.study)) : s.name) +
                                  "' (" + to_string(s.study) + ", seed " + std::to_string(s.seed) + "): ";
        try
        {
            switch (s.study)
            {
            case StudyKind::densely_spaced:
                out = detail_study::densely_spaced(s);
                break;
            case StudyKind::near_field:
                out = detail_study::near_field(s);
                break;
            case StudyKind::tri_pol:
                out = detail_study::tri_pol(s);
                break;
            case StudyKind::em_core_validation:
                out = detail_study::em_core(s);
                break;
            }
        }
        catch (const std::exception &e)
        {
            throw study_error(label + e.what());
        }
        const std::string hash = scenario_hash(s);
        for (auto &t : out.tables)
            t.metadata = {{"study", to_string(s.study)},
                          {"scenario", s.name},
                          {"seed", std::to_string(s.seed)},
                          {"scale", io::format_number(s.scale)},
                          {"version", library_version},
                          {"scenario_hash", hash}};
        return out;
    }

    // Plain-text description of every table and the figure axes it feeds
    inline std::string manifest(const Scenario &s, const StudyResult &r, io::Format format)
    {
        std::ostringstream out;
        out << "study: " << to_string(s.study) << "\n";
        out << "scenario: " << s.name << "\n";
        out << "seed: " << s.seed << "\n";
        out << "scale: " << io::format_number(s.scale) << "\n";
        out << "version: " << library_version << "\n";
        out << "scenario_hash: " << scenario_hash(s) << "\n";
        for (const auto &t : r.tables)
        {
            out << "\n[" << t.name << io::extension(format) << "]\n";
            for (const auto &a : r.axes)
                if (a.table == t.name)
                {
                    out << "title: " << a.title << "\n";
                    out << "x: " << a.x << "\n";
                    out << "y: " << a.y << "\n";
                    if (!a.series.empty())
                        out << "series: " << a.series << "\n";
                }
            out << "rows: " << t.rows.size() << "\n";
            out << "columns:";
            for (const auto &c : t.columns)
                out << " " << c.name << "(" << c.unit << ")";
            out << "\n";
        }
        return out.str();
    }

    // Writes every table plus manifest.txt into `dir`, returning the written paths
    inline std::vector<std::filesystem::path> write_study(const Scenario &s, const StudyResult &r,
                                                          const std::filesystem::path &dir, io::Format format)
    {
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec)
            throw io_error("cannot create output directory '" + dir.string() + "': " + ec.message());
        std::vector<std::filesystem::path> written;
        for (const auto &t : r.tables)
        {
            const auto path = dir / (t.name + io::extension(format));
            io::write_results(t, format, path);
            written.push_back(path);
        }
        const auto path = dir / "manifest.txt";
        std::ofstream m(path, std::ios::binary);
        m << manifest(s, r, format);
        if (!m)
            throw io_error("write to '" + path.string() + "' failed");
        written.push_back(path);
        return written;
    }
}

#endif
