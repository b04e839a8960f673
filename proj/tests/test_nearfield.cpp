// SPDX-License-Identifier: Apache-2.0
//
// Covered tests:
// - LOS coefficient: reference element, zero Doppler, exact-distance phase profile of a 64-element array
// - Bounce placement: single-bounce case, path length, angle round trip, per-element distances, infeasible delays
// - NLOS coefficient: reference element, infinite XPR, term-by-term oracle
// - Visibility probability and attenuation: limits, monotonicity, Monte Carlo spread
// - Impulse response: K-factor limits and weights, tap enumeration, power invariance over K
// - Planar wavefront baseline: single element, far-field agreement, affine phase, correlation trend
// - Cluster tables and ray generation

#include <catch2/catch_amalgamated.hpp>

#include "eit/io/cluster_table.hpp"
#include "eit/nearfield/channel.hpp"
#include "eit/nearfield/rays.hpp"
#include "test_support.hpp"

#include <numeric>
#include <sstream>

using namespace eit;
using namespace eit::nearfield;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    double wrap(double a) { return std::remainder(a, 2.0 * pi); }

    // Patch element facing global +x, vertically polarised
    PatternSet facing_x()
    {
        Eigen::Matrix3d r;
        r << 0, 0, 1, 1, 0, 0, 0, 1, 0;
        return PatternSet::patch(Position3::UnitY()).rotated(r);
    }

    ArrayGeometry los_pair(const Position3 &tx, const Position3 &rx)
    {
        ArrayGeometry g;
        g.tx = {Element{tx, PatternSet::isotropic_vertical(), 0.0}};
        g.rx = {Element{rx, PatternSet::isotropic_vertical(), 0.0}};
        return g;
    }

    // 64-element 1.4 m vertical array at height 25 m, 4-element UE at broadside distance d
    ArrayGeometry broadside(double d, const WaveContext &ctx, int n_bs = 64, double aperture = 1.4)
    {
        ArrayGeometry g;
        g.tx = linear_array({0, 0, 25}, Position3::UnitZ(), n_bs, aperture / (n_bs - 1), facing_x());
        centre_reference(g.tx);
        g.rx = linear_array({d, 0, 25}, Position3::UnitY(), 4, ctx.wavelength() / 2, PatternSet::isotropic_vertical());
        return g;
    }

    CirOptions los_only()
    {
        CirOptions o;
        o.k_factor = std::numeric_limits<double>::infinity();
        o.visibility.reset();
        return o;
    }

    ClusterRay random_ray(Rng &rng, const ArrayGeometry &g, double excess)
    {
        ClusterRay r;
        r.power = sample_uniform(rng, 0.1, 1.0);
        r.rays_in_cluster = 20;
        r.zod = sample_uniform(rng, 0.3, pi - 0.3);
        r.aod = sample_uniform(rng, -pi, pi);
        r.zoa = sample_uniform(rng, 0.3, pi - 0.3);
        r.aoa = sample_uniform(rng, -pi, pi);
        r.xpr = db_to_linear(sample_uniform(rng, 0.0, 15.0));
        for (auto &p : r.phases)
            p = sample_uniform(rng, -pi, pi);
        r.delay = ((g.rx_ref() - g.tx_ref()).norm() + excess) / speed_of_light;
        return r;
    }
}

TEST_CASE("LOS coefficient at the reference elements carries only the absolute phase", "[nearfield][los]")
{
    const WaveContext ctx(6.7e9);
    const auto g = los_pair({0, 0, 10}, {37.3, -4.1, 1.5});
    const double d00 = (g.rx_ref() - g.tx_ref()).norm();
    const cplx h = los_coefficient(0, 0, 0.0, g, {}, ctx);
    const cplx expected = std::exp(-j * (2 * pi * d00 / ctx.wavelength()));
    CHECK(std::abs(h - expected) < 1e-12);
}

TEST_CASE("LOS coefficient is time invariant without motion and rotates with Doppler otherwise", "[nearfield][los]")
{
    const WaveContext ctx(15e9);
    auto g = broadside(30.0, ctx, 8, 0.2);
    for (std::size_t u = 0; u < g.rx.size(); ++u)
        for (std::size_t s = 0; s < g.tx.size(); ++s)
            CHECK(std::abs(los_coefficient(u, s, 0.0, g, {}, ctx) - los_coefficient(u, s, 0.37, g, {}, ctx)) == 0.0);

    MotionState m;
    m.velocity = {-12.0, 3.0, 0.0};
    const double t = 1.3e-3;
    const Position3 rhat = (g.tx[2].position - g.rx[1].position).normalized();
    const cplx ratio = los_coefficient(1, 2, t, g, m, ctx) / los_coefficient(1, 2, 0.0, g, m, ctx);
    CHECK_THAT(wrap(std::arg(ratio) - 2 * pi * rhat.dot(m.velocity) / ctx.wavelength() * t), WithinAbs(0.0, 1e-9));
    CHECK_THAT(std::abs(ratio), WithinAbs(1.0, 1e-12));
}

TEST_CASE("LOS coefficient rejects coincident elements", "[nearfield][los]")
{
    const WaveContext ctx(6.7e9);
    auto g = los_pair({0, 0, 0}, {5, 0, 0});
    g.rx.push_back(Element{{0, 0, 0}, PatternSet::isotropic_vertical(), 0.0});
    CHECK_THROWS_AS(los_coefficient(1, 0, 0.0, g, {}, ctx), domain_error);
    CHECK_THROWS_AS(los_coefficient(2, 0, 0.0, g, {}, ctx), domain_error);
}

TEST_CASE("LOS phase across a 1.4 m array at 20 m follows the exact element distances", "[nearfield][los]")
{
    const WaveContext ctx(6.7e9);
    const double lambda = ctx.wavelength();
    ArrayGeometry g;
    g.tx = linear_array({0, 0, 25}, Position3::UnitZ(), 64, 1.4 / 63, PatternSet::isotropic_vertical());
    g.rx = {Element{{20.0, 0, 25}, PatternSet::isotropic_vertical(), 0.0}};

    std::vector<double> swa, pwa;
    for (std::size_t s = 0; s < g.tx.size(); ++s)
    {
        const double d = (g.rx[0].position - g.tx[s].position).norm();
        const double oracle = -2 * pi * d / lambda;
        const cplx h = los_coefficient(0, s, 0.0, g, {}, ctx);
        CHECK(std::abs(wrap(std::arg(h) - oracle)) < 1e-9);
        CHECK_THAT(std::abs(h), WithinAbs(1.0, 1e-12));
        swa.push_back(std::arg(h));
        pwa.push_back(std::arg(los_coefficient(0, s, 0.0, g, {}, ctx, Wavefront::planar)));
    }

    // Residual from the best affine fit of the unwrapped phase
    auto affine_residual = [](std::vector<double> ph) {
        for (std::size_t i = 1; i < ph.size(); ++i)
            ph[i] = ph[i - 1] + wrap(ph[i] - ph[i - 1]);
        const auto n = static_cast<Eigen::Index>(ph.size());
        Eigen::MatrixXd a(n, 2);
        Eigen::VectorXd b(n);
        for (Eigen::Index i = 0; i < n; ++i)
        {
            a(i, 0) = 1.0;
            a(i, 1) = static_cast<double>(i);
            b(i) = ph[static_cast<std::size_t>(i)];
        }
        const Eigen::VectorXd x = a.colPivHouseholderQr().solve(b);
        return (a * x - b).cwiseAbs().maxCoeff();
    };
    CHECK(affine_residual(pwa) < 1e-9);
    CHECK(affine_residual(swa) > 1.0);
}

TEST_CASE("Intersecting rays with matching delay give a single bounce", "[nearfield][bounce]")
{
    const WaveContext ctx(6.7e9);
    const auto g = los_pair({0, 0, 0}, {10, 0, 0});
    const Position3 scatterer(5, 5, 0);
    ClusterRay ray;
    std::tie(ray.zod, ray.aod) = antenna::angles_of(scatterer - g.tx_ref());
    std::tie(ray.zoa, ray.aoa) = antenna::angles_of(scatterer - g.rx_ref());
    ray.delay = ((scatterer - g.tx_ref()).norm() + (scatterer - g.rx_ref()).norm()) / speed_of_light;

    const auto b = locate_bounce_scatterers(ray, g, ctx);
    CHECK((b.first_bounce - b.last_bounce).norm() < 1e-9);
    CHECK((b.first_bounce - scatterer).norm() < 1e-9);
    CHECK_THAT(b.d_tx[0] + b.d_rx[0], WithinAbs(speed_of_light * ray.delay, 1e-9));
}

TEST_CASE("Bounce placement matches the delay and reproduces the ray angles", "[nearfield][bounce]")
{
    const WaveContext ctx(6.7e9);
    Rng rng(41);
    for (int trial = 0; trial < 500; ++trial)
    {
        const auto g = los_pair(testing::random_point(rng, 20.0), testing::random_point(rng, 50.0));
        const auto ray = random_ray(rng, g, sample_uniform(rng, 0.5, 200.0));
        const auto b = locate_bounce_scatterers(ray, g, ctx);
        CHECK_THAT(b.path_length(), WithinAbs(speed_of_light * ray.delay, 1e-9));
        CHECK(((b.first_bounce - g.tx_ref()).normalized() - ray.departure()).norm() < 1e-9);
        CHECK(((b.last_bounce - g.rx_ref()).normalized() - ray.arrival()).norm() < 1e-9);
        const auto [zd, ad] = b.tx_angles[0];
        const auto [za, aa] = b.rx_angles[0];
        CHECK(std::abs(zd - ray.zod) < 1e-9);
        CHECK(std::abs(wrap(ad - ray.aod)) < 1e-9);
        CHECK(std::abs(za - ray.zoa) < 1e-9);
        CHECK(std::abs(wrap(aa - ray.aoa)) < 1e-9);
    }
}

TEST_CASE("Per-element bounce distances match direct vector arithmetic", "[nearfield][bounce]")
{
    const WaveContext ctx(15e9);
    Rng rng(9);
    ArrayGeometry g;
    g.tx = linear_array({0, 0, 25}, Position3::UnitZ(), 16, 0.05, facing_x());
    g.rx = planar_array({40, 3, 1.5}, Position3::UnitY(), Position3::UnitZ(), 2, 2, 0.01, 0.01,
                        PatternSet::isotropic_dual());
    const auto ray = random_ray(rng, g, 35.0);
    const auto b = locate_bounce_scatterers(ray, g, ctx);
    for (std::size_t u = 0; u < 4; ++u)
    {
        const Position3 v = b.last_bounce - g.rx[u].position;
        CHECK_THAT(b.d_rx[u], WithinRel(std::sqrt(v.x() * v.x() + v.y() * v.y() + v.z() * v.z()), 1e-14));
        CHECK(std::abs(std::cos(b.rx_angles[u].first) - v.z() / v.norm()) < 1e-12);
        CHECK(std::abs(wrap(b.rx_angles[u].second - std::atan2(v.y(), v.x()))) < 1e-12);
    }
    for (std::size_t s = 0; s < g.tx.size(); ++s)
        CHECK_THAT(b.d_tx[s], WithinRel((b.first_bounce - g.tx[s].position).norm(), 1e-14));
}

TEST_CASE("Delays shorter than the direct path are infeasible", "[nearfield][bounce]")
{
    const WaveContext ctx(6.7e9);
    const auto g = los_pair({0, 0, 0}, {100, 0, 0});
    ClusterRay ray;
    ray.delay = 99.0 / speed_of_light;
    CHECK_THROWS_AS(locate_bounce_scatterers(ray, g, ctx), infeasible_geometry_error);
    ray.delay = 100.0 / speed_of_light;
    CHECK_THROWS_AS(locate_bounce_scatterers(ray, g, ctx), infeasible_geometry_error);
}

TEST_CASE("Diverging rays still meet the delay", "[nearfield][bounce]")
{
    const WaveContext ctx(6.7e9);
    const auto g = los_pair({0, 0, 0}, {100, 0, 0});
    ClusterRay ray;
    ray.aod = pi;  // away from the receiver
    ray.aoa = 0.0; // away from the transmitter
    ray.delay = 180.0 / speed_of_light;
    const auto b = locate_bounce_scatterers(ray, g, ctx);
    CHECK_THAT(b.path_length(), WithinAbs(180.0, 1e-9));
    CHECK(b.d_tx[0] > 0.0);
    CHECK(b.d_rx[0] > 0.0);
}

TEST_CASE("NLOS coefficient at the reference elements", "[nearfield][nlos]")
{
    const WaveContext ctx(6.7e9);
    Rng rng(3);
    ArrayGeometry g;
    g.tx = linear_array({0, 0, 10}, Position3::UnitZ(), 4, 0.1, PatternSet::short_dipole({0.3, 0.2, 1.0}));
    g.rx = linear_array({30, 0, 1.5}, Position3::UnitY(), 2, 0.02, PatternSet::short_dipole({1.0, 0.4, 0.1}));
    auto ray = random_ray(rng, g, 20.0);
    const auto b = locate_bounce_scatterers(ray, g, ctx);

    const auto fr = g.rx[0].field(ray.arrival());
    const auto ft = g.tx[0].field(ray.departure());
    const double ik = 1 / std::sqrt(ray.xpr);
    const auto &ph = ray.phases;
    const cplx gain = fr.theta * (std::exp(j * ph[0]) * ft.theta + ik * std::exp(j * ph[1]) * ft.phi) +
                      fr.phi * (ik * std::exp(j * ph[2]) * ft.theta + std::exp(j * ph[3]) * ft.phi);
    const cplx h = nlos_coefficient(0, 0, ray, b, 0.0, g, {}, ctx);
    CHECK(std::abs(h - std::sqrt(ray.power / 20.0) * gain) < 1e-12);

    // Infinite XPR with aligned pure-theta patterns
    ArrayGeometry iso = g;
    for (auto *side : {&iso.tx, &iso.rx})
        for (auto &e : *side)
            e.pattern = PatternSet::isotropic_vertical();
    ray.xpr = 1e300;
    const auto bi = locate_bounce_scatterers(ray, iso, ctx);
    CHECK_THAT(std::abs(nlos_coefficient(0, 0, ray, bi, 0.0, iso, {}, ctx)), WithinRel(std::sqrt(ray.power / 20.0), 1e-12));
}

TEST_CASE("NLOS coefficient matches a term-by-term expansion", "[nearfield][nlos]")
{
    const WaveContext ctx(15e9);
    const double lambda = ctx.wavelength();
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial)
    {
        ArrayGeometry g;
        g.tx = {Element{testing::random_point(rng, lambda), PatternSet::short_dipole(testing::random_point(rng, 1.0)), 0.3},
                Element{testing::random_point(rng, lambda), PatternSet::short_dipole(testing::random_point(rng, 1.0)), -0.2}};
        g.rx = {Element{Position3(40, 5, 0) + testing::random_point(rng, lambda), PatternSet::isotropic_dual(), 0.0},
                Element{Position3(40, 5, 0) + testing::random_point(rng, lambda), PatternSet::short_dipole({0, 0, 1}), 0.1}};
        const auto ray = random_ray(rng, g, sample_uniform(rng, 1.0, 50.0));
        MotionState m;
        m.velocity = testing::random_point(rng, 10.0);
        const double t = sample_uniform(rng, 0.0, 1e-4);
        const auto b = locate_bounce_scatterers(ray, g, ctx);

        for (std::size_t u = 0; u < 2; ++u)
            for (std::size_t s = 0; s < 2; ++s)
            {
                // Everything recomputed from the scatterer positions
                const Position3 vr = b.last_bounce - g.rx[u].position;
                const Position3 vt = b.first_bounce - g.tx[s].position;
                const Position3 vr0 = b.last_bounce - g.rx[0].position;
                const Position3 vt0 = b.first_bounce - g.tx[0].position;
                auto slanted = [](const Element &e, const Position3 &d) {
                    const auto f = e.pattern.global(d.normalized());
                    Eigen::Vector2cd v(f.theta, f.phi);
                    Eigen::Matrix2cd rot;
                    rot << std::cos(e.slant), -std::sin(e.slant), std::sin(e.slant), std::cos(e.slant);
                    return Eigen::Vector2cd(rot * v);
                };
                Eigen::Matrix2cd xp;
                const double ik = std::sqrt(1.0 / ray.xpr);
                xp << std::polar(1.0, ray.phases[0]), std::polar(ik, ray.phases[1]), std::polar(ik, ray.phases[2]),
                    std::polar(1.0, ray.phases[3]);
                const cplx gain = slanted(g.rx[u], vr).transpose() * xp * slanted(g.tx[s], vt);
                const double phase = 2 * pi / lambda * ((vr0.norm() - vr.norm()) + (vt0.norm() - vt.norm())) +
                                     2 * pi / lambda * vr.normalized().dot(m.velocity) * t;
                const cplx oracle = std::sqrt(ray.power / ray.rays_in_cluster) * gain * std::polar(1.0, phase);
                const cplx h = nlos_coefficient(u, s, ray, b, t, g, m, ctx);
                CHECK(std::abs(h - oracle) < 1e-14);
            }
    }
}

TEST_CASE("Visibility probability limits", "[nearfield][visibility]")
{
    VisibilityModel m;
    m.xi = 0.0;
    CHECK(visibility_probability(1.0, 1.0, m, 1) == std::min(1.0, m.A + m.B));
    m.A = 0.3;
    CHECK_THAT(visibility_probability(1.0, 1.0, m, 1), WithinAbs(0.7, 1e-15));
    CHECK_THAT(visibility_probability(1e-6, 1.0, m, 1), WithinAbs(m.B, 1e-4));
    CHECK_THROWS_AS(visibility_probability(2.0, 1.0, m, 1), domain_error);

    double prev = -1.0;
    for (double p = 0.0; p <= 1.0; p += 0.01)
    {
        const double v = visibility_probability(p, 1.0, m, 5);
        CHECK(v >= prev);
        prev = v;
    }

    m.xi = 2.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed)
    {
        const double v = visibility_probability(0.5, 1.0, m, seed);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == visibility_probability(0.5, 1.0, m, seed));
    }

    VisibilityModel bad;
    bad.B = 1.5;
    CHECK_THROWS_AS(visibility_probability(0.5, 1.0, bad, 0), domain_error);
}

TEST_CASE("Visibility perturbation has the configured spread", "[nearfield][visibility]")
{
    VisibilityModel m;
    m.A = 0.3;
    m.B = 0.3;
    m.xi = 0.05;
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double v = visibility_probability(1.0, 1.0, m, derive_seed(2024, static_cast<std::uint64_t>(i)));
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK_THAT(mean, WithinAbs(0.6, 1e-3));
    CHECK_THAT(sd, WithinRel(m.xi, 0.05));
}

TEST_CASE("Attenuation factor", "[nearfield][visibility]")
{
    CHECK(attenuation_factor(0.0, 10.0) == 0.5);
    CHECK(attenuation_factor(1.0, 1e3) < 1e-300);
    CHECK_THAT(attenuation_factor(-0.5, 10.0), WithinAbs(1.0 / (1.0 + std::exp(-5.0)), 1e-15));
    CHECK_THAT(attenuation_factor(-0.5, 10.0), WithinAbs(0.9933, 1e-4));
    CHECK_THROWS_AS(attenuation_factor(0.1, 0.0), domain_error);
    double prev = 1.0;
    for (double dd = -1.0; dd <= 1.0; dd += 0.05)
    {
        const double a = attenuation_factor(dd, 10.0);
        CHECK(a < prev);
        CHECK(a > 0.0);
        prev = a;
    }
    for (double c = 1.0; c < 20.0; c += 1.0)
        CHECK(attenuation_factor(0.3, c + 1.0) < attenuation_factor(0.3, c));
}

TEST_CASE("Distance offset normalises across the Tx elements", "[nearfield][visibility]")
{
    const std::vector<double> d{10.0, 12.0, 14.0};
    CHECK_THAT(distance_offset(d, 0, 0.7), WithinAbs(-0.7, 1e-15));
    CHECK_THAT(distance_offset(d, 1, 0.7), WithinAbs(-0.2, 1e-15));
    CHECK_THAT(distance_offset(d, 2, 0.7), WithinAbs(0.3, 1e-15));
    CHECK(distance_offset({5.0, 5.0}, 1, 0.4) == -0.4);
}

TEST_CASE("Impulse response K-factor limits", "[nearfield][cir]")
{
    const WaveContext ctx(6.7e9);
    Rng rng(5);
    auto g = broadside(40.0, ctx, 8, 0.3);
    std::vector<ClusterRay> rays;
    for (int i = 0; i < 6; ++i)
    {
        auto r = random_ray(rng, g, 10.0 + i);
        r.cluster = i / 2;
        r.ray = i % 2;
        rays.push_back(r);
    }

    CirOptions inf;
    inf.k_factor = std::numeric_limits<double>::infinity();
    const auto cir = channel_impulse_response(g, rays, inf, 0.0, {}, ctx);
    REQUIRE(cir.taps.size() == 7);
    for (std::size_t k = 1; k < cir.taps.size(); ++k)
        CHECK(cir.taps[k].h.norm() == 0.0);
    double los_power = 0.0;
    for (Eigen::Index s = 0; s < cir.tx_count(); ++s)
        for (Eigen::Index u = 0; u < cir.rx_count(); ++u)
            los_power += std::norm(cir.taps[0].alpha(s) * los_coefficient(u, s, 0.0, g, {}, ctx));
    CHECK_THAT(cir.total_power(), WithinRel(los_power, 1e-12));
    CHECK_THAT(cir.taps[0].delay, WithinRel((g.rx_ref() - g.tx_ref()).norm() / speed_of_light, 1e-15));

    CirOptions one;
    one.k_factor = 1.0;
    one.visibility.reset();
    const auto c1 = channel_impulse_response(g, rays, one, 0.0, {}, ctx);
    const double w = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(c1.taps[0].h(1, 2) - w * los_coefficient(1, 2, 0.0, g, {}, ctx)) < 1e-15);
    for (std::size_t k = 0; k < rays.size(); ++k)
    {
        const auto b = locate_bounce_scatterers(rays[k], g, ctx);
        CHECK(std::abs(c1.taps[k + 1].h(3, 5) - w * nlos_coefficient(3, 5, rays[k], b, 0.0, g, {}, ctx)) < 1e-15);
        CHECK(c1.taps[k + 1].delay == rays[k].delay);
    }
}

TEST_CASE("Impulse response keeps one tap per ray above the attenuation threshold", "[nearfield][cir]")
{
    const WaveContext ctx(6.7e9);
    Rng rng(8);
    auto g = broadside(25.0, ctx, 16, 1.0);
    std::vector<ClusterRay> rays;
    for (int i = 0; i < 12; ++i)
    {
        auto r = random_ray(rng, g, 5.0 + (i % 3)); // repeated delays
        r.cluster = i;
        r.power = std::pow(0.5, i);
        rays.push_back(r);
    }
    CirOptions opt;
    opt.seed = 17;
    opt.alpha_threshold = 0.5;
    const auto cir = channel_impulse_response(g, rays, opt, 0.0, {}, ctx);
    for (Eigen::Index s = 0; s < cir.tx_count(); ++s)
    {
        std::size_t expected = 1;
        for (std::size_t k = 0; k < rays.size(); ++k)
        {
            // Attenuation recomputed from the model definitions
            const auto b = locate_bounce_scatterers(rays[k], g, ctx);
            const double v = visibility_probability(rays[k].power / rays[0].power, 1.0, *opt.visibility,
                                                    derive_seed(opt.seed, static_cast<std::uint64_t>(k) + 1));
            const double a = attenuation_factor(distance_offset(b.d_tx, static_cast<std::size_t>(s), v), opt.visibility->C);
            CHECK_THAT(cir.taps[k + 1].alpha(s), WithinAbs(a, 1e-15));
            expected += a > opt.alpha_threshold ? 1 : 0;
        }
        CHECK(cir.at(0, s).size() == expected);
    }
}

TEST_CASE("Impulse response power does not depend on the K-factor", "[nearfield][cir]")
{
    const WaveContext ctx(6.7e9);
    auto g = broadside(60.0, ctx, 4, 0.2);
    for (auto *side : {&g.tx, &g.rx})
        for (auto &e : *side)
            e.pattern = PatternSet::isotropic_vertical();
    const std::vector<double> powers{0.5, 0.3, 0.2};
    const int trials = 4000;
    for (double k : {0.1, 1.0, 10.0})
    {
        double acc = 0.0;
        Rng rng(100);
        for (int t = 0; t < trials; ++t)
        {
            std::vector<ClusterRay> rays;
            for (int n = 0; n < 3; ++n)
                for (int m = 0; m < 2; ++m)
                {
                    auto r = random_ray(rng, g, 3.0 + n);
                    r.cluster = n;
                    r.ray = m;
                    r.rays_in_cluster = 2;
                    r.power = powers[static_cast<std::size_t>(n)];
                    rays.push_back(r);
                }
            CirOptions opt;
            opt.k_factor = k;
            opt.visibility.reset();
            acc += channel_impulse_response(g, rays, opt, 0.0, {}, ctx).narrowband().squaredNorm();
        }
        CHECK_THAT(acc / trials / 16.0, WithinRel(1.0, 0.04));
    }
}

TEST_CASE("Planar wavefront equals the spherical one for single elements", "[nearfield][pwa]")
{
    const WaveContext ctx(6.7e9);
    Rng rng(12);
    const auto g = los_pair({0, 0, 25}, {13, 7, 1.5});
    std::vector<ClusterRay> rays{random_ray(rng, g, 4.0), random_ray(rng, g, 9.0)};
    MotionState m;
    m.velocity = {3, 1, 0};
    const auto a = channel_impulse_response(g, rays, {}, 0.01, m, ctx).flatten();
    const auto b = planar_wave_channel(g, rays, {}, 0.01, m, ctx).flatten();
    CHECK((a - b).norm() < 1e-14 * a.norm());
}

TEST_CASE("Planar and spherical phases agree far beyond the Rayleigh distance", "[nearfield][pwa]")
{
    const WaveContext ctx(6.7e9);
    const double rayleigh = 2 * 1.4 * 1.4 / ctx.wavelength();
    const auto g = broadside(100 * rayleigh, ctx);
    double worst = 0.0;
    for (std::size_t u = 0; u < g.rx.size(); ++u)
        for (std::size_t s = 0; s < g.tx.size(); ++s)
        {
            const cplx a = los_coefficient(u, s, 0.0, g, {}, ctx);
            const cplx b = los_coefficient(u, s, 0.0, g, {}, ctx, Wavefront::planar);
            worst = std::max(worst, std::abs(wrap(std::arg(a) - std::arg(b))));
        }
    CHECK(worst < 0.01);
}

TEST_CASE("Spatial correlation", "[nearfield][pwa]")
{
    Rng rng(4);
    const CVector h = testing::random_cmatrix(rng, 32, 1);
    CHECK_THAT(spatial_correlation(h, cplx(-0.3, 2.0) * h), WithinAbs(1.0, 1e-14));
    CVector e1 = CVector::Zero(4), e2 = CVector::Zero(4);
    e1(0) = 1.0;
    e2(1) = j;
    CHECK(spatial_correlation(e1, e2) == 0.0);
    CHECK_THROWS_AS(spatial_correlation(e1, CVector::Zero(4)), domain_error);
    CHECK_THROWS_AS(spatial_correlation(e1, CVector::Zero(3)), shape_error);
}

TEST_CASE("Correlation falls as the LOS user approaches a 1.53 m array at 6.7 GHz", "[nearfield][pwa]")
{
    const WaveContext ctx(6.7e9);
    const double rayleigh = 2 * (0.33 * 0.33 + 1.5 * 1.5) / ctx.wavelength();
    auto rho_at = [&](double d) {
        ArrayGeometry g;
        g.tx = planar_array({0, 0, 25}, Position3::UnitY(), Position3::UnitZ(), 8, 32, 0.33 / 7, 1.5 / 31, facing_x());
        centre_reference(g.tx);
        g.rx = linear_array({d, 0, 25}, Position3::UnitY(), 4, ctx.wavelength() / 2, PatternSet::isotropic_vertical());
        return spatial_correlation(planar_wave_channel(g, {}, los_only(), 0.0, {}, ctx).flatten(),
                                   channel_impulse_response(g, {}, los_only(), 0.0, {}, ctx).flatten());
    };
    double prev = 1.0;
    for (double d = 500.0; d >= 20.0; d *= 0.9)
    {
        const double rho = rho_at(d);
        CHECK(rho < prev);
        prev = rho;
    }
    CHECK(rho_at(20.0) < 0.9);
    CHECK(rho_at(10 * rayleigh) > 0.99);
}

TEST_CASE("Cluster table loading", "[nearfield][io]")
{
    const auto t = io::load_cluster_table(std::string(EIT_DATA_DIR) + "/cdl_b.txt");
    CHECK(t.rows.size() == 23);
    CHECK(t.c_asa == 22.0);
    CHECK(t.xpr_db == 8.0);
    const auto p = t.linear_powers();
    CHECK_THAT(std::accumulate(p.begin(), p.end(), 0.0), WithinAbs(1.0, 1e-14));

    std::istringstream bad1("spread c_asd=1\n0 0 0 0 90 90\n0 0 0 0 200 90\n");
    CHECK_THROWS_WITH(io::load_cluster_table(bad1, "t"), Catch::Matchers::ContainsSubstring("t:3"));
    std::istringstream bad2("spread c_asd=1 bogus=3\n");
    CHECK_THROWS_AS(io::load_cluster_table(bad2), io_error);
    std::istringstream bad3("0 0 0 0 90 90\n");
    CHECK_THROWS_AS(io::load_cluster_table(bad3), io_error);
    std::istringstream bad4("spread c_asd=2\n0 0 0 0 90\n");
    CHECK_THROWS_AS(io::load_cluster_table(bad4), io_error);
    CHECK_THROWS_AS(io::load_cluster_table("/nonexistent/table.txt"), io_error);
}

TEST_CASE("Ray generation from a cluster table", "[nearfield][rays]")
{
    const WaveContext ctx(6.7e9);
    const auto t = io::load_cluster_table(std::string(EIT_DATA_DIR) + "/cdl_b.txt");
    const auto g = broadside(50.0, ctx, 8, 0.5);
    RayConfig cfg;
    const auto rays = generate_rays(t, g, cfg, 99);
    REQUIRE(rays.size() == 23 * 20);
    const double los_delay = (g.rx_ref() - g.tx_ref()).norm() / speed_of_light;
    double total = 0.0;
    for (const auto &r : rays)
    {
        CHECK(r.delay > los_delay);
        CHECK_THAT(r.xpr, WithinRel(db_to_linear(8.0), 1e-12));
        total += r.power / r.rays_in_cluster;
        CHECK_NOTHROW(locate_bounce_scatterers(r, g, ctx));
    }
    CHECK_THAT(total, WithinAbs(1.0, 1e-12));
    const auto again = generate_rays(t, g, cfg, 99);
    CHECK(again[137].phases == rays[137].phases);
    CHECK(again[137].aoa == rays[137].aoa);
    CHECK(generate_rays(t, g, cfg, 100)[137].phases != rays[137].phases);

    // Cluster 0 arrives close to the LOS direction
    const Position3 los_arrival = (g.tx_ref() - g.rx_ref()).normalized();
    CHECK(rays[0].arrival().dot(los_arrival) > std::cos(60.0 * pi / 180.0));

    cfg.first_excess = 0.0;
    CHECK_THROWS_AS(generate_rays(t, g, cfg, 1), domain_error);
}

TEST_CASE("Factorised narrowband sum equals the planar impulse response", "[nearfield][pwa]")
{
    const WaveContext ctx(6.7e9);
    Rng rng(31);
    ArrayGeometry g;
    g.tx = planar_array({0, 0, 25}, Position3::UnitY(), Position3::UnitZ(), 4, 4, 0.05, 0.1, facing_x(), pi / 4);
    g.rx = planar_array({60, 10, 1.5}, Position3::UnitX(), Position3::UnitZ(), 3, 2, 0.02, 0.02,
                        PatternSet::short_dipole({1, 1, 0}));
    std::vector<ClusterRay> rays;
    for (int i = 0; i < 10; ++i)
        rays.push_back(random_ray(rng, g, 2.0 + i));
    CirOptions opt;
    opt.include_los = false;
    opt.visibility.reset();
    const CMatrix ref = planar_wave_channel(g, rays, opt, 0.0, {}, ctx).narrowband();
    CHECK(testing::rel_frobenius(planar_narrowband(g, rays, ctx), ref) < 1e-13);
}
