// SPDX-License-Identifier: Apache-2.0
//
// Covered tests:
// - Wavenumber support: lattice counts, brute-force enumeration, symmetry
// - VMF density: limits, sphere normalisation against adaptive Simpson
// - Coupling variances: partition of unity, determinism, concentrated spectrum vs. dense grid
// - Wavenumber channel sampling moments and polarisation
// - Fourier harmonics, angles, Hannan efficiency, compact channel assembly
// - APS from a cluster table: array frame, weights, concentration

#include <catch2/catch_amalgamated.hpp>

#include "eit/wavenumber/cdl.hpp"
#include "eit/wavenumber/channel.hpp"
#include "test_support.hpp"

#include <set>
#include <sstream>

using namespace eit;
using namespace eit::wavenumber;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    const WaveContext unit_ctx = WaveContext::from_wavelength(1.0);

    std::set<std::pair<int, int>> brute_support(double Lx, double Ly, double lambda)
    {
        std::set<std::pair<int, int>> out;
        for (int x = -20; x <= 20; ++x)
            for (int y = -20; y <= 20; ++y)
            {
                const double a = x * lambda / Lx, b = y * lambda / Ly;
                if (a * a + b * b <= 1.0)
                    out.insert({x, y});
            }
        return out;
    }

    std::set<std::pair<int, int>> as_set(const WavenumberSupport &s)
    {
        std::set<std::pair<int, int>> out;
        for (const auto &i : s.indices)
            out.insert({i.x, i.y});
        return out;
    }
}

TEST_CASE("wavenumber_support")
{
    SECTION("4 lambda aperture has 49 lattice points")
    {
        CHECK(wavenumber_support(4.0, 4.0, unit_ctx, Side::receiver).size() == 49);
        CHECK(as_set(wavenumber_support(4.0, 4.0, unit_ctx, Side::receiver)) == brute_support(4.0, 4.0, 1.0));
    }

    SECTION("lambda aperture has the five axis points")
    {
        const auto s = wavenumber_support(1.0, 1.0, unit_ctx, Side::transmitter);
        CHECK(as_set(s) == std::set<std::pair<int, int>>{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}});
        CHECK(s.side == Side::transmitter);
    }

    SECTION("physical units: 4 lambda at 4.7 GHz")
    {
        const WaveContext ctx(4.7e9);
        const double lam = ctx.wavelength();
        CHECK(wavenumber_support(4 * lam, 4 * lam, ctx, Side::receiver).size() == 49);
        CHECK(wavenumber_support(lam, lam, ctx, Side::receiver).size() == 5);
    }

    SECTION("matches brute-force enumeration on random rectangles")
    {
        Rng rng(21);
        for (int trial = 0; trial < 20; ++trial)
        {
            const double Lx = sample_uniform(rng, 1.0, 10.0), Ly = sample_uniform(rng, 1.0, 10.0);
            CHECK(as_set(wavenumber_support(Lx, Ly, unit_ctx, Side::receiver)) == brute_support(Lx, Ly, 1.0));
        }
    }

    SECTION("square support is symmetric under negation and axis swap")
    {
        const auto s = as_set(wavenumber_support(3.3, 3.3, unit_ctx, Side::receiver));
        for (const auto &[x, y] : s)
        {
            CHECK(s.count({-x, -y}) == 1);
            CHECK(s.count({y, x}) == 1);
        }
    }

    SECTION("domain errors")
    {
        CHECK_THROWS_AS(wavenumber_support(0.0, 1.0, unit_ctx, Side::receiver), domain_error);
        CHECK_THROWS_AS(axial_wavenumber(5, 0, 4.0, 4.0, unit_ctx), domain_error);
    }
}

TEST_CASE("wavenumber_to_angles")
{
    const auto [t0, p0] = wavenumber_to_angles(0, 0, 4.0, 4.0, unit_ctx);
    CHECK(t0 == 0.0);
    CHECK(p0 == 0.0);
    CHECK_THAT(axial_wavenumber(0, 0, 4.0, 4.0, unit_ctx), WithinRel(2 * pi, 1e-15));

    const auto [tb, pb] = wavenumber_to_angles(0, 4, 4.0, 4.0, unit_ctx);
    CHECK_THAT(tb, WithinAbs(pi / 2, 1e-12));
    CHECK_THAT(pb, WithinAbs(pi / 2, 1e-15));

    // k_x = k0 sin(theta) cos(phi)
    const auto [t1, p1] = wavenumber_to_angles(1, 0, 4.0, 4.0, unit_ctx);
    CHECK_THAT(std::sin(t1) * std::cos(p1), WithinRel(0.25, 1e-14));
    const auto [t2, p2] = wavenumber_to_angles(-2, 3, 4.0, 5.0, unit_ctx);
    CHECK_THAT(std::sin(t2) * std::cos(p2), WithinRel(-0.5, 1e-13));
    CHECK_THAT(std::sin(t2) * std::sin(p2), WithinRel(0.6, 1e-13));
}

TEST_CASE("vmf_pdf")
{
    SECTION("uniform limit")
    {
        CHECK(vmf_pdf(0.3, 1.0, VmfCluster{1.0, 0.5, 0.5, 0.0}) == 1.0 / (4 * pi));
        CHECK_THAT(1.0 / (4 * pi), WithinAbs(0.0796, 1e-4));
    }

    SECTION("value at the mean direction")
    {
        for (double a : {0.1, 1.0, 10.0, 50.0, 700.0})
        {
            const VmfCluster c{1.0, 0.6, -1.1, a};
            const double expected = a <= 50 ? a * std::exp(a) / (4 * pi * std::sinh(a)) : a / (2 * pi);
            CHECK_THAT(vmf_pdf(0.6, -1.1, c), WithinRel(expected, 1e-12));
        }
    }

    SECTION("integrates to one over the sphere")
    {
        for (double a : {0.0, 0.1, 1.0, 10.0, 50.0})
        {
            const VmfCluster c{1.0, 1.1, 0.7, a};
            auto inner = [&](double t) {
                return std::sin(t) * testing::adaptive_simpson([&](double p) { return vmf_pdf(t, p, c); }, -pi, pi, 1e-12);
            };
            // split at the mean zenith so the peak sits on a panel boundary
            const double total = testing::adaptive_simpson(inner, 0.0, c.mean_theta, 1e-11) +
                                 testing::adaptive_simpson(inner, c.mean_theta, pi, 1e-11);
            INFO("alpha = " << a);
            CHECK_THAT(total, WithinAbs(1.0, 1e-6));
        }
    }

    SECTION("negative concentration")
    {
        CHECK_THROWS_AS(vmf_pdf(0.1, 0.1, VmfCluster{1.0, 0.0, 0.0, -1.0}), domain_error);
    }
}

TEST_CASE("VmfMixture")
{
    CHECK_THROWS_AS(VmfMixture({VmfCluster{0.5, 0, 0, 1}, VmfCluster{0.4, 0, 0, 1}}), domain_error);
    CHECK_THROWS_AS(VmfMixture({VmfCluster{-0.5, 0, 0, 1}, VmfCluster{1.5, 0, 0, 1}}), domain_error);
    const auto m = VmfMixture::normalized({VmfCluster{2.0, 0, 0, 1}, VmfCluster{6.0, 1, 0, 1}});
    CHECK_THAT(m.clusters()[1].weight, WithinRel(0.75, 1e-15));
}

TEST_CASE("coupling_variances")
{
    const WaveContext ctx(4.7e9);
    const double lam = ctx.wavelength();
    const auto s4 = wavenumber_support(4 * lam, 4 * lam, ctx, Side::transmitter);
    const auto s1 = wavenumber_support(lam, lam, ctx, Side::receiver);

    SECTION("isotropic cells tile the front hemisphere")
    {
        for (const auto *s : {&s1, &s4})
        {
            double total = 0.0;
            const auto raw = detail_cells::raw_masses(*s, VmfMixture::isotropic(), ctx, {}, total);
            double acc = 0.0;
            for (double v : raw)
            {
                CHECK(v >= 0.0);
                acc += v;
            }
            // isotropic density 1/(4 pi) over 2 pi sr
            CHECK_THAT(total, WithinAbs(0.5, 1e-9));
            CHECK_THAT(acc, WithinRel(total, 1e-12));
        }
        const auto v = coupling_variances(s1, s4, VmfMixture::isotropic(), VmfMixture::isotropic(), ctx);
        CHECK(v.rows() == 5);
        CHECK(v.cols() == 49);
        CHECK_THAT(v.sigma2.sum(), WithinAbs(1.0, 1e-3));
        CHECK(v.sigma2.minCoeff() >= 0.0);
        CHECK_THAT(v.sigma2.rowwise().sum().sum(), WithinAbs(1.0, 1e-3));
    }

    SECTION("deterministic")
    {
        const VmfMixture m({VmfCluster{0.4, 0.3, 0.2, 5.0}, VmfCluster{0.6, 0.8, -2.0, 20.0}});
        const auto a = coupling_variances(s1, s4, m, m, ctx);
        const auto b = coupling_variances(s1, s4, m, m, ctx);
        CHECK(a.sigma2 == b.sigma2);
    }

    SECTION("concentrated spectrum against a dense direction-cosine grid")
    {
        // broadside mean: the (0,0) cell is |sin(theta) cos(phi)|, |sin(theta) sin(phi)| < 1/8
        const VmfCluster c{1.0, 0.0, 0.0, 50.0};
        const auto masses = cell_masses(s4, VmfMixture({c}), ctx);
        std::size_t centre = 0;
        for (std::size_t i = 0; i < s4.size(); ++i)
            if (s4.indices[i].x == 0 && s4.indices[i].y == 0)
                centre = i;
        CHECK(std::max_element(masses.begin(), masses.end()) - masses.begin() == static_cast<std::ptrdiff_t>(centre));

        const int n = 2000;
        const double h = 0.25 / n;
        double grid = 0.0;
        for (int ia = 0; ia < n; ++ia)
            for (int ib = 0; ib < n; ++ib)
            {
                const double a = -0.125 + (ia + 0.5) * h, b = -0.125 + (ib + 0.5) * h;
                const double cz = std::sqrt(1.0 - a * a - b * b);
                // dOmega = da db / cos(theta); density depends on cos(theta) only
                grid += 50.0 * std::exp(50.0 * (cz - 1.0)) / (2 * pi * -std::expm1(-100.0)) / cz * h * h;
            }
        const double front = -std::expm1(-50.0) / -std::expm1(-100.0); // mass with cos(theta) > 0
        const double oracle = grid / front;
        CHECK_THAT(masses[centre], WithinAbs(oracle, 1e-5));
        // near erf(0.625)^2 = 0.39: the cell is narrower than the lobe, so well short of half
        CHECK_THAT(masses[centre], WithinAbs(0.39, 1e-3));

        const auto v = coupling_variances(s4, s4, VmfMixture({c}), VmfMixture({c}), ctx);
        Eigen::Index r, cc;
        v.sigma2.maxCoeff(&r, &cc);
        CHECK(r == static_cast<Eigen::Index>(centre));
        CHECK(cc == static_cast<Eigen::Index>(centre));
    }

    SECTION("non-convergent rule is reported")
    {
        const VmfMixture sharp({VmfCluster{1.0, 0.9, 0.3, 5e4}});
        CHECK_THROWS_AS(coupling_variances(s4, s4, sharp, sharp, ctx, CellQuadrature{1e-12, 0}), numerical_error);
    }
}

TEST_CASE("aps_from_clusters")
{
    std::istringstream in("spread c_asd=10 c_asa=20 c_zsd=3 c_zsa=7 xpr_db=8\n"
                          "0.0  0.0  90.0  180.0  90.0  90.0\n"
                          "0.5 -3.0   0.0   90.0  90.0  45.0\n");
    const auto t = io::load_cluster_table(in);
    const double p1 = 1.0 / (1.0 + std::pow(10.0, -0.3));
    const double deg = pi / 180.0;

    SECTION("receiver facing -x")
    {
        const auto m = aps_from_clusters(t, Side::receiver, pi);
        REQUIRE(m.clusters().size() == 2);
        const auto &a = m.clusters()[0], &b = m.clusters()[1];
        CHECK_THAT(a.weight, WithinRel(p1, 1e-12));
        CHECK_THAT(b.weight, WithinRel(1.0 - p1, 1e-12));
        // arrival from -x is broadside
        CHECK_THAT(a.mean_theta, WithinAbs(0.0, 1e-7));
        CHECK_THAT(a.concentration, WithinRel(1.0 / std::pow(20 * deg, 2), 1e-12));
        // from +y at 45 deg zenith: local (-1/sqrt2, 1/sqrt2, 0)
        CHECK_THAT(b.mean_theta, WithinAbs(pi / 2, 1e-12));
        CHECK_THAT(b.mean_phi, WithinAbs(3 * pi / 4, 1e-12));
    }

    SECTION("transmitter facing +x")
    {
        const auto m = aps_from_clusters(t, Side::transmitter, 0.0, 5.0);
        const auto &a = m.clusters()[0], &b = m.clusters()[1];
        // departure along +y lies in the aperture plane on local x
        CHECK_THAT(a.mean_theta, WithinAbs(pi / 2, 1e-12));
        CHECK_THAT(a.mean_phi, WithinAbs(0.0, 1e-12));
        CHECK_THAT(b.mean_theta, WithinAbs(0.0, 1e-7));
        CHECK_THAT(b.concentration, WithinRel(1.0 / std::pow(5 * deg, 2), 1e-12));
    }

    SECTION("zero spread")
    {
        CHECK_THROWS_AS(aps_from_clusters(t, Side::receiver, 0.0, 0.0), domain_error);
    }
}

TEST_CASE("sample_wavenumber_channel")
{
    SECTION("zero variance, zero mean")
    {
        CouplingVariances v{Eigen::MatrixXd::Zero(3, 4), CMatrix()};
        CHECK(sample_wavenumber_channel(v, 5).isZero(0.0));
    }

    SECTION("Monte Carlo moments")
    {
        CouplingVariances v;
        v.sigma2.resize(2, 2);
        v.sigma2 << 0.5, 0.1, 2.0, 0.02;
        v.mean.resize(2, 2);
        v.mean << cplx(1.0, -1.0), 0.0, cplx(0.0, 0.3), cplx(-0.2, 0.0);
        const int n = 100000;
        CMatrix sum = CMatrix::Zero(2, 2);
        Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(2, 2);
        for (int i = 0; i < n; ++i)
        {
            const CMatrix h = sample_wavenumber_channel(v, derive_seed(99, "moments", i));
            sum += h;
            sq += (h - v.mean).cwiseAbs2();
        }
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
            {
                CHECK_THAT(sq(r, c) / n, WithinRel(v.sigma2(r, c), 0.05));
                CHECK(std::abs(sum(r, c) / double(n) - v.mean(r, c)) < 3 * std::sqrt(v.sigma2(r, c) / n));
            }
    }

    SECTION("reproducible per seed")
    {
        CouplingVariances v{Eigen::MatrixXd::Constant(3, 3, 0.1), CMatrix()};
        CHECK(sample_wavenumber_channel(v, 7) == sample_wavenumber_channel(v, 7));
        CHECK(sample_wavenumber_channel(v, 7) != sample_wavenumber_channel(v, 8));
    }
}

TEST_CASE("apply_polarization")
{
    Rng rng(2);
    const CMatrix h = testing::random_cmatrix(rng, 4, 6);

    SECTION("co-polar blocks keep the amplitude")
    {
        const auto p = apply_polarization(h, 8.0, 3.0, 11);
        CHECK((p.tt.cwiseAbs() - h.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((p.pp.cwiseAbs() - h.cwiseAbs()).cwiseAbs().maxCoeff() < 1e-15);
    }

    SECTION("huge XPR suppresses cross-polar blocks")
    {
        const auto p = apply_polarization(h, 300.0, 0.0, 11);
        for (Eigen::Index i = 0; i < h.size(); ++i)
        {
            CHECK(std::abs(p.tp(i)) < 1e-14 * std::abs(p.tt(i)));
            CHECK(std::abs(p.pt(i)) < 1e-14 * std::abs(p.pp(i)));
        }
    }

    SECTION("10 dB XPR gives a 10^-0.5 amplitude ratio")
    {
        const auto p = apply_polarization(h, 10.0, 0.0, 11);
        for (Eigen::Index i = 0; i < h.size(); ++i)
        {
            CHECK_THAT(std::abs(p.tp(i)) / std::abs(p.tt(i)), WithinRel(std::pow(10.0, -0.5), 1e-12));
            CHECK_THAT(std::abs(p.pt(i)) / std::abs(p.tt(i)), WithinRel(0.31622776601683794, 1e-12));
        }
    }

    SECTION("block layout")
    {
        const auto p = apply_polarization(h, 8.0, 3.0, 4);
        const CMatrix b = p.block();
        CHECK(b.rows() == 8);
        CHECK(b.cols() == 12);
        CHECK(b.topRightCorner(4, 6) == p.tp);
        CHECK(b.bottomLeftCorner(4, 6) == p.pt);
    }
}

TEST_CASE("hannan_efficiency")
{
    const WaveContext ctx(4.7e9);
    const double lam = ctx.wavelength();
    CHECK_THAT(hannan_efficiency(lam / 2, lam / 2, ctx), WithinAbs(pi / 4, 1e-12));
    CHECK_THAT(hannan_efficiency(lam / 4, lam / 4, ctx), WithinAbs(pi / 16, 1e-12));
    CHECK_THAT(hannan_efficiency(lam / 8, lam / 8, ctx), WithinAbs(pi / 64, 1e-12));
    CHECK(hannan_efficiency(lam, lam, ctx) == 1.0);
    CHECK_THROWS_AS(hannan_efficiency(0.0, lam, ctx), domain_error);
}

TEST_CASE("fourier_harmonics")
{
    const std::vector<antenna::PatternSet> iso{antenna::PatternSet::isotropic_dual()};

    SECTION("isotropic planar array")
    {
        const auto arr = PlanarArray::uniform(4.0, 4.0, 0.5, 0.5);
        const auto sup = wavenumber_support(4.0, 4.0, unit_ctx, Side::receiver);
        const auto h = fourier_harmonics(arr, sup, iso, unit_ctx);
        const double n = static_cast<double>(arr.size());
        for (Eigen::Index b = 0; b < h.theta.cols(); ++b)
            CHECK(h.theta.col(b).norm() <= 1.0 + 1e-12);
        for (std::size_t b = 0; b < sup.size(); ++b)
            if (sup.indices[b].x == 0 && sup.indices[b].y == 0)
                for (Eigen::Index q = 0; q < h.theta.rows(); ++q)
                    CHECK(std::abs(h.theta(q, static_cast<Eigen::Index>(b)) - 1.0 / std::sqrt(n)) < 1e-15);
    }

    SECTION("2x2 array with depth matches per-entry evaluation")
    {
        PlanarArray arr;
        arr.lx = 1.0;
        arr.ly = 1.0;
        arr.dx = arr.dy = 0.5;
        arr.positions = {Position3(0.25, 0.25, 0.0), Position3(0.75, 0.25, 0.01), Position3(0.25, 0.75, -0.02),
                         Position3(0.75, 0.75, 0.03)};
        const auto sup = wavenumber_support(1.0, 1.0, unit_ctx, Side::receiver);
        REQUIRE(sup.size() == 5);
        const std::vector<antenna::PatternSet> pats{antenna::PatternSet::patch(Position3::UnitX())};
        const auto h = fourier_harmonics(arr, sup, pats, unit_ctx);
        for (std::size_t b = 0; b < 5; ++b)
        {
            const int lx = sup.indices[b].x, ly = sup.indices[b].y;
            const double kx = 2 * pi * lx, ky = 2 * pi * ly;
            const double gamma = std::sqrt(4 * pi * pi - kx * kx - ky * ky);
            const double st = std::sqrt(kx * kx + ky * ky) / (2 * pi);
            const double theta = std::asin(std::min(1.0, st));
            const double phi = (lx == 0 && ly == 0) ? 0.0 : std::atan2(ky, kx);
            const auto f = pats[0](theta, phi);
            for (std::size_t q = 0; q < 4; ++q)
            {
                const auto &r = arr.positions[q];
                const cplx e = 0.5 * std::exp(j * (kx * r.x() + ky * r.y() + gamma * r.z()));
                CHECK(std::abs(h.theta(q, b) - e * f.theta) < 1e-14);
                CHECK(std::abs(h.phi(q, b) - e * f.phi) < 1e-14);
            }
        }
    }

    SECTION("shape checks")
    {
        const auto arr = PlanarArray::uniform(1.0, 1.0, 0.5, 0.5);
        const auto sup = wavenumber_support(1.0, 1.0, unit_ctx, Side::receiver);
        const std::vector<antenna::PatternSet> three(3);
        CHECK_THROWS_AS(fourier_harmonics(arr, sup, three, unit_ctx), shape_error);
    }
}

TEST_CASE("PlanarArray")
{
    const auto a = PlanarArray::uniform(1.0, 2.0, 0.25, 0.5);
    CHECK(a.size() == 16);
    for (const auto &p : a.positions)
    {
        CHECK(p.x() > 0.0);
        CHECK(p.x() < 1.0);
        CHECK(p.y() < 2.0);
        CHECK(p.z() == 0.0);
    }
    CHECK_THROWS_AS(PlanarArray::uniform(1.0, 1.0, -0.5, 0.5), domain_error);
}

TEST_CASE("assemble_channel")
{
    Rng rng(31);

    SECTION("single element, single index")
    {
        Harmonics pr{CMatrix::Constant(1, 1, std::polar(1.0, 0.3)), CMatrix::Constant(1, 1, std::polar(1.0, -0.2))};
        Harmonics ps{CMatrix::Constant(1, 1, std::polar(1.0, 1.1)), CMatrix::Constant(1, 1, std::polar(1.0, 0.5))};
        PolarizedWavenumberChannel h;
        h.tt = CMatrix::Constant(1, 1, cplx(1, 2));
        h.tp = CMatrix::Constant(1, 1, cplx(0.1, 0));
        h.pt = CMatrix::Constant(1, 1, cplx(0, -0.3));
        h.pp = CMatrix::Constant(1, 1, cplx(-1, 0.5));
        const auto g = EfficiencyMatrix::identity(1);
        const CMatrix out = assemble_channel(g, pr, h, ps, g);
        const cplx expected = pr.theta(0) * h.tt(0) * std::conj(ps.theta(0)) + pr.theta(0) * h.tp(0) * std::conj(ps.phi(0)) +
                              pr.phi(0) * h.pt(0) * std::conj(ps.theta(0)) + pr.phi(0) * h.pp(0) * std::conj(ps.phi(0));
        CHECK(std::abs(out(0, 0) - expected) < 1e-15);
    }

    SECTION("four-block expansion and efficiency scaling")
    {
        const Eigen::Index nr = 6, ns = 9, er = 5, es = 7;
        Harmonics pr{testing::random_cmatrix(rng, nr, er), testing::random_cmatrix(rng, nr, er)};
        Harmonics ps{testing::random_cmatrix(rng, ns, es), testing::random_cmatrix(rng, ns, es)};
        const auto h = apply_polarization(testing::random_cmatrix(rng, er, es), 8.0, 3.0, 3);
        const auto gr = EfficiencyMatrix::uniform(nr, 0.8), gs = EfficiencyMatrix::uniform(ns, 0.6);
        const CMatrix out = assemble_channel(gr, pr, h, ps, gs);
        const CMatrix expanded = 0.8 * 0.6 *
                                 (pr.theta * h.tt * ps.theta.adjoint() + pr.theta * h.tp * ps.phi.adjoint() +
                                  pr.phi * h.pt * ps.theta.adjoint() + pr.phi * h.pp * ps.phi.adjoint());
        CHECK(testing::rel_frobenius(out, expanded) < 1e-13);

        const auto gr2 = EfficiencyMatrix::uniform(nr, 0.4);
        const CMatrix half = assemble_channel(gr2, pr, h, ps, gs);
        CHECK(testing::rel_frobenius(half, 0.5 * out) < 1e-14);
        CHECK_THAT(half.squaredNorm(), WithinRel(0.25 * out.squaredNorm(), 1e-12));
    }

    SECTION("shape mismatch")
    {
        Harmonics pr{testing::random_cmatrix(rng, 3, 2), testing::random_cmatrix(rng, 3, 2)};
        Harmonics ps{testing::random_cmatrix(rng, 4, 3), testing::random_cmatrix(rng, 4, 3)};
        const auto h = apply_polarization(testing::random_cmatrix(rng, 2, 2), 8.0, 3.0, 3);
        CHECK_THROWS_AS(assemble_channel(EfficiencyMatrix::identity(3), pr, h, ps, EfficiencyMatrix::identity(4)),
                        shape_error);
    }

    SECTION("EfficiencyMatrix range")
    {
        CHECK_THROWS_AS(EfficiencyMatrix::uniform(3, 0.0), domain_error);
        CHECK_THROWS_AS(EfficiencyMatrix::uniform(3, 1.2), domain_error);
    }
}

TEST_CASE("DenselySpacedModel")
{
    const WaveContext ctx(4.7e9);
    const double lam = ctx.wavelength();
    DenselySpacedConfig cfg;
    cfg.rx = PlanarArray::uniform(lam, lam, lam / 4, lam / 4);
    cfg.tx = PlanarArray::uniform(2 * lam, 2 * lam, lam / 2, lam / 2);
    const auto model = build_model(cfg, ctx);

    SECTION("realizations are reproducible and shaped N_R x N_S")
    {
        const CMatrix a = model.realize(5), b = model.realize(5);
        CHECK(a == b);
        CHECK(a.rows() == 16);
        CHECK(a.cols() == 16);
        CHECK(a != model.realize(6));
    }

    SECTION("unit average element-pair gain in the ideal setting")
    {
        double acc = 0.0;
        const int n = 2000;
        for (int i = 0; i < n; ++i)
            acc += model.realize(derive_seed(1, "gain", i)).squaredNorm();
        const double per_pair = acc / n / (16.0 * 16.0);
        // every entry carries |F_theta|^2 + |F_phi|^2 = 2 from the co-polar paths plus the cross-polar share
        CHECK(per_pair > 1.0);
        CHECK(per_pair < 4.0);
    }

    SECTION("efficiency scales the mean energy by c^2")
    {
        auto scaled_cfg = cfg;
        scaled_cfg.efficiency_r = 0.8;
        const auto scaled = build_model(scaled_cfg, ctx);
        for (std::uint64_t seed : {1u, 2u, 3u})
            CHECK_THAT(scaled.realize(seed).squaredNorm(), WithinRel(0.64 * model.realize(seed).squaredNorm(), 1e-12));
    }
}
