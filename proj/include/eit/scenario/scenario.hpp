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
#ifndef EIT_SCENARIO_SCENARIO_HPP
#define EIT_SCENARIO_SCENARIO_HPP

#include "eit/capacity/capacity.hpp"
#include "eit/core/error.hpp"
#include "eit/core/random.hpp"
#include "eit/io/results.hpp"
#include "eit/tripol/estimation.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace eit::scenario
{
    inline constexpr const char *library_version = "0.1.0";

    // Every problem found while loading a scenario, in file order
    class validation_error : public error
    {
    public:
        explicit validation_error(std::vector<std::string> issues)
            : error(join(issues)), issues_(std::move(issues))
        {
        }

        const std::vector<std::string> &issues() const { return issues_; }

    private:
        static std::string join(const std::vector<std::string> &issues)
        {
            std::string out = std::to_string(issues.size()) + " validation error(s)";
            for (const auto &i : issues)
                out += "\n  " + i;
            return out;
        }

        std::vector<std::string> issues_;
    };

    // A module error raised while running a study, prefixed with where it happened
    class study_error : public error
    {
    public:
        using error::error;
    };

    enum class StudyKind
    {
        densely_spaced,
        near_field,
        tri_pol,
        em_core_validation
    };

    inline const std::vector<std::pair<StudyKind, const char *>> &study_names()
    {
        static const std::vector<std::pair<StudyKind, const char *>> names{
            {StudyKind::densely_spaced, "densely-spaced"},
            {StudyKind::near_field, "near-field"},
            {StudyKind::tri_pol, "tri-pol"},
            {StudyKind::em_core_validation, "em-core-validation"}};
        return names;
    }

    inline const char *to_string(StudyKind k)
    {
        for (const auto &[kind, name] : study_names())
            if (kind == k)
                return name;
        return "?";
    }

    enum class Scheme
    {
        ideal,
        ni,
        ni_pd,
        proposed
    };

    inline const std::vector<std::pair<Scheme, const char *>> &scheme_names()
    {
        static const std::vector<std::pair<Scheme, const char *>> names{
            {Scheme::ideal, "ideal"}, {Scheme::ni, "ni"}, {Scheme::ni_pd, "ni+pd"}, {Scheme::proposed, "proposed"}};
        return names;
    }

    inline const char *to_string(Scheme s)
    {
        for (const auto &[kind, name] : scheme_names())
            if (kind == s)
                return name;
        return "?";
    }

    // One lobe of a custom angular power spectrum, angles in the array frame
    struct VmfLobe
    {
        double weight = 1.0;
        double theta_deg = 0.0;
        double phi_deg = 0.0;
        double concentration = 0.0;

        bool operator==(const VmfLobe &) const = default;
    };

    struct DenselySpacedParams
    {
        double frequency_hz = 4.7e9;
        std::int64_t realizations = 1000;
        double snr_db = 0.0;
        double rx_aperture_x_wavelengths = 1.0, rx_aperture_y_wavelengths = 1.0;
        double tx_aperture_x_wavelengths = 4.0, tx_aperture_y_wavelengths = 4.0;
        double tx_spacing_wavelengths = 0.5;
        std::vector<double> rx_spacings_wavelengths{0.5, 0.25, 0.125};
        std::vector<Scheme> schemes{Scheme::ideal, Scheme::ni, Scheme::ni_pd, Scheme::proposed};
        double proposed_efficiency = 0.8;
        double xpr_mean_db = 8.0, xpr_std_db = 3.0;
        std::string cluster_table; // empty: bundled CDL-B
        std::vector<VmfLobe> rx_mixture, tx_mixture; // replace the cluster-table spectrum when set
        double rx_normal_azimuth_deg = 180.0, tx_normal_azimuth_deg = 0.0;
        capacity::Allocation allocation = capacity::Allocation::equal_power;
        double quadrature_tolerance = 1e-10;

        bool operator==(const DenselySpacedParams &) const = default;
    };

    struct NearFieldParams
    {
        double frequency_hz = 6.7e9;
        double bs_width_m = 0.33, bs_height_m = 1.5;
        std::int64_t bs_columns = 8, bs_rows = 32;
        double bs_z_m = 25.0;
        std::int64_t ue_elements = 4;
        double ue_spacing_wavelengths = 0.5;
        double ue_z_m = 1.5;
        std::int64_t ue_count = 100;
        double min_distance_m = 35.0, max_distance_m = 500.0;
        double sector_half_width_deg = 60.0;
        double outdoor_fraction = 0.2; // outdoor UEs see the direct path
        double k_factor_db = 9.0;
        std::string cluster_table;
        double delay_spread_s = 100e-9, first_excess_delay_s = 20e-9;
        std::int64_t rays_per_cluster = 20;
        bool visibility = true;
        double visibility_a = 0.6, visibility_lambda = 0.1, visibility_b = 0.4, visibility_xi = 0.05,
               visibility_c = 10.0;
        double sweep_min_distance_m = 20.0, sweep_max_distance_m = 500.0;
        std::int64_t sweep_points = 40;
        std::int64_t phase_elements = 64;
        double phase_aperture_m = 1.4, phase_distance_m = 20.0;

        bool operator==(const NearFieldParams &) const = default;
    };

    struct TriPolParams
    {
        double frequency_hz = 6.7e9;
        std::int64_t cells = 3, ues_per_cell = 50;
        std::int64_t ue_rows = 2, ue_cols = 6, ue_pols = 3;
        double ue_third_gain_db = -10.0;
        std::int64_t bs_columns = 8, bs_rows = 16;
        double bs_width_m = 0.33, bs_height_m = 1.5, bs_z_m = 25.0, ue_z_m = 1.5;
        double bs_power_dbm = 39.64, ue_power_dbm = 23.0;
        double uplink_snr_db = 10.0; // downlink adds bs_power_dbm - ue_power_dbm
        double capacity_snr_db = 10.0;
        double min_distance_m = 35.0, max_distance_m = 300.0;
        double sector_half_width_deg = 60.0, facing_spread_deg = 60.0;
        tripol::GroupingRule grouping = tripol::GroupingRule::median;
        double grouping_threshold = 0.1;
        std::int64_t feedback_bits = 0;
        std::string cluster_table;
        double delay_spread_s = 100e-9, first_excess_delay_s = 20e-9;
        std::int64_t rays_per_cluster = 20;

        double downlink_snr_db() const { return uplink_snr_db + bs_power_dbm - ue_power_dbm; }

        bool operator==(const TriPolParams &) const = default;
    };

    struct RegionCase
    {
        double frequency_hz = 6.7e9;
        double aperture_m = 1.53;

        bool operator==(const RegionCase &) const = default;
    };

    struct EmCoreParams
    {
        double frequency_hz = 4.7e9;
        std::int64_t samples = 1000;
        double k0r_min = 0.1, k0r_max = 1e4;
        std::int64_t ports = 8;
        std::vector<RegionCase> apertures{{6.7e9, 1.53}, {15e9, 1.4}};
        std::vector<double> hannan_spacings_wavelengths{0.5, 0.25, 0.125};

        bool operator==(const EmCoreParams &) const = default;
    };

    struct OutputSpec
    {
        std::string dir = "results";
        io::Format format = io::Format::csv;

        bool operator==(const OutputSpec &) const = default;
    };

    // Where the file came from; relative data paths resolve against it. Not part of equality.
    struct SourceInfo
    {
        std::filesystem::path dir;

        bool operator==(const SourceInfo &) const { return true; }
    };

    struct Scenario
    {
        StudyKind study = StudyKind::densely_spaced;
        std::string name;
        std::uint64_t seed = 1;
        double scale = 1.0;
        std::int64_t threads = 1; // 0: all hardware threads; results do not depend on it
        OutputSpec output;
        DenselySpacedParams densely_spaced;
        NearFieldParams near_field;
        TriPolParams tri_pol;
        EmCoreParams em_core;
        SourceInfo source;

        bool operator==(const Scenario &) const = default;

        // Monte Carlo count after the scale factor, at least one
        std::int64_t scaled(std::int64_t count) const
        {
            return std::max<std::int64_t>(1, std::llround(static_cast<double>(count) * scale));
        }
    };

    namespace detail_scenario
    {
        struct Issues
        {
            std::vector<std::string> list;

            void add(const YAML::Node &at, const std::string &field, const std::string &msg)
            {
                std::string loc = at.IsDefined() && at.Mark().line >= 0
                                      ? "line " + std::to_string(at.Mark().line + 1) + ": "
                                      : std::string();
                list.push_back(loc + "field '" + field + "': " + msg);
            }
        };

        // Reads typed keys from one mapping, recording every problem instead of stopping
        class Reader
        {
        public:
            Reader(const YAML::Node &map, Issues &issues) : map_(map), issues_(issues) {}

            template <typename T>
            void get(const char *key, T &out)
            {
                seen_.insert(key);
                const YAML::Node n = map_[key];
                if (!n.IsDefined() || n.IsNull())
                    return;
                convert(n, prefix_ + key, out);
            }

            void check_unknown()
            {
                for (const auto &kv : map_)
                {
                    const auto key = kv.first.as<std::string>();
                    if (!seen_.count(key))
                        issues_.add(kv.first, prefix_ + key, "unknown key");
                }
            }

        private:
            template <typename T>
            bool scalar(const YAML::Node &n, const std::string &field, T &out, const char *what)
            {
                if (!n.IsScalar())
                {
                    issues_.add(n, field, std::string("expected ") + what);
                    return false;
                }
                try
                {
                    out = n.as<T>();
                    return true;
                }
                catch (const YAML::Exception &)
                {
                    issues_.add(n, field, std::string("expected ") + what + ", got '" + n.Scalar() + "'");
                    return false;
                }
            }

            void convert(const YAML::Node &n, const std::string &f, double &out)
            {
                double v = 0.0;
                if (scalar(n, f, v, "a number"))
                {
                    if (std::isfinite(v))
                        out = v;
                    else
                        issues_.add(n, f, "must be finite");
                }
            }
            void convert(const YAML::Node &n, const std::string &f, std::int64_t &out)
            {
                std::int64_t v = 0;
                if (scalar(n, f, v, "an integer"))
                    out = v;
            }
            void convert(const YAML::Node &n, const std::string &f, std::uint64_t &out)
            {
                std::uint64_t v = 0;
                if (scalar(n, f, v, "a non-negative integer"))
                    out = v;
            }
            void convert(const YAML::Node &n, const std::string &f, bool &out)
            {
                bool v = false;
                if (scalar(n, f, v, "true or false"))
                    out = v;
            }
            void convert(const YAML::Node &n, const std::string &f, std::string &out)
            {
                std::string v;
                if (scalar(n, f, v, "a string"))
                    out = v;
            }
            void convert(const YAML::Node &n, const std::string &f, std::vector<double> &out)
            {
                if (!n.IsSequence())
                {
                    issues_.add(n, f, "expected a list of numbers");
                    return;
                }
                std::vector<double> v;
                bool ok = true;
                for (std::size_t i = 0; i < n.size(); ++i)
                {
                    double x = 0.0;
                    ok = scalar(n[i], f + "[" + std::to_string(i) + "]", x, "a number") && ok;
                    v.push_back(x);
                }
                if (ok)
                    out = v;
            }
            template <typename E>
            bool enum_value(const YAML::Node &n, const std::string &f,
                            const std::vector<std::pair<E, const char *>> &names, E &out)
            {
                std::string s;
                if (!scalar(n, f, s, "a string"))
                    return false;
                std::string allowed;
                for (const auto &[e, name] : names)
                {
                    if (s == name)
                    {
                        out = e;
                        return true;
                    }
                    allowed += (allowed.empty() ? "" : ", ") + std::string(name);
                }
                issues_.add(n, f, "unknown value '" + s + "' (expected one of " + allowed + ")");
                return false;
            }
            void convert(const YAML::Node &n, const std::string &f, std::vector<Scheme> &out)
            {
                if (!n.IsSequence())
                {
                    issues_.add(n, f, "expected a list of scheme names");
                    return;
                }
                std::vector<Scheme> v;
                bool ok = true;
                for (std::size_t i = 0; i < n.size(); ++i)
                {
                    Scheme s{};
                    ok = enum_value(n[i], f + "[" + std::to_string(i) + "]", scheme_names(), s) && ok;
                    v.push_back(s);
                }
                if (ok)
                    out = v;
            }
            void convert(const YAML::Node &n, const std::string &f, capacity::Allocation &out)
            {
                static const std::vector<std::pair<capacity::Allocation, const char *>> names{
                    {capacity::Allocation::equal_power, "equal-power"},
                    {capacity::Allocation::water_filling, "water-filling"}};
                enum_value(n, f, names, out);
            }
            void convert(const YAML::Node &n, const std::string &f, tripol::GroupingRule &out)
            {
                static const std::vector<std::pair<tripol::GroupingRule, const char *>> names{
                    {tripol::GroupingRule::median, "median"}, {tripol::GroupingRule::threshold, "threshold"}};
                enum_value(n, f, names, out);
            }
            void convert(const YAML::Node &n, const std::string &f, io::Format &out)
            {
                static const std::vector<std::pair<io::Format, const char *>> names{{io::Format::csv, "csv"},
                                                                                    {io::Format::json, "json"}};
                enum_value(n, f, names, out);
            }
            void convert(const YAML::Node &n, const std::string &f, std::vector<VmfLobe> &out)
            {
                if (!n.IsSequence())
                {
                    issues_.add(n, f, "expected a list of {weight, theta_deg, phi_deg, concentration}");
                    return;
                }
                std::vector<VmfLobe> v;
                for (std::size_t i = 0; i < n.size(); ++i)
                {
                    const std::string fi = f + "[" + std::to_string(i) + "]";
                    if (!n[i].IsMap())
                    {
                        issues_.add(n[i], fi, "expected a mapping");
                        continue;
                    }
                    VmfLobe lobe;
                    Reader r(n[i], issues_);
                    r.prefix_ = fi + ".";
                    r.get("weight", lobe.weight);
                    r.get("theta_deg", lobe.theta_deg);
                    r.get("phi_deg", lobe.phi_deg);
                    r.get("concentration", lobe.concentration);
                    r.check_unknown();
                    v.push_back(lobe);
                }
                out = v;
            }
            void convert(const YAML::Node &n, const std::string &f, std::vector<RegionCase> &out)
            {
                if (!n.IsSequence())
                {
                    issues_.add(n, f, "expected a list of {frequency_hz, aperture_m}");
                    return;
                }
                std::vector<RegionCase> v;
                for (std::size_t i = 0; i < n.size(); ++i)
                {
                    const std::string fi = f + "[" + std::to_string(i) + "]";
                    if (!n[i].IsMap())
                    {
                        issues_.add(n[i], fi, "expected a mapping");
                        continue;
                    }
                    RegionCase c;
                    Reader r(n[i], issues_);
                    r.prefix_ = fi + ".";
                    r.get("frequency_hz", c.frequency_hz);
                    r.get("aperture_m", c.aperture_m);
                    r.check_unknown();
                    v.push_back(c);
                }
                out = v;
            }

            YAML::Node map_;
            Issues &issues_;
            std::set<std::string> seen_;
            std::string prefix_; // nested readers report fields as parent[i].key
        };

        // Field checks shared by the semantic validation
        struct Checker
        {
            Issues &issues;
            YAML::Node root;

            YAML::Node at(const char *key) const
            {
                const YAML::Node n = root.IsMap() ? root[key] : YAML::Node();
                return n.IsDefined() ? n : root;
            }

            void positive(const char *key, double v)
            {
                if (!(v > 0.0))
                    issues.add(at(key), key, "must be positive, got " + io::format_number(v));
            }
            void non_negative(const char *key, double v)
            {
                if (!(v >= 0.0))
                    issues.add(at(key), key, "must be >= 0, got " + io::format_number(v));
            }
            void count(const char *key, std::int64_t v, std::int64_t lo = 1)
            {
                if (v < lo)
                    issues.add(at(key), key, "must be >= " + std::to_string(lo) + ", got " + std::to_string(v));
            }
            void within(const char *key, double v, double lo, double hi)
            {
                if (!(v >= lo && v <= hi))
                    issues.add(at(key), key,
                               "must lie in [" + io::format_number(lo) + ", " + io::format_number(hi) + "], got " +
                                   io::format_number(v));
            }
            void ordered(const char *lo_key, double lo, const char *hi_key, double hi)
            {
                if (!(hi >= lo))
                    issues.add(at(hi_key), hi_key, std::string("must be >= ") + lo_key);
            }
            void file(const char *key, const std::string &path, const std::filesystem::path &base)
            {
                if (path.empty())
                    return;
                const auto p = resolve(path, base);
                if (!std::filesystem::is_regular_file(p))
                    issues.add(at(key), key, "file '" + p.string() + "' does not exist");
            }
            void mixture(const char *key, const std::vector<VmfLobe> &lobes)
            {
                if (!root.IsMap() || !root[key].IsDefined())
                    return;
                if (lobes.empty())
                {
                    issues.add(at(key), key, "mixture needs at least one lobe");
                    return;
                }
                double total = 0.0;
                for (std::size_t i = 0; i < lobes.size(); ++i)
                {
                    const auto f = std::string(key) + "[" + std::to_string(i) + "]";
                    if (!(lobes[i].weight >= 0.0))
                        issues.add(at(key), f + ".weight", "must be >= 0");
                    if (!(lobes[i].concentration >= 0.0))
                        issues.add(at(key), f + ".concentration", "must be >= 0");
                    if (!(lobes[i].theta_deg >= 0.0 && lobes[i].theta_deg <= 180.0))
                        issues.add(at(key), f + ".theta_deg", "must lie in [0, 180]");
                    total += lobes[i].weight;
                }
                if (std::abs(total - 1.0) > 1e-9)
                    issues.add(at(key), key, "mixture weights sum to " + io::format_number(total) + ", expected 1");
            }

            static std::filesystem::path resolve(const std::string &path, const std::filesystem::path &base)
            {
                const std::filesystem::path p(path);
                return p.is_absolute() || base.empty() ? p : base / p;
            }
        };
    }

    inline std::filesystem::path resolve_data_path(const Scenario &s, const std::string &path)
    {
        return detail_scenario::Checker::resolve(path, s.source.dir);
    }

    namespace detail_scenario
    {
        inline void read_densely(Reader &r, DenselySpacedParams &p)
        {
            r.get("frequency_hz", p.frequency_hz);
            r.get("realizations", p.realizations);
            r.get("snr_db", p.snr_db);
            r.get("rx_aperture_x_wavelengths", p.rx_aperture_x_wavelengths);
            r.get("rx_aperture_y_wavelengths", p.rx_aperture_y_wavelengths);
            r.get("tx_aperture_x_wavelengths", p.tx_aperture_x_wavelengths);
            r.get("tx_aperture_y_wavelengths", p.tx_aperture_y_wavelengths);
            r.get("tx_spacing_wavelengths", p.tx_spacing_wavelengths);
            r.get("rx_spacings_wavelengths", p.rx_spacings_wavelengths);
            r.get("schemes", p.schemes);
            r.get("proposed_efficiency", p.proposed_efficiency);
            r.get("xpr_mean_db", p.xpr_mean_db);
            r.get("xpr_std_db", p.xpr_std_db);
            r.get("cluster_table", p.cluster_table);
            r.get("rx_mixture", p.rx_mixture);
            r.get("tx_mixture", p.tx_mixture);
            r.get("rx_normal_azimuth_deg", p.rx_normal_azimuth_deg);
            r.get("tx_normal_azimuth_deg", p.tx_normal_azimuth_deg);
            r.get("allocation", p.allocation);
            r.get("quadrature_tolerance", p.quadrature_tolerance);
        }

        inline void check_densely(Checker &c, const DenselySpacedParams &p, const std::filesystem::path &base)
        {
            c.positive("frequency_hz", p.frequency_hz);
            c.count("realizations", p.realizations);
            c.positive("rx_aperture_x_wavelengths", p.rx_aperture_x_wavelengths);
            c.positive("rx_aperture_y_wavelengths", p.rx_aperture_y_wavelengths);
            c.positive("tx_aperture_x_wavelengths", p.tx_aperture_x_wavelengths);
            c.positive("tx_aperture_y_wavelengths", p.tx_aperture_y_wavelengths);
            c.positive("tx_spacing_wavelengths", p.tx_spacing_wavelengths);
            if (p.rx_spacings_wavelengths.empty())
                c.issues.add(c.at("rx_spacings_wavelengths"), "rx_spacings_wavelengths", "needs at least one spacing");
            for (std::size_t i = 0; i < p.rx_spacings_wavelengths.size(); ++i)
                if (!(p.rx_spacings_wavelengths[i] > 0.0))
                    c.issues.add(c.at("rx_spacings_wavelengths"),
                                 "rx_spacings_wavelengths[" + std::to_string(i) + "]",
                                 "spacing must be positive, got " + io::format_number(p.rx_spacings_wavelengths[i]));
            if (p.schemes.empty())
                c.issues.add(c.at("schemes"), "schemes", "needs at least one scheme");
            c.within("proposed_efficiency", p.proposed_efficiency, 0.0, 1.0);
            c.non_negative("xpr_std_db", p.xpr_std_db);
            c.positive("quadrature_tolerance", p.quadrature_tolerance);
            c.file("cluster_table", p.cluster_table, base);
            c.mixture("rx_mixture", p.rx_mixture);
            c.mixture("tx_mixture", p.tx_mixture);
        }

        inline void read_near(Reader &r, NearFieldParams &p)
        {
            r.get("frequency_hz", p.frequency_hz);
            r.get("bs_width_m", p.bs_width_m);
            r.get("bs_height_m", p.bs_height_m);
            r.get("bs_columns", p.bs_columns);
            r.get("bs_rows", p.bs_rows);
            r.get("bs_z_m", p.bs_z_m);
            r.get("ue_elements", p.ue_elements);
            r.get("ue_spacing_wavelengths", p.ue_spacing_wavelengths);
            r.get("ue_z_m", p.ue_z_m);
            r.get("ue_count", p.ue_count);
            r.get("min_distance_m", p.min_distance_m);
            r.get("max_distance_m", p.max_distance_m);
            r.get("sector_half_width_deg", p.sector_half_width_deg);
            r.get("outdoor_fraction", p.outdoor_fraction);
            r.get("k_factor_db", p.k_factor_db);
            r.get("cluster_table", p.cluster_table);
            r.get("delay_spread_s", p.delay_spread_s);
            r.get("first_excess_delay_s", p.first_excess_delay_s);
            r.get("rays_per_cluster", p.rays_per_cluster);
            r.get("visibility", p.visibility);
            r.get("visibility_a", p.visibility_a);
            r.get("visibility_lambda", p.visibility_lambda);
            r.get("visibility_b", p.visibility_b);
            r.get("visibility_xi", p.visibility_xi);
            r.get("visibility_c", p.visibility_c);
            r.get("sweep_min_distance_m", p.sweep_min_distance_m);
            r.get("sweep_max_distance_m", p.sweep_max_distance_m);
            r.get("sweep_points", p.sweep_points);
            r.get("phase_elements", p.phase_elements);
            r.get("phase_aperture_m", p.phase_aperture_m);
            r.get("phase_distance_m", p.phase_distance_m);
        }

        inline void check_near(Checker &c, const NearFieldParams &p, const std::filesystem::path &base)
        {
            c.positive("frequency_hz", p.frequency_hz);
            c.positive("bs_width_m", p.bs_width_m);
            c.positive("bs_height_m", p.bs_height_m);
            c.count("bs_columns", p.bs_columns, 2);
            c.count("bs_rows", p.bs_rows, 2);
            c.count("ue_elements", p.ue_elements);
            c.positive("ue_spacing_wavelengths", p.ue_spacing_wavelengths);
            c.count("ue_count", p.ue_count);
            c.positive("min_distance_m", p.min_distance_m);
            c.ordered("min_distance_m", p.min_distance_m, "max_distance_m", p.max_distance_m);
            c.within("sector_half_width_deg", p.sector_half_width_deg, 0.0, 90.0);
            c.within("outdoor_fraction", p.outdoor_fraction, 0.0, 1.0);
            c.file("cluster_table", p.cluster_table, base);
            c.non_negative("delay_spread_s", p.delay_spread_s);
            c.positive("first_excess_delay_s", p.first_excess_delay_s);
            c.count("rays_per_cluster", p.rays_per_cluster);
            if (p.rays_per_cluster > 20)
                c.issues.add(c.at("rays_per_cluster"), "rays_per_cluster", "must be <= 20");
            c.non_negative("visibility_a", p.visibility_a);
            c.positive("visibility_lambda", p.visibility_lambda);
            c.within("visibility_b", p.visibility_b, 0.0, 1.0);
            c.non_negative("visibility_xi", p.visibility_xi);
            c.positive("visibility_c", p.visibility_c);
            c.positive("sweep_min_distance_m", p.sweep_min_distance_m);
            c.ordered("sweep_min_distance_m", p.sweep_min_distance_m, "sweep_max_distance_m", p.sweep_max_distance_m);
            c.count("sweep_points", p.sweep_points, 2);
            c.count("phase_elements", p.phase_elements, 2);
            c.positive("phase_aperture_m", p.phase_aperture_m);
            c.positive("phase_distance_m", p.phase_distance_m);
        }

        inline void read_tripol(Reader &r, TriPolParams &p)
        {
            r.get("frequency_hz", p.frequency_hz);
            r.get("cells", p.cells);
            r.get("ues_per_cell", p.ues_per_cell);
            r.get("ue_rows", p.ue_rows);
            r.get("ue_cols", p.ue_cols);
            r.get("ue_pols", p.ue_pols);
            r.get("ue_third_gain_db", p.ue_third_gain_db);
            r.get("bs_columns", p.bs_columns);
            r.get("bs_rows", p.bs_rows);
            r.get("bs_width_m", p.bs_width_m);
            r.get("bs_height_m", p.bs_height_m);
            r.get("bs_z_m", p.bs_z_m);
            r.get("ue_z_m", p.ue_z_m);
            r.get("bs_power_dbm", p.bs_power_dbm);
            r.get("ue_power_dbm", p.ue_power_dbm);
            r.get("uplink_snr_db", p.uplink_snr_db);
            r.get("capacity_snr_db", p.capacity_snr_db);
            r.get("min_distance_m", p.min_distance_m);
            r.get("max_distance_m", p.max_distance_m);
            r.get("sector_half_width_deg", p.sector_half_width_deg);
            r.get("facing_spread_deg", p.facing_spread_deg);
            r.get("grouping", p.grouping);
            r.get("grouping_threshold", p.grouping_threshold);
            r.get("feedback_bits", p.feedback_bits);
            r.get("cluster_table", p.cluster_table);
            r.get("delay_spread_s", p.delay_spread_s);
            r.get("first_excess_delay_s", p.first_excess_delay_s);
            r.get("rays_per_cluster", p.rays_per_cluster);
        }

        inline void check_tripol(Checker &c, const TriPolParams &p, const std::filesystem::path &base)
        {
            c.positive("frequency_hz", p.frequency_hz);
            c.count("cells", p.cells);
            c.count("ues_per_cell", p.ues_per_cell);
            c.count("ue_rows", p.ue_rows);
            c.count("ue_cols", p.ue_cols);
            c.within("ue_pols", static_cast<double>(p.ue_pols), 1.0, 3.0);
            if (p.ue_pols >= 1 && (p.ue_rows * p.ue_cols) % p.ue_pols != 0)
                c.issues.add(c.at("ue_pols"), "ue_pols", "ue_rows * ue_cols must split evenly over the polarizations");
            c.count("bs_columns", p.bs_columns, 2);
            c.count("bs_rows", p.bs_rows, 2);
            c.positive("bs_width_m", p.bs_width_m);
            c.positive("bs_height_m", p.bs_height_m);
            c.positive("min_distance_m", p.min_distance_m);
            c.ordered("min_distance_m", p.min_distance_m, "max_distance_m", p.max_distance_m);
            c.within("sector_half_width_deg", p.sector_half_width_deg, 0.0, 90.0);
            c.within("facing_spread_deg", p.facing_spread_deg, 0.0, 180.0);
            c.within("grouping_threshold", p.grouping_threshold, 0.0, 1.0);
            c.count("feedback_bits", p.feedback_bits, 0);
            c.file("cluster_table", p.cluster_table, base);
            c.non_negative("delay_spread_s", p.delay_spread_s);
            c.positive("first_excess_delay_s", p.first_excess_delay_s);
            c.count("rays_per_cluster", p.rays_per_cluster);
            if (p.rays_per_cluster > 20)
                c.issues.add(c.at("rays_per_cluster"), "rays_per_cluster", "must be <= 20");
        }

        inline void read_em(Reader &r, EmCoreParams &p)
        {
            r.get("frequency_hz", p.frequency_hz);
            r.get("samples", p.samples);
            r.get("k0r_min", p.k0r_min);
            r.get("k0r_max", p.k0r_max);
            r.get("ports", p.ports);
            r.get("apertures", p.apertures);
            r.get("hannan_spacings_wavelengths", p.hannan_spacings_wavelengths);
        }

        inline void check_em(Checker &c, const EmCoreParams &p)
        {
            c.positive("frequency_hz", p.frequency_hz);
            c.count("samples", p.samples);
            c.positive("k0r_min", p.k0r_min);
            c.ordered("k0r_min", p.k0r_min, "k0r_max", p.k0r_max);
            c.count("ports", p.ports);
            for (std::size_t i = 0; i < p.apertures.size(); ++i)
            {
                const auto f = "apertures[" + std::to_string(i) + "]";
                if (!(p.apertures[i].frequency_hz > 0.0))
                    c.issues.add(c.at("apertures"), f + ".frequency_hz", "must be positive");
                if (!(p.apertures[i].aperture_m > 0.0))
                    c.issues.add(c.at("apertures"), f + ".aperture_m", "must be positive");
            }
            for (std::size_t i = 0; i < p.hannan_spacings_wavelengths.size(); ++i)
                if (!(p.hannan_spacings_wavelengths[i] > 0.0))
                    c.issues.add(c.at("hannan_spacings_wavelengths"),
                                 "hannan_spacings_wavelengths[" + std::to_string(i) + "]", "spacing must be positive");
        }
    }

    // Parses and validates scenario text; `source_dir` anchors relative data paths
    inline Scenario parse_scenario(const std::string &text, const std::filesystem::path &source_dir = {},
                                   const std::string &source = "<string>")
    {
        using namespace detail_scenario;
        YAML::Node root;
        try
        {
            root = YAML::Load(text);
        }
        catch (const YAML::ParserException &e)
        {
            throw validation_error({source + ":" + std::to_string(e.mark.line + 1) + ":" +
                                    std::to_string(e.mark.column + 1) + ": parse error: " + e.msg});
        }
        Issues issues;
        if (!root.IsMap())
        {
            issues.add(root, "<root>", "scenario must be a mapping of key: value pairs");
            throw validation_error(issues.list);
        }

        Scenario s;
        s.source.dir = source_dir;
        Reader r(root, issues);
        std::string study;
        r.get("study", study);
        bool known = false;
        for (const auto &[kind, name] : study_names())
            if (study == name)
                s.study = kind, known = true;
        if (!known)
        {
            std::string allowed;
            for (const auto &[kind, name] : study_names())
                allowed += (allowed.empty() ? "" : ", ") + std::string(name);
            issues.add(root["study"], "study",
                       study.empty() ? "missing (expected one of " + allowed + ")"
                                     : "unknown study '" + study + "' (expected one of " + allowed + ")");
        }
        r.get("name", s.name);
        r.get("seed", s.seed);
        r.get("scale", s.scale);
        r.get("threads", s.threads);
        r.get("output_dir", s.output.dir);
        r.get("output_format", s.output.format);

        Checker c{issues, root};
        c.positive("scale", s.scale);
        c.count("threads", s.threads, 0);
        if (known)
        {
            switch (s.study)
            {
            case StudyKind::densely_spaced:
                read_densely(r, s.densely_spaced);
                check_densely(c, s.densely_spaced, source_dir);
                break;
            case StudyKind::near_field:
                read_near(r, s.near_field);
                check_near(c, s.near_field, source_dir);
                break;
            case StudyKind::tri_pol:
                read_tripol(r, s.tri_pol);
                check_tripol(c, s.tri_pol, source_dir);
                break;
            case StudyKind::em_core_validation:
                read_em(r, s.em_core);
                check_em(c, s.em_core);
                break;
            }
            r.check_unknown();
        }
        if (!issues.list.empty())
        {
            for (auto &i : issues.list)
                i = source + ": " + i;
            throw validation_error(issues.list);
        }
        return s;
    }

    inline Scenario load_scenario(const std::filesystem::path &path)
    {
        std::ifstream in(path);
        if (!in)
            throw io_error("cannot read scenario file '" + path.string() + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_scenario(buf.str(), path.parent_path(), path.string());
    }

    namespace detail_scenario
    {
        class Writer
        {
        public:
            explicit Writer(YAML::Emitter &out) : out_(out) {}

            void put(const char *key, double v) { out_ << YAML::Key << key << YAML::Value << io::format_number(v); }
            void put(const char *key, std::int64_t v) { out_ << YAML::Key << key << YAML::Value << v; }
            void put(const char *key, std::uint64_t v) { out_ << YAML::Key << key << YAML::Value << v; }
            void put(const char *key, bool v) { out_ << YAML::Key << key << YAML::Value << v; }
            void put(const char *key, const std::string &v)
            {
                out_ << YAML::Key << key << YAML::Value << YAML::DoubleQuoted << v;
            }
            void put(const char *key, const char *v) { out_ << YAML::Key << key << YAML::Value << v; }
            void put(const char *key, const std::vector<double> &v)
            {
                out_ << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (double x : v)
                    out_ << io::format_number(x);
                out_ << YAML::EndSeq;
            }
            void put(const char *key, const std::vector<Scheme> &v)
            {
                out_ << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
                for (Scheme x : v)
                    out_ << to_string(x);
                out_ << YAML::EndSeq;
            }
            void put(const char *key, const std::vector<VmfLobe> &v)
            {
                out_ << YAML::Key << key << YAML::Value << YAML::BeginSeq;
                for (const auto &l : v)
                {
                    out_ << YAML::Flow << YAML::BeginMap;
                    put("weight", l.weight);
                    put("theta_deg", l.theta_deg);
                    put("phi_deg", l.phi_deg);
                    put("concentration", l.concentration);
                    out_ << YAML::EndMap;
                }
                out_ << YAML::EndSeq;
            }
            void put(const char *key, const std::vector<RegionCase> &v)
            {
                out_ << YAML::Key << key << YAML::Value << YAML::BeginSeq;
                for (const auto &c : v)
                {
                    out_ << YAML::Flow << YAML::BeginMap;
                    put("frequency_hz", c.frequency_hz);
                    put("aperture_m", c.aperture_m);
                    out_ << YAML::EndMap;
                }
                out_ << YAML::EndSeq;
            }

        private:
            YAML::Emitter &out_;
        };
    }

    // Every field, defaults included, so the text alone reproduces the run
    inline std::string serialize(const Scenario &s)
    {
        YAML::Emitter out;
        detail_scenario::Writer w(out);
        out << YAML::BeginMap;
        w.put("study", to_string(s.study));
        w.put("name", s.name);
        w.put("seed", s.seed);
        w.put("scale", s.scale);
        w.put("threads", s.threads);
        w.put("output_dir", s.output.dir);
        w.put("output_format", s.output.format == io::Format::csv ? "csv" : "json");
        switch (s.study)
        {
        case StudyKind::densely_spaced:
        {
            const auto &p = s.densely_spaced;
            w.put("frequency_hz", p.frequency_hz);
            w.put("realizations", p.realizations);
            w.put("snr_db", p.snr_db);
            w.put("rx_aperture_x_wavelengths", p.rx_aperture_x_wavelengths);
            w.put("rx_aperture_y_wavelengths", p.rx_aperture_y_wavelengths);
            w.put("tx_aperture_x_wavelengths", p.tx_aperture_x_wavelengths);
            w.put("tx_aperture_y_wavelengths", p.tx_aperture_y_wavelengths);
            w.put("tx_spacing_wavelengths", p.tx_spacing_wavelengths);
            w.put("rx_spacings_wavelengths", p.rx_spacings_wavelengths);
            w.put("schemes", p.schemes);
            w.put("proposed_efficiency", p.proposed_efficiency);
            w.put("xpr_mean_db", p.xpr_mean_db);
            w.put("xpr_std_db", p.xpr_std_db);
            w.put("cluster_table", p.cluster_table);
            if (!p.rx_mixture.empty())
                w.put("rx_mixture", p.rx_mixture);
            if (!p.tx_mixture.empty())
                w.put("tx_mixture", p.tx_mixture);
            w.put("rx_normal_azimuth_deg", p.rx_normal_azimuth_deg);
            w.put("tx_normal_azimuth_deg", p.tx_normal_azimuth_deg);
            w.put("allocation", capacity::to_string(p.allocation));
            w.put("quadrature_tolerance", p.quadrature_tolerance);
            break;
        }
        case StudyKind::near_field:
        {
            const auto &p = s.near_field;
            w.put("frequency_hz", p.frequency_hz);
            w.put("bs_width_m", p.bs_width_m);
            w.put("bs_height_m", p.bs_height_m);
            w.put("bs_columns", p.bs_columns);
            w.put("bs_rows", p.bs_rows);
            w.put("bs_z_m", p.bs_z_m);
            w.put("ue_elements", p.ue_elements);
            w.put("ue_spacing_wavelengths", p.ue_spacing_wavelengths);
            w.put("ue_z_m", p.ue_z_m);
            w.put("ue_count", p.ue_count);
            w.put("min_distance_m", p.min_distance_m);
            w.put("max_distance_m", p.max_distance_m);
            w.put("sector_half_width_deg", p.sector_half_width_deg);
            w.put("outdoor_fraction", p.outdoor_fraction);
            w.put("k_factor_db", p.k_factor_db);
            w.put("cluster_table", p.cluster_table);
            w.put("delay_spread_s", p.delay_spread_s);
            w.put("first_excess_delay_s", p.first_excess_delay_s);
            w.put("rays_per_cluster", p.rays_per_cluster);
            w.put("visibility", p.visibility);
            w.put("visibility_a", p.visibility_a);
            w.put("visibility_lambda", p.visibility_lambda);
            w.put("visibility_b", p.visibility_b);
            w.put("visibility_xi", p.visibility_xi);
            w.put("visibility_c", p.visibility_c);
            w.put("sweep_min_distance_m", p.sweep_min_distance_m);
            w.put("sweep_max_distance_m", p.sweep_max_distance_m);
            w.put("sweep_points", p.sweep_points);
            w.put("phase_elements", p.phase_elements);
            w.put("phase_aperture_m", p.phase_aperture_m);
            w.put("phase_distance_m", p.phase_distance_m);
            break;
        }
        case StudyKind::tri_pol:
        {
            const auto &p = s.tri_pol;
            w.put("frequency_hz", p.frequency_hz);
            w.put("cells", p.cells);
            w.put("ues_per_cell", p.ues_per_cell);
            w.put("ue_rows", p.ue_rows);
            w.put("ue_cols", p.ue_cols);
            w.put("ue_pols", p.ue_pols);
            w.put("ue_third_gain_db", p.ue_third_gain_db);
            w.put("bs_columns", p.bs_columns);
            w.put("bs_rows", p.bs_rows);
            w.put("bs_width_m", p.bs_width_m);
            w.put("bs_height_m", p.bs_height_m);
            w.put("bs_z_m", p.bs_z_m);
            w.put("ue_z_m", p.ue_z_m);
            w.put("bs_power_dbm", p.bs_power_dbm);
            w.put("ue_power_dbm", p.ue_power_dbm);
            w.put("uplink_snr_db", p.uplink_snr_db);
            w.put("capacity_snr_db", p.capacity_snr_db);
            w.put("min_distance_m", p.min_distance_m);
            w.put("max_distance_m", p.max_distance_m);
            w.put("sector_half_width_deg", p.sector_half_width_deg);
            w.put("facing_spread_deg", p.facing_spread_deg);
            w.put("grouping", p.grouping == tripol::GroupingRule::median ? "median" : "threshold");
            w.put("grouping_threshold", p.grouping_threshold);
            w.put("feedback_bits", p.feedback_bits);
            w.put("cluster_table", p.cluster_table);
            w.put("delay_spread_s", p.delay_spread_s);
            w.put("first_excess_delay_s", p.first_excess_delay_s);
            w.put("rays_per_cluster", p.rays_per_cluster);
            break;
        }
        case StudyKind::em_core_validation:
        {
            const auto &p = s.em_core;
            w.put("frequency_hz", p.frequency_hz);
            w.put("samples", p.samples);
            w.put("k0r_min", p.k0r_min);
            w.put("k0r_max", p.k0r_max);
            w.put("ports", p.ports);
            w.put("apertures", p.apertures);
            w.put("hannan_spacings_wavelengths", p.hannan_spacings_wavelengths);
            break;
        }
        }
        out << YAML::EndMap;
        return std::string(out.c_str()) + "\n";
    }

    // FNV-1a of the serialised scenario without its output settings, as 16 hex digits
    inline std::string scenario_hash(const Scenario &s)
    {
        Scenario copy = s;
        copy.output = OutputSpec{};
        copy.threads = 1;
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_label(serialize(copy))));
        return buf;
    }
}

#endif
