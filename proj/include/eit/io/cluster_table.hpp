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
#ifndef EIT_IO_CLUSTER_TABLE_HPP
#define EIT_IO_CLUSTER_TABLE_HPP

#include "eit/core/error.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace eit::io
{
    // One row of a cluster delay line; angles in degrees
    struct ClusterRow
    {
        double delay_norm = 0.0; // delay normalised to the delay spread
        double power_db = 0.0;
        double aod = 0.0, aoa = 0.0, zod = 90.0, zoa = 90.0;
    };

    // Cluster delay line with the per-cluster angular spreads (degrees) and XPR (dB)
    struct ClusterTable
    {
        std::vector<ClusterRow> rows;
        double c_asd = 0.0, c_asa = 0.0, c_zsd = 0.0, c_zsa = 0.0;
        double xpr_db = 0.0;

        // Cluster powers in linear scale, normalised to unit sum
        std::vector<double> linear_powers() const
        {
            std::vector<double> p;
            double total = 0.0;
            for (const auto &r : rows)
                total += p.emplace_back(std::pow(10.0, r.power_db / 10.0));
            for (auto &v : p)
                v /= total;
            return p;
        }
    };

    // Format:
    //   # comment
    //   spread c_asd=<deg> c_asa=<deg> c_zsd=<deg> c_zsa=<deg> xpr_db=<dB>
    //   <delay_norm> <power_db> <aod> <aoa> <zod> <zoa>     (one line per cluster)
    inline ClusterTable load_cluster_table(std::istream &in, const std::string &source = "<stream>")
    {
        ClusterTable table;
        bool have_spread = false;
        std::string line;
        std::size_t lineno = 0;
        auto fail = [&](const std::string &what) {
            throw io_error(source + ":" + std::to_string(lineno) + ": " + what);
        };
        while (std::getline(in, line))
        {
            ++lineno;
            if (const auto hash = line.find('#'); hash != std::string::npos)
                line.erase(hash);
            std::istringstream ss(line);
            std::string first;
            if (!(ss >> first))
                continue;
            if (first == "spread")
            {
                std::map<std::string, double *> keys{{"c_asd", &table.c_asd}, {"c_asa", &table.c_asa},
                                                     {"c_zsd", &table.c_zsd}, {"c_zsa", &table.c_zsa},
                                                     {"xpr_db", &table.xpr_db}};
                std::string kv;
                while (ss >> kv)
                {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos || !keys.count(kv.substr(0, eq)))
                        fail("bad spread entry '" + kv + "'");
                    try
                    {
                        std::size_t used = 0;
                        const std::string value = kv.substr(eq + 1);
                        *keys[kv.substr(0, eq)] = std::stod(value, &used);
                        if (used != value.size())
                            fail("bad number in '" + kv + "'");
                    }
                    catch (const std::logic_error &)
                    {
                        fail("bad number in '" + kv + "'");
                    }
                }
                have_spread = true;
                continue;
            }
            ClusterRow r;
            std::istringstream row(line);
            if (!(row >> r.delay_norm >> r.power_db >> r.aod >> r.aoa >> r.zod >> r.zoa))
                fail("expected 6 numeric columns");
            std::string extra;
            if (row >> extra)
                fail("unexpected trailing field '" + extra + "'");
            for (double v : {r.delay_norm, r.power_db, r.aod, r.aoa, r.zod, r.zoa})
                if (!std::isfinite(v))
                    fail("non-finite value");
            if (r.delay_norm < 0)
                fail("negative delay");
            if (r.zod < 0 || r.zod > 180 || r.zoa < 0 || r.zoa > 180)
                fail("zenith angle outside [0, 180] deg");
            if (std::abs(r.aod) > 360 || std::abs(r.aoa) > 360)
                fail("azimuth outside [-360, 360] deg");
            table.rows.push_back(r);
        }
        if (table.rows.empty())
            throw io_error(source + ": no cluster rows");
        if (!have_spread)
            throw io_error(source + ": missing 'spread' line");
        for (double c : {table.c_asd, table.c_asa, table.c_zsd, table.c_zsa})
            if (!(c >= 0.0))
                throw io_error(source + ": angular spreads must be non-negative");
        return table;
    }

    inline ClusterTable load_cluster_table(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw io_error("cannot open cluster table '" + path + "'");
        return load_cluster_table(in, path);
    }
}

#endif
