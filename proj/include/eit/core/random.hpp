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

#ifndef EIT_CORE_RANDOM_HPP
#define EIT_CORE_RANDOM_HPP

#include "eit/core/wave.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace eit
{
    using Rng = std::mt19937_64;

    // SplitMix64 finaliser, used to decorrelate derived seeds.
    constexpr std::uint64_t mix_seed(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    // FNV-1a, for turning study identifiers into seed salt
    constexpr std::uint64_t hash_label(std::string_view label)
    {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (char c : label)
        {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001B3ULL;
        }
        return h;
    }

    // Seed of realization `index` in study `study`:
    //   mix(mix(mix(master) ^ fnv1a(study)) ^ index)
    // A pure function of its arguments, so realizations can run in any order.
    constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view study, std::uint64_t index)
    {
        return mix_seed(mix_seed(mix_seed(master) ^ hash_label(study)) ^ index);
    }

    constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream)
    {
        return mix_seed(parent ^ mix_seed(stream + 0x632BE59BD9B4E019ULL));
    }

    // Circularly-symmetric complex normal sample with E|z|^2 = variance
    inline cplx sample_cn(Rng &rng, double variance = 1.0)
    {
        std::normal_distribution<double> n(0.0, 1.0);
        const double s = std::sqrt(variance / 2.0);
        const double re = n(rng);
        const double im = n(rng);
        return {s * re, s * im};
    }

    inline double sample_uniform(Rng &rng, double lo, double hi)
    {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }

    inline double sample_normal(Rng &rng, double mean, double stddev)
    {
        return std::normal_distribution<double>(mean, stddev)(rng);
    }
}

#endif
