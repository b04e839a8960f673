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

#ifndef EIT_CORE_ERROR_HPP
#define EIT_CORE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace eit
{
    // Base of every error thrown by the library
    class error : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class domain_error : public error
    {
    public:
        using error::error;
    };

    // Evaluation of a field kernel at R = 0
    class singularity_error : public domain_error
    {
    public:
        using domain_error::domain_error;
    };

    class shape_error : public error
    {
    public:
        using error::error;
    };

    // Quadrature or iteration did not reach the requested accuracy
    class numerical_error : public error
    {
    public:
        using error::error;
    };

    // Scatterer placement is impossible for the given delay and angles
    class infeasible_geometry_error : public domain_error
    {
    public:
        using domain_error::domain_error;
    };

    class io_error : public error
    {
    public:
        using error::error;
    };

    namespace detail
    {
        inline void require(bool condition, const std::string &message)
        {
            if (!condition)
                throw domain_error(message);
        }

        inline void require_positive(double value, const char *name)
        {
            if (!(value > 0.0))
                throw domain_error(std::string(name) + " must be positive, got " + std::to_string(value));
        }

        inline void require_shape(bool condition, const std::string &message)
        {
            if (!condition)
                throw shape_error(message);
        }
    }
}

#endif
