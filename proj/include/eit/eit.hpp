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
// Umbrella header for the modelling library (no YAML/JSON front end).
#ifndef EIT_EIT_HPP
#define EIT_EIT_HPP

#include "eit/antenna/pattern.hpp"
#include "eit/capacity/capacity.hpp"
#include "eit/core/error.hpp"
#include "eit/core/parallel.hpp"
#include "eit/core/random.hpp"
#include "eit/core/wave.hpp"
#include "eit/em/channel.hpp"
#include "eit/em/green.hpp"
#include "eit/io/cluster_table.hpp"
#include "eit/nearfield/channel.hpp"
#include "eit/nearfield/geometry.hpp"
#include "eit/nearfield/rays.hpp"
#include "eit/numeric/gauss_legendre.hpp"
#include "eit/tripol/channel.hpp"
#include "eit/tripol/estimation.hpp"
#include "eit/wavenumber/cdl.hpp"
#include "eit/wavenumber/channel.hpp"
#include "eit/wavenumber/support.hpp"
#include "eit/wavenumber/variances.hpp"
#include "eit/wavenumber/vmf.hpp"

#endif
