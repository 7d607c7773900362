// SPDX-License-Identifier: Apache-2.0
#ifndef COSFORMER_COSFORMER_HPP_
#define COSFORMER_COSFORMER_HPP_

#include "cosformer/backward.hpp"
#include "cosformer/dispatch.hpp"
#include "cosformer/feature_map.hpp"
#include "cosformer/gradcheck.hpp"
#include "cosformer/linear.hpp"
#include "cosformer/reference.hpp"
#include "cosformer/reweight.hpp"
#include "cosformer/types.hpp"

#endif  // COSFORMER_COSFORMER_HPP_
