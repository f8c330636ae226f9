// SPDX-License-Identifier: Apache-2.0
#pragma once

// Disk cache for generated datasets, using the same LITM tensor container as
// model checkpoints.

#include <string>

#include "lit/data.hpp"

namespace lit::io {

void save_dataset(const data::Dataset& dataset, const std::string& path);
data::Dataset load_dataset(const std::string& path);

}  // namespace lit::io
