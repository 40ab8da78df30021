// Copyright 2026 The delaynet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "delaynet/quantize.hpp"

namespace delaynet {

// HDF5 exchange layout; see docs/exchange_format.md.
inline constexpr int kExchangeFormatVersion = 1;

struct ExportOptions {
  bool overwrite = false;
};

void export_model(const QuantizedModel& model, const std::string& path,
                  const ExportOptions& options = {});

// Re-validates every invariant; errors name the offending object path.
QuantizedModel import_model(const std::string& path);

}  // namespace delaynet
