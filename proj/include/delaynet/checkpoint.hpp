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

#include <iosfwd>
#include <span>
#include <string>

#include "delaynet/model.hpp"
#include "delaynet/train.hpp"

namespace delaynet {

// HDF5 checkpoint layout; see docs/checkpoint_format.md.
inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  Network net;
  TrainerState state;
  std::string config_yaml;  // resolved run configuration, may be empty
};

// Writes to `path`.tmp and renames, so readers never see a partial file.
// `zero_wallclock` stores the epoch timings as 0 (see write_metrics_csv).
void save_checkpoint(const std::string& path, const Network& net, const TrainerState& state,
                     const std::string& config_yaml = "", bool zero_wallclock = false);
Checkpoint load_checkpoint(const std::string& path);

// Metrics CSV: epoch,loss,reg_loss,train_acc,val_acc,mean_rate_hz,wallclock.
// With `zero_wallclock` the wallclock column is written as 0 so that
// deterministic runs produce identical files.
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, const EpochMetrics& m, bool zero_wallclock = false);
void write_metrics_csv(const std::string& path, std::span<const EpochMetrics> history,
                       bool zero_wallclock = false);

}  // namespace delaynet
