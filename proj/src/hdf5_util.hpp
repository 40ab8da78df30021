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

// Thin RAII layer over the HDF5 C API, shared by the dataset loader, the
// exchange format and checkpoints. Not part of the public interface.

#include <hdf5.h>

#include <cstdint>
#include <string>
#include <vector>

namespace delaynet::h5 {

class Handle {
 public:
  using Closer = herr_t (*)(hid_t);
  Handle() = default;
  Handle(hid_t id, Closer closer) : id_(id), closer_(closer) {}
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  Handle(Handle&& other) noexcept : id_(other.id_), closer_(other.closer_) { other.id_ = -1; }
  Handle& operator=(Handle&& other) noexcept;
  ~Handle() { reset(); }

  hid_t get() const { return id_; }
  bool valid() const { return id_ >= 0; }
  void reset();

 private:
  hid_t id_ = -1;
  Closer closer_ = nullptr;
};

// Silences the default HDF5 error stack printer for the process.
void quiet_errors();

Handle create_file(const std::string& path);
Handle open_file(const std::string& path);
Handle create_group(hid_t parent, const std::string& name);
Handle open_group(hid_t parent, const std::string& name);
bool exists(hid_t parent, const std::string& path);

template <typename T>
hid_t native_type();

template <typename T>
void write_attribute(hid_t obj, const std::string& name, T value);
template <typename T>
T read_attribute(hid_t obj, const std::string& name, const std::string& where);
bool has_attribute(hid_t obj, const std::string& name);

void write_string_attribute(hid_t obj, const std::string& name, const std::string& value);
std::string read_string_attribute(hid_t obj, const std::string& name, const std::string& where);

// 1-D or 2-D contiguous datasets.
template <typename T>
void write_dataset(hid_t parent, const std::string& name, const std::vector<T>& data,
                   std::vector<hsize_t> dims);
template <typename T>
std::vector<T> read_dataset(hid_t parent, const std::string& name, std::vector<hsize_t>& dims,
                            const std::string& where);

// Variable-length 1-D datasets (one ragged row per sample).
template <typename T>
void write_vlen_dataset(hid_t parent, const std::string& name,
                        const std::vector<std::vector<T>>& rows);
template <typename T>
std::vector<std::vector<T>> read_vlen_dataset(hid_t parent, const std::string& name,
                                              const std::string& where);

}  // namespace delaynet::h5
