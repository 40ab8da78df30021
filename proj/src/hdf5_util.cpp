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

#include "hdf5_util.hpp"

#include <cstring>

#include "delaynet/error.hpp"

namespace delaynet::h5 {
namespace {

[[noreturn]] void fail(const std::string& msg, ErrorKind kind = ErrorKind::kFormat) {
  throw Error(kind, msg);
}

// Object creation property list without modification times, so that equal
// content yields byte-identical files.
Handle untimed_ocpl(hid_t cls) {
  Handle plist(H5Pcreate(cls), H5Pclose);
  H5Pset_obj_track_times(plist.get(), false);
  return plist;
}

}  // namespace

Handle& Handle::operator=(Handle&& other) noexcept {
  if (this != &other) {
    reset();
    id_ = other.id_;
    closer_ = other.closer_;
    other.id_ = -1;
  }
  return *this;
}

void Handle::reset() {
  if (id_ >= 0 && closer_ != nullptr) closer_(id_);
  id_ = -1;
}

void quiet_errors() { H5Eset_auto2(H5E_DEFAULT, nullptr, nullptr); }

Handle create_file(const std::string& path) {
  quiet_errors();
  Handle fcpl(H5Pcreate(H5P_FILE_CREATE), H5Pclose);
  Handle fapl(H5Pcreate(H5P_FILE_ACCESS), H5Pclose);
  H5Pset_libver_bounds(fapl.get(), H5F_LIBVER_EARLIEST, H5F_LIBVER_V18);
  hid_t id = H5Fcreate(path.c_str(), H5F_ACC_TRUNC, fcpl.get(), fapl.get());
  if (id < 0) fail("cannot create file '" + path + "'", ErrorKind::kInternal);
  return {id, H5Fclose};
}

Handle open_file(const std::string& path) {
  quiet_errors();
  hid_t id = H5Fopen(path.c_str(), H5F_ACC_RDONLY, H5P_DEFAULT);
  if (id < 0) fail("cannot open '" + path + "' as HDF5 (missing or corrupt file)");
  return {id, H5Fclose};
}

Handle create_group(hid_t parent, const std::string& name) {
  Handle gcpl = untimed_ocpl(H5P_GROUP_CREATE);
  hid_t id = H5Gcreate2(parent, name.c_str(), H5P_DEFAULT, gcpl.get(), H5P_DEFAULT);
  if (id < 0) fail("cannot create group '" + name + "'", ErrorKind::kInternal);
  return {id, H5Gclose};
}

Handle open_group(hid_t parent, const std::string& name) {
  if (!exists(parent, name)) fail("missing group '" + name + "'");
  hid_t id = H5Gopen2(parent, name.c_str(), H5P_DEFAULT);
  if (id < 0) fail("cannot open group '" + name + "'");
  return {id, H5Gclose};
}

bool exists(hid_t parent, const std::string& path) {
  // Check each component so that intermediate groups do not raise errors.
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = path.find('/', pos);
    const std::string prefix = path.substr(0, next);
    if (!prefix.empty() && H5Lexists(parent, prefix.c_str(), H5P_DEFAULT) <= 0) return false;
    if (next == std::string::npos) return true;
    pos = next + 1;
  }
}

template <> hid_t native_type<std::int8_t>() { return H5T_NATIVE_INT8; }
template <> hid_t native_type<std::uint8_t>() { return H5T_NATIVE_UINT8; }
template <> hid_t native_type<std::int16_t>() { return H5T_NATIVE_INT16; }
template <> hid_t native_type<std::uint16_t>() { return H5T_NATIVE_UINT16; }
template <> hid_t native_type<std::int32_t>() { return H5T_NATIVE_INT32; }
template <> hid_t native_type<std::uint32_t>() { return H5T_NATIVE_UINT32; }
template <> hid_t native_type<std::int64_t>() { return H5T_NATIVE_INT64; }
template <> hid_t native_type<std::uint64_t>() { return H5T_NATIVE_UINT64; }
template <> hid_t native_type<float>() { return H5T_NATIVE_FLOAT; }
template <> hid_t native_type<double>() { return H5T_NATIVE_DOUBLE; }

template <typename T>
void write_attribute(hid_t obj, const std::string& name, T value) {
  Handle space(H5Screate(H5S_SCALAR), H5Sclose);
  Handle attr(H5Acreate2(obj, name.c_str(), native_type<T>(), space.get(), H5P_DEFAULT,
                         H5P_DEFAULT),
              H5Aclose);
  if (!attr.valid() || H5Awrite(attr.get(), native_type<T>(), &value) < 0) {
    fail("cannot write attribute '" + name + "'", ErrorKind::kInternal);
  }
}

bool has_attribute(hid_t obj, const std::string& name) {
  return H5Aexists(obj, name.c_str()) > 0;
}

template <typename T>
T read_attribute(hid_t obj, const std::string& name, const std::string& where) {
  if (!has_attribute(obj, name)) fail(where + ": missing attribute '" + name + "'");
  Handle attr(H5Aopen(obj, name.c_str(), H5P_DEFAULT), H5Aclose);
  Handle space(H5Aget_space(attr.get()), H5Sclose);
  if (H5Sget_simple_extent_npoints(space.get()) != 1) {
    fail(where + ": attribute '" + name + "' is not scalar");
  }
  T value{};
  if (H5Aread(attr.get(), native_type<T>(), &value) < 0) {
    fail(where + ": cannot read attribute '" + name + "'");
  }
  return value;
}

void write_string_attribute(hid_t obj, const std::string& name, const std::string& value) {
  Handle type(H5Tcopy(H5T_C_S1), H5Tclose);
  H5Tset_size(type.get(), value.empty() ? 1 : value.size());
  H5Tset_strpad(type.get(), H5T_STR_NULLPAD);
  Handle space(H5Screate(H5S_SCALAR), H5Sclose);
  Handle attr(H5Acreate2(obj, name.c_str(), type.get(), space.get(), H5P_DEFAULT, H5P_DEFAULT),
              H5Aclose);
  std::string buf = value.empty() ? std::string(1, '\0') : value;
  if (!attr.valid() || H5Awrite(attr.get(), type.get(), buf.data()) < 0) {
    fail("cannot write attribute '" + name + "'", ErrorKind::kInternal);
  }
}

std::string read_string_attribute(hid_t obj, const std::string& name, const std::string& where) {
  if (!has_attribute(obj, name)) fail(where + ": missing attribute '" + name + "'");
  Handle attr(H5Aopen(obj, name.c_str(), H5P_DEFAULT), H5Aclose);
  Handle type(H5Aget_type(attr.get()), H5Tclose);
  if (H5Tget_class(type.get()) != H5T_STRING || H5Tis_variable_str(type.get()) > 0) {
    fail(where + ": attribute '" + name + "' is not a fixed-length string");
  }
  const std::size_t size = H5Tget_size(type.get());
  std::string buf(size, '\0');
  if (H5Aread(attr.get(), type.get(), buf.data()) < 0) {
    fail(where + ": cannot read attribute '" + name + "'");
  }
  return std::string(buf.c_str());
}

template <typename T>
void write_dataset(hid_t parent, const std::string& name, const std::vector<T>& data,
                   std::vector<hsize_t> dims) {
  Handle space(H5Screate_simple(static_cast<int>(dims.size()), dims.data(), nullptr), H5Sclose);
  Handle dcpl = untimed_ocpl(H5P_DATASET_CREATE);
  Handle dset(H5Dcreate2(parent, name.c_str(), native_type<T>(), space.get(), H5P_DEFAULT,
                         dcpl.get(), H5P_DEFAULT),
              H5Dclose);
  if (!dset.valid()) fail("cannot create dataset '" + name + "'", ErrorKind::kInternal);
  if (!data.empty() &&
      H5Dwrite(dset.get(), native_type<T>(), H5S_ALL, H5S_ALL, H5P_DEFAULT, data.data()) < 0) {
    fail("cannot write dataset '" + name + "'", ErrorKind::kInternal);
  }
}

template <typename T>
std::vector<T> read_dataset(hid_t parent, const std::string& name, std::vector<hsize_t>& dims,
                            const std::string& where) {
  if (!exists(parent, name)) fail(where + ": missing dataset");
  Handle dset(H5Dopen2(parent, name.c_str(), H5P_DEFAULT), H5Dclose);
  if (!dset.valid()) fail(where + ": cannot open dataset");
  Handle space(H5Dget_space(dset.get()), H5Sclose);
  const int rank = H5Sget_simple_extent_ndims(space.get());
  if (rank < 0) fail(where + ": bad dataspace");
  dims.assign(static_cast<std::size_t>(rank), 0);
  H5Sget_simple_extent_dims(space.get(), dims.data(), nullptr);
  hsize_t total = 1;
  for (auto d : dims) total *= d;
  std::vector<T> data(total);
  if (total > 0 &&
      H5Dread(dset.get(), native_type<T>(), H5S_ALL, H5S_ALL, H5P_DEFAULT, data.data()) < 0) {
    fail(where + ": cannot read dataset (truncated or corrupt)");
  }
  return data;
}

template <typename T>
void write_vlen_dataset(hid_t parent, const std::string& name,
                        const std::vector<std::vector<T>>& rows) {
  Handle type(H5Tvlen_create(native_type<T>()), H5Tclose);
  hsize_t dims[1] = {rows.size()};
  Handle space(H5Screate_simple(1, dims, nullptr), H5Sclose);
  Handle dcpl = untimed_ocpl(H5P_DATASET_CREATE);
  Handle dset(H5Dcreate2(parent, name.c_str(), type.get(), space.get(), H5P_DEFAULT, dcpl.get(),
                         H5P_DEFAULT),
              H5Dclose);
  if (!dset.valid()) fail("cannot create dataset '" + name + "'", ErrorKind::kInternal);
  std::vector<hvl_t> buf(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    buf[k].len = rows[k].size();
    buf[k].p = const_cast<T*>(rows[k].data());
  }
  if (!rows.empty() &&
      H5Dwrite(dset.get(), type.get(), H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data()) < 0) {
    fail("cannot write dataset '" + name + "'", ErrorKind::kInternal);
  }
}

template <typename T>
std::vector<std::vector<T>> read_vlen_dataset(hid_t parent, const std::string& name,
                                              const std::string& where) {
  if (!exists(parent, name)) fail(where + ": missing dataset");
  Handle dset(H5Dopen2(parent, name.c_str(), H5P_DEFAULT), H5Dclose);
  if (!dset.valid()) fail(where + ": cannot open dataset");
  Handle space(H5Dget_space(dset.get()), H5Sclose);
  if (H5Sget_simple_extent_ndims(space.get()) != 1) fail(where + ": expected a 1-D dataset");
  hsize_t n = 0;
  H5Sget_simple_extent_dims(space.get(), &n, nullptr);
  Handle type(H5Tvlen_create(native_type<T>()), H5Tclose);
  std::vector<hvl_t> buf(n);
  if (n > 0 && H5Dread(dset.get(), type.get(), H5S_ALL, H5S_ALL, H5P_DEFAULT, buf.data()) < 0) {
    fail(where + ": cannot read variable-length dataset");
  }
  std::vector<std::vector<T>> rows(n);
  for (std::size_t k = 0; k < n; ++k) {
    const T* p = static_cast<const T*>(buf[k].p);
    rows[k].assign(p, p + buf[k].len);
  }
  if (n > 0) H5Dvlen_reclaim(type.get(), space.get(), H5P_DEFAULT, buf.data());
  return rows;
}

#define DELAYNET_H5_INSTANTIATE(T)                                                         \
  template void write_attribute<T>(hid_t, const std::string&, T);                          \
  template T read_attribute<T>(hid_t, const std::string&, const std::string&);             \
  template void write_dataset<T>(hid_t, const std::string&, const std::vector<T>&,         \
                                 std::vector<hsize_t>);                                    \
  template std::vector<T> read_dataset<T>(hid_t, const std::string&, std::vector<hsize_t>&, \
                                          const std::string&);                             \
  template void write_vlen_dataset<T>(hid_t, const std::string&,                           \
                                      const std::vector<std::vector<T>>&);                 \
  template std::vector<std::vector<T>> read_vlen_dataset<T>(hid_t, const std::string&,     \
                                                            const std::string&);

DELAYNET_H5_INSTANTIATE(std::int8_t)
DELAYNET_H5_INSTANTIATE(std::uint8_t)
DELAYNET_H5_INSTANTIATE(std::int16_t)
DELAYNET_H5_INSTANTIATE(std::uint16_t)
DELAYNET_H5_INSTANTIATE(std::int32_t)
DELAYNET_H5_INSTANTIATE(std::uint32_t)
DELAYNET_H5_INSTANTIATE(std::int64_t)
DELAYNET_H5_INSTANTIATE(std::uint64_t)
DELAYNET_H5_INSTANTIATE(float)
DELAYNET_H5_INSTANTIATE(double)

#undef DELAYNET_H5_INSTANTIATE

}  // namespace delaynet::h5
