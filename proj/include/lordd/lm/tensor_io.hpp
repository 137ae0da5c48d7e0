#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "lordd/types.hpp"

namespace lordd::lm {

// Tensor file layout (all little-endian):
//   bytes 0..3   magic "LRDT"
//   u32          rank (number of dims, 1 or 2)
//   u32 x rank   dims
//   f32 x prod(dims)  values, row-major
void write_tensor(const std::filesystem::path& path, const MatrixF& m);
MatrixF read_tensor(const std::filesystem::path& path);

// Flat "key=value" manifest, one entry per line, keys sorted on write.
using Manifest = std::map<std::string, std::string>;
void write_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& path);
const std::string& manifest_get(const Manifest& m, const std::string& key, const std::filesystem::path& where);

}  // namespace lordd::lm
