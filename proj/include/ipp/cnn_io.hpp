#pragma once

#include <filesystem>

#include "ipp/cnn.hpp"

namespace ipp {

// Weight file: magic "IPPW1", u16 version, u16 tensor count; per tensor
// u8 name length, name bytes, u8 ndim, u32 dims, little-endian float32
// payload.
void save_params(Cnn<float>& net, const std::filesystem::path& path);
void load_params(Cnn<float>& net, const std::filesystem::path& path);

}  // namespace ipp
