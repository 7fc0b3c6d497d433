// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rilab {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

// Little-endian float32 packing independent of host byte order.
void append_f32_le(std::vector<std::uint8_t>& out, std::span<const float> values);
std::vector<float> read_f32_le(std::span<const std::uint8_t> bytes);

}  // namespace rilab
