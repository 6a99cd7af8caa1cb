// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bp {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

/// Little-endian f64 array <-> base64.
std::string encode_doubles(std::span<const double> values);
std::vector<double> decode_doubles(std::string_view text);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

std::vector<std::string_view> split_csv_line(std::string_view line);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

inline constexpr std::string_view kToolkitVersion = "0.1.0";

}  // namespace bp
