#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace toricq {

/// 17 significant digits, "%.17g"; round-trips every IEEE-754 double and is
/// byte-stable across platforms.
std::string format_double(double v);

/// 64-bit FNV-1a digest rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

void write_text_file(const std::filesystem::path& path, std::string_view contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace toricq
