#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace handcontact::util {

// FNV-1a 64-bit. Used for config/template fingerprints in run manifests.
std::uint64_t fnv1a64(std::string_view data);
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::string hex_u64(std::uint64_t h);

std::string base64_encode(const std::uint8_t* data, std::size_t len);
std::string base64_encode(const std::string& data);
std::vector<std::uint8_t> base64_decode(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

// "$0.108" style: US dollars rounded to 3 decimals, half away from zero.
std::string format_usd(double amount);

// Fixed 3-decimal formatting for metric tables.
std::string format_fixed3(double v);

std::string to_lower(std::string s);

} // namespace handcontact::util
