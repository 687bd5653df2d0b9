#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace primscene {

using Bytes = std::vector<std::uint8_t>;

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t fnv1a64(std::string_view text);

std::string base64_encode(std::span<const std::uint8_t> bytes);
/// Throws ParseError on malformed input.
Bytes base64_decode(std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and renames into place.
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file(const std::filesystem::path& path, std::string_view text);

/// SHA-256 over every regular file under root (sorted relative paths + contents).
std::string hash_directory(const std::filesystem::path& root);

}  // namespace primscene
