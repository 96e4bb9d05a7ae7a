#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

#include "ctrtab/net/control.hpp"

namespace ctrtab::train {

inline constexpr std::uint16_t checkpoint_version = 1;

// Layout: magic "CTRTAB\0", u16 version, u64 header length, JSON header,
// then every tensor as little-endian f64 in header order. Integers are
// little-endian.
void write_checkpoint(std::ostream& out, const net::ModelBundle& bundle);
void save_checkpoint(const net::ModelBundle& bundle, const std::filesystem::path& path);

// Throws FormatError on bad magic, version, fingerprint or truncation. When
// expected_fingerprint is set, the stored schema fingerprint must match it.
net::ModelBundle read_checkpoint(std::istream& in, std::optional<std::uint64_t> expected_fingerprint = {});
net::ModelBundle load_checkpoint(const std::filesystem::path& path,
                                 std::optional<std::uint64_t> expected_fingerprint = {});

std::string fingerprint_hex(std::uint64_t fp);

}  // namespace ctrtab::train
