#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hasm/memory.hpp"

namespace hasm {

inline constexpr std::uint32_t kBankVersion = 1;

// Layout (little-endian): 8-byte magic "HASMBNK\0", u32 version, u64 header
// length, UTF-8 JSON header, then M (D x K) and S_shift (N_J x K) as
// column-major f64.
void write_bank(std::ostream& out, const MemoryBank& bank);
MemoryBank read_bank(std::istream& in);

void save_bank(const std::filesystem::path& path, const MemoryBank& bank);

// With `expected`, a bank built for a different encoder is rejected with
// ErrorKind::config.
MemoryBank load_bank(const std::filesystem::path& path, const std::optional<EncoderConfig>& expected = std::nullopt);

void check_bank_compatible(const MemoryBank& bank, const EncoderConfig& expected);

}  // namespace hasm
