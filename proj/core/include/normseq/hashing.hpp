#pragma once

#include <cstdint>
#include <string_view>

namespace normseq {

// FNV-1a, used to fingerprint feature spaces and lexicons.
std::uint64_t fnv1a64(std::string_view bytes);

// CRC-32 (IEEE 802.3 polynomial), used as the checkpoint file checksum.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

}  // namespace normseq
