#pragma once

#include <cstdint>

namespace tsim {

enum class LeaseRequest : std::uint8_t { Write, Read, Renew };

/// The four encodable lease values and their 2-bit codes.
inline constexpr std::uint32_t kMinLease = 8;
inline constexpr std::uint32_t kMaxLease = 64;

bool is_encodable_lease(std::uint32_t lease);
std::uint8_t encode_lease(std::uint32_t lease);  // throws ConfigError if not encodable
std::uint32_t decode_lease(std::uint8_t code);

/// Per-line dynamic lease: writes reset to the minimum, renewals that echo
/// the current lease double it up to the maximum.
std::uint32_t predict_lease(std::uint32_t& cur_lease, LeaseRequest type, std::uint32_t req_lease);

}  // namespace tsim
