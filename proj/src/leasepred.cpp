#include "tsim/leasepred.hpp"

#include <bit>
#include <string>

#include "tsim/errors.hpp"

namespace tsim {

bool is_encodable_lease(std::uint32_t lease) {
  return lease >= kMinLease && lease <= kMaxLease && std::has_single_bit(lease);
}

std::uint8_t encode_lease(std::uint32_t lease) {
  if (!is_encodable_lease(lease)) throw ConfigError("lease " + std::to_string(lease) + " is not in {8,16,32,64}");
  return static_cast<std::uint8_t>(std::countr_zero(lease) - std::countr_zero(kMinLease));
}

std::uint32_t decode_lease(std::uint8_t code) { return kMinLease << (code & 0x3u); }

std::uint32_t predict_lease(std::uint32_t& cur_lease, LeaseRequest type, std::uint32_t req_lease) {
  if (!is_encodable_lease(req_lease))
    throw ConfigError("request lease " + std::to_string(req_lease) + " is not in {8,16,32,64}");
  if (!is_encodable_lease(cur_lease)) cur_lease = kMinLease;

  if (type == LeaseRequest::Write) {
    cur_lease = kMinLease;
  } else if (type == LeaseRequest::Renew && req_lease == cur_lease && cur_lease < kMaxLease) {
    cur_lease *= 2;
  }
  return cur_lease;
}

}  // namespace tsim
