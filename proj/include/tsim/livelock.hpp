#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsim/cachemem.hpp"

namespace tsim {

struct LivelockParams {
  std::uint32_t ahb_entries = 8;
  std::uint32_t min_count = 100;
  std::uint32_t max_count = 800;
  std::uint32_t check_thresh = 10;

  bool operator==(const LivelockParams&) const = default;
};

struct AhbEntry {
  Addr addr = 0;
  std::uint32_t access_count = 0;
  std::uint64_t stamp = 0;  // LRU

  bool operator==(const AhbEntry&) const = default;
};

/// Address History Buffer plus adaptive threshold counter. Sits beside one
/// core and decides when a shared-line load should also send a check.
class LivelockDetector {
 public:
  LivelockDetector() : LivelockDetector(LivelockParams{}) {}
  explicit LivelockDetector(const LivelockParams& params);

  /// Called for a load that hits an S-state line. True means: send a check.
  bool on_shared_load(Addr addr);

  void on_check_response(bool updated);

  /// The core's read timestamp advanced because of a memory access.
  void reset_on_lts_advance();

  std::uint32_t thresh_count() const { return thresh_count_; }
  std::uint32_t check_count() const { return check_count_; }
  const std::vector<AhbEntry>& entries() const { return ahb_; }
  const LivelockParams& params() const { return params_; }

  void append_key(std::string& out) const;

  bool operator==(const LivelockDetector&) const = default;

 private:
  LivelockParams params_;
  std::vector<AhbEntry> ahb_;
  std::uint32_t thresh_count_;
  std::uint32_t check_count_ = 0;
  std::uint64_t clock_ = 0;
};

}  // namespace tsim
