#include "tsim/livelock.hpp"

#include <algorithm>

#include "tsim/errors.hpp"

namespace tsim {

LivelockDetector::LivelockDetector(const LivelockParams& params) : params_(params), thresh_count_(params.min_count) {
  if (params.ahb_entries == 0) throw ConfigError("ahb_entries must be positive");
  if (params.min_count == 0 || params.max_count < params.min_count)
    throw ConfigError("livelock thresholds need 0 < thresh_min <= thresh_max");
  if (params.check_thresh == 0) throw ConfigError("check_thresh must be positive");
  ahb_.reserve(params.ahb_entries);
}

bool LivelockDetector::on_shared_load(Addr addr) {
  auto it = std::find_if(ahb_.begin(), ahb_.end(), [addr](const AhbEntry& e) { return e.addr == addr; });
  if (it != ahb_.end()) {
    it->stamp = ++clock_;
    ++it->access_count;
    // >= rather than ==: the threshold can drop below a live count.
    if (it->access_count >= thresh_count_) {
      it->access_count = 0;
      return true;
    }
    return false;
  }

  if (ahb_.size() >= params_.ahb_entries) {
    auto lru = std::min_element(ahb_.begin(), ahb_.end(),
                                [](const AhbEntry& a, const AhbEntry& b) { return a.stamp < b.stamp; });
    ahb_.erase(lru);
  }
  ahb_.push_back(AhbEntry{addr, 0, ++clock_});
  return false;
}

void LivelockDetector::on_check_response(bool updated) {
  if (updated) {
    thresh_count_ = params_.min_count;
    check_count_ = 0;
    return;
  }
  ++check_count_;
  if (check_count_ == params_.check_thresh && thresh_count_ < params_.max_count) {
    thresh_count_ = std::min(thresh_count_ * 2, params_.max_count);
    check_count_ = 0;
  }
}

void LivelockDetector::reset_on_lts_advance() {
  for (auto& e : ahb_) e.access_count = 0;
}

void LivelockDetector::append_key(std::string& out) const {
  std::vector<const AhbEntry*> order;
  for (const auto& e : ahb_) order.push_back(&e);
  std::sort(order.begin(), order.end(), [](const AhbEntry* a, const AhbEntry* b) { return a->stamp < b->stamp; });
  for (const AhbEntry* e : order) out += std::to_string(e->addr) + '/' + std::to_string(e->access_count) + ',';
  out += 't' + std::to_string(thresh_count_) + 'c' + std::to_string(check_count_);
}

}  // namespace tsim
