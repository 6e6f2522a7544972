#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace unitloc {

// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
 public:
  Sha256();
  void update(const void* data, std::size_t len);
  void update(std::string_view s) { update(s.data(), s.size()); }
  // Finalizes and returns the lowercase hex digest; the object must not be
  // updated afterwards.
  std::string hex();

 private:
  void process_block(const std::uint8_t* block);
  std::uint32_t state_[8];
  std::uint8_t buffer_[64];
  std::uint64_t total_ = 0;
  std::size_t buffered_ = 0;
  bool finalized_ = false;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file_hex(const std::string& path);

// Canonical digest of a list of text items (item + '\n' each).
std::string sha256_items_hex(const std::vector<std::string>& items);

}  // namespace unitloc
