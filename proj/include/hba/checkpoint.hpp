#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "hba/net.hpp"

namespace hba::checkpoint {

// Binary layout: "HBAF" magic, u32 format version, a length-prefixed
// canonical key=value config block, named flat f64 (little endian)
// arrays, then an FNV-1a 64-bit checksum of all preceding bytes.
inline constexpr std::uint32_t kFormatVersion = 1;

struct Contents {
  std::map<std::string, std::string> config;  // model plus run metadata
  std::map<std::string, Array> arrays;
};

void save(const std::string& path, const Contents& c);
Contents load(const std::string& path);

void save_model_params(const std::string& path,
                       std::map<std::string, std::string> config,
                       const ParamStore& params);

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n,
                      std::uint64_t seed = 14695981039346656037ull);

}  // namespace hba::checkpoint
