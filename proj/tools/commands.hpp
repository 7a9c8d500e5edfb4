#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

namespace oslab::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
  std::string subcommand;
  std::filesystem::path config;
  std::filesystem::path out = "oslab-run";
  std::uint64_t seed = 0;
  int jobs = 1;
  double tolerance_scale = 1.0;
};

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand and writes its artifacts below opt.out. Returns
// kExitOk or kExitCheckFailed; ConfigError escapes for the caller to map
// to kExitUsage.
int run(const RunOptions& opt, std::ostream& log);

// 64-bit FNV-1a of a byte string, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace oslab::cli
