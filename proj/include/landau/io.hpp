#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "landau/spectral_state.hpp"

namespace landau::io {

/// Decimal with 17 significant digits.
std::string fmt(double x);

/// Writes `path.partial` and renames it over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

/// Lowercase hex SHA-256 of a file or a buffer.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256(std::string_view data);

/// Exclusive claim on an output directory through `<dir>/.lock`, created with
/// O_EXCL and removed on destruction. Throws Error(io) when already held.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path lock_;
};

/// Snapshot layout, little-endian:
///   char[8]  magic "LNDSNAP1"
///   int64    K
///   int64    J
///   float64  d_eta
///   int64    n (step index)
///   float64  (re, im) pairs, row-major over k = -K..K, j = -J..J
void write_snapshot(const std::filesystem::path& path, const SpectralState& state);
SpectralState read_snapshot(const std::filesystem::path& path);

}  // namespace landau::io
