#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ergo/spectral.hpp"

namespace ergo::io {

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite.
std::string fmt(double v);

/// Minimal RFC-4180 style CSV writer. Fields containing separators or quotes
/// are quoted.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& fields);
  std::size_t columns() const noexcept { return columns_; }

 private:
  std::ostream& os_;
  std::size_t columns_;
};

std::vector<std::vector<std::string>> read_csv(std::istream& is);

/// Binary eigendecomposition cache with a versioned header. `key` identifies
/// the Hamiltonian and block; a cache file with another key or version is
/// ignored on load.
inline constexpr std::uint32_t kEdCacheVersion = 1;
void save_eigendecomposition(const std::filesystem::path& path, const EigenDecomposition& eig,
                             const std::string& key);
std::optional<EigenDecomposition> load_eigendecomposition(const std::filesystem::path& path,
                                                          const std::string& key);

/// Writes a file atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace ergo::io
