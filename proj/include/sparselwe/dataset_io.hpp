#pragma once

// LWED binary datasets.
//
// Layout, all little-endian:
//   "LWED" | u16 version (1) | u32 n | u64 q | u32 c (0 = unknown) | u64 rows
//   then per row: n u64 coordinates in [0, q), one u64 b.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>

#include "sparselwe/lwe.hpp"

namespace sparselwe {

inline constexpr std::uint16_t kLwedVersion = 1;

struct LwedHeader {
  std::size_t n = 0;
  std::uint64_t q = 0;
  std::optional<std::size_t> c;
  std::uint64_t rows = 0;
};

/// Streaming writer. The row count is patched into the header on close().
class LwedWriter {
 public:
  LwedWriter(const std::filesystem::path& path, std::size_t n, std::uint64_t q,
             std::optional<std::size_t> c);
  ~LwedWriter();
  LwedWriter(const LwedWriter&) = delete;
  LwedWriter& operator=(const LwedWriter&) = delete;

  void write_row(std::span<const Zq> a, Zq b);
  void close();
  [[nodiscard]] std::uint64_t rows() const noexcept { return rows_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::size_t n_;
  std::uint64_t q_;
  std::uint64_t rows_ = 0;
  bool closed_ = false;
};

/// Streaming reader; validates the header and every coordinate.
class LwedReader {
 public:
  explicit LwedReader(const std::filesystem::path& path);

  [[nodiscard]] const LwedHeader& header() const noexcept { return header_; }
  /// Reads the next row into a (length n); false at end of data.
  bool next(std::span<Zq> a, Zq& b);

 private:
  std::ifstream in_;
  std::filesystem::path path_;
  LwedHeader header_;
  std::uint64_t read_ = 0;
};

void write_lwed(const std::filesystem::path& path, const SampleSet& samples);
/// Loads at most max_rows rows (all when absent). sigma_err of the returned
/// params is the default, since the file does not carry it.
SampleSet read_lwed(const std::filesystem::path& path,
                    std::optional<std::size_t> max_rows = std::nullopt);
LwedHeader read_lwed_header(const std::filesystem::path& path);

}  // namespace sparselwe
