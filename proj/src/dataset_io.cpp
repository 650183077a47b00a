#include "sparselwe/dataset_io.hpp"

#include <array>
#include <cstring>
#include <vector>

#include "sparselwe/error.hpp"

namespace sparselwe {

namespace {

constexpr std::array<char, 4> kMagic{'L', 'W', 'E', 'D'};
constexpr std::streamoff kRowCountOffset = 4 + 2 + 4 + 8 + 4;

template <typename T>
void put_le(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw IoError("LWED: truncated file " + path.string());
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

LwedWriter::LwedWriter(const std::filesystem::path& path, std::size_t n, std::uint64_t q,
                       std::optional<std::size_t> c)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), n_(n), q_(q) {
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  if (n == 0 || n > 0xffffffffULL) throw ParameterError("LWED: n out of range");
  if (c && *c > n) throw ParameterError("LWED: c exceeds n");
  out_.write(kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(out_, kLwedVersion);
  put_le<std::uint32_t>(out_, static_cast<std::uint32_t>(n));
  put_le<std::uint64_t>(out_, q);
  put_le<std::uint32_t>(out_, static_cast<std::uint32_t>(c.value_or(0)));
  put_le<std::uint64_t>(out_, 0);
}

LwedWriter::~LwedWriter() {
  try {
    close();
  } catch (...) {
  }
}

void LwedWriter::write_row(std::span<const Zq> a, Zq b) {
  if (closed_) throw IoError("LWED: write after close");
  if (a.size() != n_) throw DimensionError("LWED: row length differs from n");
  for (Zq v : a) {
    if (v >= q_) throw ParameterError("LWED: coordinate outside [0, q)");
    put_le<std::uint64_t>(out_, v);
  }
  if (b >= q_) throw ParameterError("LWED: b outside [0, q)");
  put_le<std::uint64_t>(out_, b);
  ++rows_;
}

void LwedWriter::close() {
  if (closed_) return;
  closed_ = true;
  out_.seekp(kRowCountOffset);
  put_le<std::uint64_t>(out_, rows_);
  out_.close();
  if (!out_) throw IoError("LWED: write failed for " + path_.string());
}

LwedReader::LwedReader(const std::filesystem::path& path)
    : in_(path, std::ios::binary), path_(path) {
  if (!in_) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  in_.read(magic.data(), magic.size());
  if (!in_ || magic != kMagic) throw IoError("not an LWED file: " + path.string());
  const auto version = get_le<std::uint16_t>(in_, path_);
  if (version != kLwedVersion) {
    throw IoError("LWED: unsupported version " + std::to_string(version));
  }
  header_.n = get_le<std::uint32_t>(in_, path_);
  header_.q = get_le<std::uint64_t>(in_, path_);
  const auto c = get_le<std::uint32_t>(in_, path_);
  header_.rows = get_le<std::uint64_t>(in_, path_);
  if (header_.n == 0 || header_.q < 2 || header_.q > kMaxModulus) {
    throw IoError("LWED: invalid header in " + path.string());
  }
  if (c > header_.n) throw IoError("LWED: c exceeds n in " + path.string());
  if (c != 0) header_.c = c;
}

bool LwedReader::next(std::span<Zq> a, Zq& b) {
  if (a.size() != header_.n) throw DimensionError("LWED: row buffer length differs from n");
  if (read_ == header_.rows) return false;
  for (auto& v : a) {
    v = get_le<std::uint64_t>(in_, path_);
    if (v >= header_.q) throw IoError("LWED: coordinate outside [0, q)");
  }
  b = get_le<std::uint64_t>(in_, path_);
  if (b >= header_.q) throw IoError("LWED: b outside [0, q)");
  ++read_;
  return true;
}

void write_lwed(const std::filesystem::path& path, const SampleSet& samples) {
  LwedWriter w(path, samples.n(), samples.q(), samples.c_hint());
  for (std::size_t i = 0; i < samples.size(); ++i) w.write_row(samples.a(i), samples.b(i));
  w.close();
}

LwedHeader read_lwed_header(const std::filesystem::path& path) {
  return LwedReader(path).header();
}

SampleSet read_lwed(const std::filesystem::path& path, std::optional<std::size_t> max_rows) {
  LwedReader r(path);
  const auto& h = r.header();
  // Keep the default error width unless it is invalid for a tiny modulus.
  const double sigma = std::min(3.0, static_cast<double>(h.q) / 32.0);
  SampleSet out(LweParams(h.n, h.q, sigma), h.c);
  const std::size_t want =
      max_rows ? std::min<std::uint64_t>(*max_rows, h.rows) : static_cast<std::size_t>(h.rows);
  out.reserve(want);
  std::vector<Zq> a(h.n);
  Zq b = 0;
  for (std::size_t i = 0; i < want && r.next(a, b); ++i) out.push_back(a, b);
  return out;
}

}  // namespace sparselwe
