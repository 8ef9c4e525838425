#include "tids/serialize.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "tids/errors.hpp"

namespace tids {

namespace {

void put_u64_le(std::string& out, std::uint64_t bits) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
  }
}

constexpr double kMaxExactInt = 9007199254740992.0;  // 2^53

}  // namespace

void BinWriter::real(double v) { put_u64_le(buf_, std::bit_cast<std::uint64_t>(v)); }

void BinWriter::integer(std::int64_t v) {
  const double d = static_cast<double>(v);
  require(std::abs(d) <= kMaxExactInt, "integer too large for exact storage");
  real(d);
}

void BinWriter::uint64(std::uint64_t v) {
  integer(static_cast<std::int64_t>(v & 0xffffffffu));
  integer(static_cast<std::int64_t>(v >> 32));
}

void BinWriter::text(const std::string& s) {
  integer(static_cast<std::int64_t>(s.size()));
  buf_.append(s);
}

void BinWriter::vec(const Vector& v) {
  integer(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) real(v[i]);
}

void BinWriter::mat(const Matrix& m) {
  integer(m.rows());
  integer(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) real(m(r, c));
  }
}

void BinWriter::section(const std::string& payload) {
  put_u64_le(buf_, static_cast<std::uint64_t>(payload.size()));
  buf_.append(payload);
}

void BinReader::need(std::size_t n) {
  if (pos_ + n > buf_.size()) throw DataError("model file truncated");
}

double BinReader::real() {
  need(8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  return std::bit_cast<double>(bits);
}

std::int64_t BinReader::integer() {
  const double d = real();
  if (!(std::isfinite(d)) || d != std::floor(d) || std::abs(d) > kMaxExactInt) {
    throw DataError("model file holds a malformed integer field");
  }
  return static_cast<std::int64_t>(d);
}

std::uint64_t BinReader::uint64() {
  const std::uint64_t lo = static_cast<std::uint64_t>(integer());
  const std::uint64_t hi = static_cast<std::uint64_t>(integer());
  return lo | (hi << 32);
}

std::string BinReader::text() {
  const std::int64_t n = integer();
  if (n < 0) throw DataError("model file holds a negative string length");
  need(static_cast<std::size_t>(n));
  std::string out = buf_.substr(pos_, static_cast<std::size_t>(n));
  pos_ += static_cast<std::size_t>(n);
  return out;
}

Vector BinReader::vec() {
  const std::int64_t n = integer();
  if (n < 0) throw DataError("model file holds a negative vector length");
  Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = real();
  return v;
}

Matrix BinReader::mat() {
  const std::int64_t rows = integer();
  const std::int64_t cols = integer();
  if (rows < 0 || cols < 0) throw DataError("model file holds a negative matrix extent");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = real();
  }
  return m;
}

std::string BinReader::section() {
  need(8);
  std::uint64_t n = 0;
  for (int i = 0; i < 8; ++i) {
    n |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
  }
  pos_ += 8;
  need(static_cast<std::size_t>(n));
  std::string out = buf_.substr(pos_, static_cast<std::size_t>(n));
  pos_ += static_cast<std::size_t>(n);
  return out;
}

void write_file_bytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path);
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

}  // namespace tids
