#ifndef TIDS_SERIALIZE_HPP
#define TIDS_SERIALIZE_HPP

#include <cstdint>
#include <string>

#include "tids/dataset.hpp"

namespace tids {

// binary buffer builder; every number travels as a little-endian 64-bit real,
// which keeps integers exact up to 2^53
class BinWriter {
 public:
  void real(double v);
  void integer(std::int64_t v);
  void uint64(std::uint64_t v);  // stored as two 32-bit halves
  void text(const std::string& s);
  void vec(const Vector& v);
  void mat(const Matrix& m);
  void section(const std::string& payload);  // u64 LE byte length, then bytes
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class BinReader {
 public:
  explicit BinReader(std::string buf) : buf_(std::move(buf)) {}
  double real();
  std::int64_t integer();
  std::uint64_t uint64();
  std::string text();
  Vector vec();
  Matrix mat();
  std::string section();
  bool done() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n);
  std::string buf_;
  std::size_t pos_ = 0;
};

void write_file_bytes(const std::string& path, const std::string& bytes);
std::string read_file_bytes(const std::string& path);

}  // namespace tids

#endif
