#include "lexsimp/binary_io.hpp"

#include <array>
#include <bit>

#include "lexsimp/error.hpp"

namespace lexsimp {

namespace {

template <typename T>
void put_le(std::ostream& out, T v) {
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  }
  out.write(buf.data(), buf.size());
}

}  // namespace

void BinaryWriter::magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }
void BinaryWriter::u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
void BinaryWriter::u32(std::uint32_t v) { put_le(out_, v); }
void BinaryWriter::u64(std::uint64_t v) { put_le(out_, v); }
void BinaryWriter::f64(double v) { put_le(out_, std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  out_.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void BinaryWriter::f64s(std::span<const double> values) {
  u64(values.size());
  for (double v : values) f64(v);
}

void BinaryReader::read_exact(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw Error(ErrorCode::kParse, what_ + ": truncated file");
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  read_exact(got.data(), got.size());
  if (got != tag) throw Error(ErrorCode::kParse, what_ + ": bad magic bytes");
}

std::uint8_t BinaryReader::u8() {
  char c = 0;
  read_exact(&c, 1);
  return static_cast<std::uint8_t>(c);
}

std::uint32_t BinaryReader::u32() {
  std::array<unsigned char, 4> b{};
  read_exact(reinterpret_cast<char*>(b.data()), b.size());
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t BinaryReader::u64() {
  std::array<unsigned char, 8> b{};
  read_exact(reinterpret_cast<char*>(b.data()), b.size());
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < b.size(); ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  if (n > (1u << 24)) throw Error(ErrorCode::kParse, what_ + ": implausible string length");
  std::string s(n, '\0');
  read_exact(s.data(), n);
  return s;
}

std::vector<double> BinaryReader::f64s() {
  const std::uint64_t n = u64();
  if (n > (std::uint64_t{1} << 32)) throw Error(ErrorCode::kParse, what_ + ": implausible array length");
  std::vector<double> v(n);
  for (auto& x : v) x = f64();
  return v;
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace lexsimp
