#include "tensorreg/tns_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "tensorreg/errors.hpp"

namespace tensorreg {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
  unsigned char buf[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) throw FormatError("truncated TNS1 stream");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

constexpr char kMagic[4] = {'T', 'N', 'S', '1'};
constexpr std::uint32_t kMaxOrder = 64;

}  // namespace

void write_tns(std::ostream& os, const DenseTensor& t) {
  os.write(kMagic, 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(t.order()));
  for (auto d : t.shape()) put_le<std::uint64_t>(os, d);
  for (double x : t.data()) put_le<double>(os, x);
  if (!os) throw IoError("failed writing TNS1 stream");
}

DenseTensor read_tns(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad TNS1 magic");
  const auto order = get_le<std::uint32_t>(is);
  if (order > kMaxOrder) throw FormatError("implausible tensor order " + std::to_string(order));
  Shape shape(order);
  std::uint64_t count = 1;
  for (auto& d : shape) {
    const auto e = get_le<std::uint64_t>(is);
    if (e == 0) throw FormatError("zero extent");
    if (count > (std::uint64_t{1} << 40) / e) throw FormatError("tensor too large");
    count *= e;
    d = static_cast<std::size_t>(e);
  }
  std::vector<double> data(static_cast<std::size_t>(count));
  for (auto& x : data) x = get_le<double>(is);
  if (is.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after tensor data");
  return DenseTensor(std::move(shape), std::move(data));
}

void write_tns_file(const std::string& path, const DenseTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_tns(os, t);
}

DenseTensor read_tns_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return read_tns(is);
}

}  // namespace tensorreg
