#include "fpk/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace fpk {

namespace {

constexpr char kMagic[4] = {'F', 'P', 'K', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(char((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t bytes) {
    if (buf.size() - pos < bytes)
      raise(ErrorCode::TruncatedFile, "snapshot ends before the header and payload are complete");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(std::uint8_t(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t(std::uint8_t(buf[pos + i])) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(bits);
  }
};

}  // namespace

void save_snapshot(const DensityField& f, double t, const std::string& path) {
  std::string out;
  out.reserve(4 + 4 + 4 * f.grid.sizes.size() + 8 + 8 * f.values.size());
  out.append(kMagic, 4);
  put_u32(out, std::uint32_t(f.grid.n));
  for (int s : f.grid.sizes) put_u32(out, std::uint32_t(s));
  put_f64(out, t);
  for (double v : f.values) put_f64(out, v);

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) raise(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  os.write(out.data(), std::streamsize(out.size()));
  os.flush();
  if (!os) raise(ErrorCode::IoError, "short write to '" + path + "'");
}

std::pair<DensityField, double> load_snapshot(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) raise(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::string buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (is.bad()) raise(ErrorCode::IoError, "read failure on '" + path + "'");

  if (buf.size() < 4) raise(ErrorCode::BadMagic, "file too short to carry a snapshot header");
  if (buf.compare(0, 3, kMagic, 3) != 0)
    raise(ErrorCode::BadMagic, "not a snapshot file");
  if (buf[3] != kMagic[3])
    raise(ErrorCode::VersionMismatch,
          std::string("unsupported snapshot version '") + buf[3] + "'");

  Reader r{buf, 4};
  std::uint32_t n = r.u32();
  std::vector<int> sizes;
  std::size_t total = 1;
  constexpr std::size_t kMaxValues = std::size_t(1) << 40;
  for (std::uint32_t i = 0; i < n; ++i) {
    std::uint32_t s = r.u32();
    if (s == 0 || total > kMaxValues / s)
      raise(ErrorCode::TruncatedFile, "header describes more data than any file could hold");
    total *= s;
    sizes.push_back(int(s));
  }
  double t = r.f64();

  if (buf.size() - r.pos != 8 * total)
    raise(ErrorCode::TruncatedFile, "value payload does not match the header dimensions");

  DensityField f;
  f.grid = make_grid(int(n), sizes);
  f.values.resize(total);
  for (std::size_t i = 0; i < total; ++i) f.values[i] = r.f64();
  return {std::move(f), t};
}

}  // namespace fpk
