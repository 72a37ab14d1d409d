#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "racer/errors.hpp"
#include "racer/image.hpp"

namespace racer {

namespace detail {

inline std::uint32_t load_le32(const unsigned char* p) noexcept {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void store_le32(unsigned char* p, std::uint32_t v) noexcept {
  p[0] = static_cast<unsigned char>(v);
  p[1] = static_cast<unsigned char>(v >> 8);
  p[2] = static_cast<unsigned char>(v >> 16);
  p[3] = static_cast<unsigned char>(v >> 24);
}

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading '" + path.string() + "'");
  return bytes;
}

inline void write_file(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// MRC (MRC2014 subset: mode 2, little-endian)

inline constexpr std::size_t kMrcHeaderBytes = 1024;
inline constexpr std::int32_t kMrcModeFloat32 = 2;

struct MrcHeader {
  std::int32_t nx = 0;  // columns
  std::int32_t ny = 0;  // rows
  std::int32_t nz = 0;  // sections (particles)
  std::int32_t mode = kMrcModeFloat32;
  std::int32_t nsymbt = 0;
  float dmin = 0.0f;
  float dmax = 0.0f;
  float dmean = 0.0f;
  float rms = 0.0f;
  std::array<unsigned char, 4> machine_stamp{0x44, 0x44, 0x00, 0x00};
};

/// Slices of one extent, in file order. Values are held as doubles but were
/// read from (and are written as) 32-bit floats.
struct ParticleStack {
  std::vector<ImageGrid> slices;
  std::string source;

  std::size_t size() const noexcept { return slices.size(); }
  bool empty() const noexcept { return slices.empty(); }
};

inline MrcHeader parse_mrc_header(const unsigned char* h) {
  auto word = [&](int i) { return static_cast<std::int32_t>(detail::load_le32(h + 4 * i)); };
  auto fword = [&](int i) { return std::bit_cast<float>(detail::load_le32(h + 4 * i)); };
  if (std::memcmp(h + 208, "MAP", 3) != 0) throw ParseError("missing MRC map identifier 'MAP '", 208);
  MrcHeader hd;
  std::copy(h + 212, h + 216, hd.machine_stamp.begin());
  if (hd.machine_stamp[0] == 0x11) throw ParseError("big-endian MRC files are not supported", 212);
  hd.nx = word(0);
  hd.ny = word(1);
  hd.nz = word(2);
  hd.mode = word(3);
  hd.dmin = fword(19);
  hd.dmax = fword(20);
  hd.dmean = fword(21);
  hd.nsymbt = word(23);
  hd.rms = fword(54);
  if (hd.mode != kMrcModeFloat32) {
    throw UnsupportedFormatError("unsupported MRC mode " + std::to_string(hd.mode) + " (only mode 2 is read)",
                                 hd.mode);
  }
  if (hd.nx < 0 || hd.ny < 0 || hd.nz < 0) throw ParseError("negative MRC dimension", 0);
  if (hd.nsymbt < 0) throw ParseError("negative extended header size", 92);
  if (hd.nz > 0 && (hd.nx == 0 || hd.ny == 0)) throw ParseError("zero-sized MRC section", 0);
  return hd;
}

inline ParticleStack read_mrc(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < kMrcHeaderBytes) {
    throw CorruptFileError("'" + path.string() + "': truncated MRC header", kMrcHeaderBytes, bytes.size());
  }
  const MrcHeader hd = parse_mrc_header(bytes.data());
  const std::uint64_t section = static_cast<std::uint64_t>(hd.nx) * static_cast<std::uint64_t>(hd.ny);
  const std::uint64_t expected =
      kMrcHeaderBytes + static_cast<std::uint64_t>(hd.nsymbt) + section * static_cast<std::uint64_t>(hd.nz) * 4;
  if (bytes.size() < expected) {
    throw CorruptFileError("'" + path.string() + "': truncated MRC payload (expected " +
                               std::to_string(expected) + " bytes, found " + std::to_string(bytes.size()) + ")",
                           expected, bytes.size());
  }
  ParticleStack stack;
  stack.source = path.string();
  const unsigned char* p = bytes.data() + kMrcHeaderBytes + hd.nsymbt;
  for (std::int32_t z = 0; z < hd.nz; ++z) {
    ImageGrid img(hd.ny, hd.nx, 0.0);
    for (double& v : img.values()) {
      v = static_cast<double>(std::bit_cast<float>(detail::load_le32(p)));
      p += 4;
    }
    stack.slices.push_back(std::move(img));
  }
  return stack;
}

inline void write_mrc(const ParticleStack& stack, const std::filesystem::path& path) {
  std::int32_t nx = 0, ny = 0;
  if (!stack.empty()) {
    ny = stack.slices.front().height();
    nx = stack.slices.front().width();
  }
  for (const auto& s : stack.slices) {
    if (s.height() != ny || s.width() != nx) throw DomainError("stack slices must share one extent");
  }
  const auto nz = static_cast<std::int32_t>(stack.size());
  double lo = 0.0, hi = 0.0, sum = 0.0, sumsq = 0.0;
  std::size_t count = 0;
  bool first = true;
  for (const auto& s : stack.slices) {
    for (double v : s.values()) {
      const double f = static_cast<float>(v);
      if (first || f < lo) lo = f;
      if (first || f > hi) hi = f;
      first = false;
      sum += f;
      sumsq += f * f;
      ++count;
    }
  }
  const double mean = count ? sum / count : 0.0;
  const double rms = count ? std::sqrt(std::max(0.0, sumsq / count - mean * mean)) : 0.0;

  std::vector<unsigned char> out(kMrcHeaderBytes + static_cast<std::size_t>(nx) * ny * nz * 4, 0);
  unsigned char* h = out.data();
  auto put = [&](int i, std::int32_t v) { detail::store_le32(h + 4 * i, static_cast<std::uint32_t>(v)); };
  auto putf = [&](int i, float v) { detail::store_le32(h + 4 * i, std::bit_cast<std::uint32_t>(v)); };
  put(0, nx);
  put(1, ny);
  put(2, nz);
  put(3, kMrcModeFloat32);
  put(7, nx);  // mx
  put(8, ny);  // my
  put(9, 1);   // mz: image stack
  putf(10, static_cast<float>(nx));
  putf(11, static_cast<float>(ny));
  putf(12, 1.0f);
  putf(13, 90.0f);
  putf(14, 90.0f);
  putf(15, 90.0f);
  put(16, 1);
  put(17, 2);
  put(18, 3);
  putf(19, static_cast<float>(lo));
  putf(20, static_cast<float>(hi));
  putf(21, static_cast<float>(mean));
  put(22, 0);  // ispg: image stack
  put(23, 0);  // no extended header
  put(27, 20140);
  std::memcpy(h + 208, "MAP ", 4);
  h[212] = 0x44;
  h[213] = 0x44;
  putf(54, static_cast<float>(rms));
  unsigned char* p = out.data() + kMrcHeaderBytes;
  for (const auto& s : stack.slices) {
    for (double v : s.values()) {
      detail::store_le32(p, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
      p += 4;
    }
  }
  detail::write_file(path, out);
}

inline MrcHeader read_mrc_header(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() < kMrcHeaderBytes) {
    throw CorruptFileError("'" + path.string() + "': truncated MRC header", kMrcHeaderBytes, bytes.size());
  }
  return parse_mrc_header(bytes.data());
}

// ---------------------------------------------------------------------------
// PGM (binary P5)

inline ImageGrid parse_pgm(const std::vector<unsigned char>& bytes) {
  std::size_t pos = 0;
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("not a PGM file", 0);
  if (bytes[1] == '2') throw ParseError("ASCII PGM (P2) is not supported; use binary P5", 1);
  if (bytes[1] != '5') throw ParseError("unsupported PNM variant", 1);
  pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&](const char* what) {
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ParseError(std::string("expected whitespace before ") + what, pos);
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw ParseError(std::string("expected ") + what, pos);
    long long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      if (v > 1'000'000'000) throw ParseError(std::string(what) + " too large", pos);
      ++pos;
    }
    return v;
  };
  const long long width = number("width");
  const long long height = number("height");
  const std::size_t maxval_pos = pos;
  const long long maxval = number("maxval");
  if (width < 1 || height < 1) throw ParseError("PGM extent must be positive", maxval_pos);
  if (maxval < 1 || maxval > 65535) throw ParseError("PGM maxval must be in [1, 65535]", maxval_pos);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw ParseError("expected whitespace after maxval", pos);
  ++pos;
  const std::size_t bps = maxval < 256 ? 1 : 2;
  const std::uint64_t expected = pos + static_cast<std::uint64_t>(width) * height * bps;
  if (bytes.size() < expected) {
    throw CorruptFileError("truncated PGM payload", expected, bytes.size());
  }
  ImageGrid img(static_cast<int>(height), static_cast<int>(width), 0.0);
  for (double& v : img.values()) {
    unsigned sample = bytes[pos++];
    if (bps == 2) sample = (sample << 8) | bytes[pos++];
    v = static_cast<double>(sample) / static_cast<double>(maxval);
  }
  return img;
}

inline ImageGrid read_pgm(const std::filesystem::path& path) { return parse_pgm(detail::read_file(path)); }

/// Values are clamped to [0, 1] and scaled to [0, maxval] with rounding.
inline void write_pgm(const ImageGrid& image, const std::filesystem::path& path, int maxval = 255) {
  if (maxval < 1 || maxval > 65535) throw ConfigError("PGM maxval must be in [1, 65535]");
  const std::string header =
      "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n" + std::to_string(maxval) + "\n";
  const std::size_t bps = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> out(header.begin(), header.end());
  out.reserve(out.size() + image.size() * bps);
  for (double v : image.values()) {
    const double c = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    const auto s = static_cast<unsigned>(std::lround(c * maxval));
    if (bps == 2) out.push_back(static_cast<unsigned char>(s >> 8));
    out.push_back(static_cast<unsigned char>(s & 0xff));
  }
  detail::write_file(path, out);
}

// ---------------------------------------------------------------------------

inline std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

/// Single image from a .pgm or a one-section .mrc/.mrcs file.
inline ImageGrid read_image(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".pgm") return read_pgm(path);
  if (ext == ".mrc" || ext == ".mrcs" || ext == ".map") {
    ParticleStack stack = read_mrc(path);
    if (stack.size() != 1) {
      throw ConfigError("'" + path.string() + "' holds " + std::to_string(stack.size()) +
                        " sections; use stack-center for stacks");
    }
    return std::move(stack.slices.front());
  }
  throw UnsupportedFormatError("unrecognized image extension '" + ext + "' (expected .pgm, .mrc or .mrcs)", -1);
}

// ---------------------------------------------------------------------------
// Centers CSV

struct CenterRecord {
  std::size_t particle_index = 0;
  /// Empty when the slice could not be centered.
  std::optional<PixelCoord> center;
  double cost_min = std::nan("");
  double e_max = std::nan("");
};

inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_centers(std::ostream& os, const std::vector<CenterRecord>& records, const std::string& backend,
                          int radius) {
  os << "particle_index,row,col,cost_min,e_max,backend,R\n";
  for (const auto& r : records) {
    os << r.particle_index << ',';
    if (r.center) {
      os << r.center->row << ',' << r.center->col << ',' << format_real(r.cost_min) << ',' << format_real(r.e_max);
    } else {
      os << "-1,-1,nan,nan";
    }
    os << ',' << backend << ',' << radius << '\n';
  }
}

inline void write_centers(const std::vector<CenterRecord>& records, const std::filesystem::path& path,
                          const std::string& backend, int radius) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_centers(out, records, backend, radius);
  out.flush();
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace racer
