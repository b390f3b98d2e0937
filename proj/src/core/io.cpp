#include "core/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace segopt {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  fail(ErrorCode::Io, path + ": " + what);
}

// Reads one whitespace-separated PNM header token, skipping '#' comments.
std::string next_token(std::istream& in) {
  std::string token;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token;
}

int parse_dim(const std::string& token, const std::string& path) {
  if (token.empty()) io_fail(path, "malformed header (missing field)");
  std::size_t pos = 0;
  long value = 0;
  try {
    value = std::stol(token, &pos);
  } catch (const std::exception&) {
    io_fail(path, "malformed header (bad integer '" + token + "')");
  }
  if (pos != token.size() || value <= 0 || value > 1 << 24) {
    io_fail(path, "malformed header (bad integer '" + token + "')");
  }
  return static_cast<int>(value);
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32_le(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) io_fail(path, "truncated payload");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

double get_f64_le(std::istream& in, const std::string& path) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) io_fail(path, "truncated payload");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

Image load_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  const std::string magic = next_token(in);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    io_fail(path, "malformed header (expected P5 or P6, got '" + magic + "')");
  }
  const int width = parse_dim(next_token(in), path);
  const int height = parse_dim(next_token(in), path);
  const int maxval = parse_dim(next_token(in), path);
  if (maxval != 255) io_fail(path, "unsupported maxval (must be 255)");

  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  std::vector<unsigned char> bytes(n);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) io_fail(path, "truncated payload");

  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = static_cast<double>(bytes[i]);
  return Image::from_data(width, height, channels, std::move(data));
}

void save_image(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << (img.channels() == 1 ? "P5" : "P6") << "\n"
      << img.width() << " " << img.height() << "\n255\n";
  const auto data = img.data();
  std::vector<unsigned char> bytes(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    bytes[i] = static_cast<unsigned char>(
        std::clamp(std::lround(data[i]), 0L, 255L));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) io_fail(path, "write failed");
}

Labeling load_mask(const std::string& path) {
  const Image img = load_image(path);
  require(img.channels() == 1, ErrorCode::Io,
          path + ": mask must be a single-channel PGM");
  Labeling s(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (img.at(x, y) != 0.0) s.set(x, y, true);
    }
  }
  return s;
}

void save_mask(const Labeling& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out << "P5\n" << s.width() << " " << s.height() << "\n255\n";
  const auto mask = s.raw();
  std::vector<unsigned char> bytes(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) bytes[i] = mask[i] ? 255 : 0;
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) io_fail(path, "write failed");
}

ScalarField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail(path, "cannot open for reading");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SFLD", 4) != 0) {
    io_fail(path, "malformed header (bad magic)");
  }
  const std::uint32_t width = get_u32_le(in, path);
  const std::uint32_t height = get_u32_le(in, path);
  if (width == 0 || height == 0 || width > (1u << 24) || height > (1u << 24)) {
    io_fail(path, "malformed header (bad dimensions)");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = get_f64_le(in, path);
  return ScalarField::from_data(static_cast<int>(width),
                                static_cast<int>(height), std::move(values));
}

void save_field(const ScalarField& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) io_fail(path, "cannot open for writing");
  out.write("SFLD", 4);
  put_u32_le(out, static_cast<std::uint32_t>(f.width()));
  put_u32_le(out, static_cast<std::uint32_t>(f.height()));
  for (double v : f.data()) put_f64_le(out, v);
  if (!out) io_fail(path, "write failed");
}

Histogram load_histogram(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open for reading");
  int channels = -1, bins = -1, normalized = 0;
  std::string line;
  std::vector<std::pair<long, double>> entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      while (hs >> word) {
        if (word.rfind("channels=", 0) == 0) channels = std::stoi(word.substr(9));
        if (word.rfind("bins=", 0) == 0) bins = std::stoi(word.substr(5));
        if (word.rfind("normalized=", 0) == 0) normalized = std::stoi(word.substr(11));
      }
      continue;
    }
    std::istringstream ls(line);
    long index;
    double value;
    if (!(ls >> index >> value)) io_fail(path, "malformed histogram line: " + line);
    entries.emplace_back(index, value);
  }
  if (channels < 1 || bins < 1) {
    io_fail(path, "missing '# histogram channels=<c> bins=<k>' header");
  }
  Histogram h(channels, bins);
  for (const auto& [index, value] : entries) {
    if (index < 0 || index >= static_cast<long>(channels) * bins) {
      io_fail(path, "bin index out of range");
    }
    h.at(static_cast<int>(index / bins), static_cast<int>(index % bins)) = value;
  }
  if (normalized) h.normalize();
  return h;
}

void save_histogram(const Histogram& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) io_fail(path, "cannot open for writing");
  out << "# histogram channels=" << h.channels() << " bins=" << h.bins()
      << " normalized=" << (h.normalized() ? 1 : 0) << "\n";
  char buf[64];
  for (int c = 0; c < h.channels(); ++c) {
    for (int b = 0; b < h.bins(); ++b) {
      std::snprintf(buf, sizeof buf, "%.17g", h.at(c, b));
      out << (static_cast<long>(c) * h.bins() + b) << " " << buf << "\n";
    }
  }
  if (!out) io_fail(path, "write failed");
}

}  // namespace segopt
