#include "landau/io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include <openssl/evp.h>

#include "landau/error.hpp"

namespace landau::io {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const fs::path& path, std::string_view content) {
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + partial.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::io, "write failed for " + partial.string());
  }
  std::error_code ec;
  fs::rename(partial, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename " + partial.string() + ": " + ec.message());
}

namespace {

class Digest {
 public:
  Digest() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorKind::io, "SHA-256 initialisation failed");
    }
  }
  ~Digest() { EVP_MD_CTX_free(ctx_); }
  void update(const void* p, std::size_t n) { EVP_DigestUpdate(ctx_, p, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md.data(), &len);
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[md[i] >> 4];
      out += digits[md[i] & 15];
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256(std::string_view data) {
  Digest d;
  d.update(data.data(), data.size());
  return d.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  Digest d;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    d.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return d.hex();
}

DirectoryLock::DirectoryLock(const fs::path& dir) : lock_(dir / ".lock") {
  fs::create_directories(dir);
  const int fd = ::open(lock_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw Error(ErrorKind::io, "output directory " + dir.string() + " is in use by another run (" +
                                   lock_.string() + " exists)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(lock_, ec);
}

namespace {

constexpr char kMagic[8] = {'L', 'N', 'D', 'S', 'N', 'A', 'P', '1'};

template <class T>
void put(std::string& out, T v) {
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

template <class T>
T get(std::ifstream& in, const fs::path& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw Error(ErrorKind::io, "truncated snapshot " + path.string());
  }
  return v;
}

}  // namespace

void write_snapshot(const fs::path& path, const SpectralState& state) {
  std::string out(kMagic, sizeof kMagic);
  put<std::int64_t>(out, state.max_mode());
  put<std::int64_t>(out, state.max_eta_index());
  put<double>(out, state.d_eta());
  put<std::int64_t>(out, state.step());
  const auto d = state.data();
  out.reserve(out.size() + d.size() * 16);
  for (const cplx& z : d) {
    put<double>(out, z.real());
    put<double>(out, z.imag());
  }
  write_atomic(path, out);
}

SpectralState read_snapshot(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) {
    throw Error(ErrorKind::io, path.string() + " is not a snapshot");
  }
  const auto K = get<std::int64_t>(in, path);
  const auto J = get<std::int64_t>(in, path);
  const auto h = get<double>(in, path);
  const auto n = get<std::int64_t>(in, path);
  if (K < 0 || J < 0 || K > 1 << 20 || J > 1 << 30 || !(h > 0.0)) {
    throw Error(ErrorKind::io, "corrupt snapshot header in " + path.string());
  }
  SpectralState s(static_cast<int>(K), static_cast<int>(J), h, static_cast<long>(n));
  for (cplx& z : s.data()) {
    const double re = get<double>(in, path);
    const double im = get<double>(in, path);
    z = {re, im};
  }
  return s;
}

}  // namespace landau::io
