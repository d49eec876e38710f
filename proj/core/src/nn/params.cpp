#include "normseq/nn/params.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "normseq/errors.hpp"

namespace normseq::nn {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'Q', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("parameter container truncated");
  return v;
}

}  // namespace

void write_param_blocks(std::ostream& out, const std::vector<ParamRef>& blocks) {
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    write_pod(out, static_cast<std::uint32_t>(b.name.size()));
    out.write(b.name.data(), static_cast<std::streamsize>(b.name.size()));
    write_pod(out, static_cast<std::uint64_t>(b.rows));
    write_pod(out, static_cast<std::uint64_t>(b.cols));
  }
  // Payload in row-major order regardless of Eigen's column-major storage.
  for (const auto& b : blocks) {
    for (Eigen::Index r = 0; r < b.rows; ++r) {
      for (Eigen::Index c = 0; c < b.cols; ++c) {
        write_pod(out, b.value[c * b.rows + r]);
      }
    }
  }
}

void read_param_blocks(std::istream& in, const std::vector<ParamRef>& blocks) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw ValidationError("parameter container: bad magic");
  auto version = read_pod<std::uint32_t>(in);
  if (version != kVersion)
    throw ValidationError("parameter container: unsupported version " +
                          std::to_string(version));
  auto count = read_pod<std::uint32_t>(in);
  if (count != blocks.size())
    throw ValidationError("parameter container holds " + std::to_string(count) +
                          " blocks, model expects " + std::to_string(blocks.size()));
  for (const auto& b : blocks) {
    auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (!in) throw IoError("parameter container truncated");
    auto rows = read_pod<std::uint64_t>(in);
    auto cols = read_pod<std::uint64_t>(in);
    if (name != b.name || rows != static_cast<std::uint64_t>(b.rows) ||
        cols != static_cast<std::uint64_t>(b.cols)) {
      throw ValidationError("parameter block mismatch: stream has \"" + name + "\" [" +
                            std::to_string(rows) + "x" + std::to_string(cols) +
                            "], model expects \"" + b.name + "\" [" +
                            std::to_string(b.rows) + "x" + std::to_string(b.cols) + "]");
    }
  }
  for (const auto& b : blocks) {
    for (Eigen::Index r = 0; r < b.rows; ++r) {
      for (Eigen::Index c = 0; c < b.cols; ++c) {
        b.value[c * b.rows + r] = read_pod<double>(in);
      }
    }
  }
}

}  // namespace normseq::nn
