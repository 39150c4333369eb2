#include "pcadv/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace pcadv::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'C', 'C', 'K'};

template <typename U>
void write_raw(std::ostream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename U>
U read_raw(std::istream& is, const char* what) {
  U v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw MalformedInput(std::string("checkpoint: truncated while reading ") + what);
  }
  return v;
}

}  // namespace

Checkpoint Checkpoint::section(const std::string& prefix) const {
  Checkpoint out;
  out.manifest = manifest;
  for (const auto& a : arrays) {
    if (a.name.rfind(prefix, 0) == 0) {
      NamedArray b = a;
      b.name = a.name.substr(prefix.size());
      out.arrays.push_back(std::move(b));
    }
  }
  return out;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  nlohmann::json manifest = checkpoint.manifest;
  manifest["format_version"] = kCheckpointVersion;
  nlohmann::json arrays = nlohmann::json::array();
  for (const auto& a : checkpoint.arrays) {
    if (std::size_t(a.rows * a.cols) != a.values.size()) {
      throw InvalidArgument("save_checkpoint: array " + a.name + " has a shape/length mismatch");
    }
    arrays.push_back({{"name", a.name}, {"shape", {a.rows, a.cols}}});
  }
  manifest["arrays"] = arrays;
  const std::string text = manifest.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InvalidArgument("save_checkpoint: cannot write " + path.string());
  os.write(kMagic, 4);
  write_raw(os, kCheckpointVersion);
  write_raw(os, std::uint64_t(text.size()));
  os.write(text.data(), std::streamsize(text.size()));
  for (const auto& a : checkpoint.arrays) {
    os.write(reinterpret_cast<const char*>(a.values.data()),
             std::streamsize(sizeof(float) * a.values.size()));
  }
  if (!os) throw InvalidArgument("save_checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("load_checkpoint: cannot open " + path.string());
  const auto file_size = std::filesystem::file_size(path);
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw MalformedInput("checkpoint: bad magic in " + path.string());
  }
  const auto version = read_raw<std::uint32_t>(is, "version");
  if (version != kCheckpointVersion) {
    throw MalformedInput("checkpoint: unsupported format version " + std::to_string(version));
  }
  const auto length = read_raw<std::uint64_t>(is, "manifest length");
  if (length > file_size) throw MalformedInput("checkpoint: manifest length exceeds file size");
  std::string text(length, '\0');
  if (!is.read(text.data(), std::streamsize(length))) {
    throw MalformedInput("checkpoint: truncated manifest");
  }

  Checkpoint out;
  try {
    out.manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("checkpoint: corrupt manifest: ") + e.what());
  }
  if (!out.manifest.is_object() || !out.manifest.contains("arrays") ||
      !out.manifest["arrays"].is_array() ||
      out.manifest.value("format_version", 0u) != kCheckpointVersion) {
    throw MalformedInput("checkpoint: manifest lacks an array table or version");
  }

  std::uint64_t expected = 4 + 4 + 8 + length;
  try {
    for (const auto& entry : out.manifest["arrays"]) {
      NamedArray a;
      a.name = entry.at("name").get<std::string>();
      const auto shape = entry.at("shape").get<std::vector<long long>>();
      if (shape.size() != 2 || shape[0] < 0 || shape[1] < 0) {
        throw MalformedInput("checkpoint: bad shape for " + a.name);
      }
      a.rows = Eigen::Index(shape[0]);
      a.cols = Eigen::Index(shape[1]);
      expected += sizeof(float) * std::uint64_t(a.rows * a.cols);
      out.arrays.push_back(std::move(a));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("checkpoint: corrupt array table: ") + e.what());
  }
  if (expected != file_size) {
    throw MalformedInput("checkpoint: file holds " + std::to_string(file_size) +
                         " bytes, manifest implies " + std::to_string(expected));
  }
  for (auto& a : out.arrays) {
    a.values.resize(std::size_t(a.rows * a.cols));
    if (!is.read(reinterpret_cast<char*>(a.values.data()),
                 std::streamsize(sizeof(float) * a.values.size()))) {
      throw MalformedInput("checkpoint: truncated data for " + a.name);
    }
  }
  out.manifest.erase("arrays");
  out.manifest.erase("format_version");
  return out;
}

}  // namespace pcadv::io
