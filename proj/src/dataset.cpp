#include "pcadv/dataset.hpp"

#include "pcadv/geometry.hpp"

#include <Eigen/Geometry>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

namespace pcadv::data {
namespace {

static_assert(std::endian::native == std::endian::little,
              "packed dataset I/O assumes a little-endian host");

using Vec3 = Eigen::Vector3d;

Vec3 unit_sphere(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    Vec3 v(n(rng), n(rng), n(rng));
    const double len = v.norm();
    if (len > 1e-12) return v / len;
  }
}

Vec3 triangle_sample(const Vec3& a, const Vec3& b, const Vec3& c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = u(rng), t = u(rng);
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  return a + s * (b - a) + t * (c - a);
}

Vec3 sample_surface_point(ShapeKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  constexpr double pi = std::numbers::pi;
  switch (kind) {
    case ShapeKind::sphere:
      return 0.5 * unit_sphere(rng);
    case ShapeKind::cube: {
      const int face = int(u(rng) * 6.0) % 6;
      const double a = u(rng) - 0.5, b = u(rng) - 0.5;
      const double s = face % 2 == 0 ? 0.5 : -0.5;
      switch (face / 2) {
        case 0: return {s, a, b};
        case 1: return {a, s, b};
        default: return {a, b, s};
      }
    }
    case ShapeKind::cone: {
      // Apex at z = 0.5, base disk of radius 0.5 at z = -0.5.
      const double lateral = pi * 0.5 * std::sqrt(0.25 + 1.0);
      const double base = pi * 0.25;
      const double theta = 2.0 * pi * u(rng);
      if (u(rng) * (lateral + base) < lateral) {
        const double t = std::sqrt(u(rng));
        return {0.5 * t * std::cos(theta), 0.5 * t * std::sin(theta), 0.5 - t};
      }
      const double rho = 0.5 * std::sqrt(u(rng));
      return {rho * std::cos(theta), rho * std::sin(theta), -0.5};
    }
    case ShapeKind::plane:
      return {u(rng) - 0.5, u(rng) - 0.5, 0.0};
    case ShapeKind::cylinder: {
      const double lateral = 2.0 * pi * 0.5 * 1.0;
      const double caps = 2.0 * pi * 0.25;
      const double theta = 2.0 * pi * u(rng);
      if (u(rng) * (lateral + caps) < lateral) {
        return {0.5 * std::cos(theta), 0.5 * std::sin(theta), u(rng) - 0.5};
      }
      const double rho = 0.5 * std::sqrt(u(rng));
      return {rho * std::cos(theta), rho * std::sin(theta), u(rng) < 0.5 ? -0.5 : 0.5};
    }
    case ShapeKind::torus: {
      constexpr double R = 0.35, r = 0.15;
      for (;;) {
        const double theta = 2.0 * pi * u(rng);
        const double phi = 2.0 * pi * u(rng);
        // Area element is proportional to R + r cos(phi).
        if (u(rng) * (R + r) <= R + r * std::cos(phi)) {
          const double rho = R + r * std::cos(phi);
          return {rho * std::cos(theta), rho * std::sin(theta), r * std::sin(phi)};
        }
      }
    }
    case ShapeKind::pyramid: {
      const Vec3 apex(0, 0, 0.5);
      const std::array<Vec3, 4> base{Vec3(-0.5, -0.5, -0.5), Vec3(0.5, -0.5, -0.5),
                                     Vec3(0.5, 0.5, -0.5), Vec3(-0.5, 0.5, -0.5)};
      const double side = 0.5 * std::sqrt(1.0 + 0.25);  // one triangular face
      const double total = 4.0 * side + 1.0;
      const double pick = u(rng) * total;
      if (pick < 1.0) return {u(rng) - 0.5, u(rng) - 0.5, -0.5};
      const int f = std::min(3, int((pick - 1.0) / side));
      return triangle_sample(apex, base[f], base[(f + 1) % 4], rng);
    }
    case ShapeKind::ellipsoid: {
      const Vec3 d = unit_sphere(rng);
      return {0.5 * d.x(), 0.3 * d.y(), 0.2 * d.z()};
    }
  }
  throw InvalidArgument("sample_shape: unknown shape");
}

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& is, const char* what) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw MalformedInput(std::string("packed dataset: truncated while reading ") + what);
  }
  return v;
}

std::vector<std::string> default_class_names(int count) {
  std::vector<std::string> names;
  for (int i = 0; i < count; ++i) {
    names.push_back(i < kMaxToyClasses ? shape_name(ShapeKind(i)) : "class" + std::to_string(i));
  }
  return names;
}

void normalize_all(Dataset& ds) {
  for (auto& c : ds.clouds) c.points = geometry::normalize_unit_cube(c.points);
}

}  // namespace

std::string shape_name(ShapeKind kind) {
  static const char* names[] = {"sphere",   "cube",  "cone",    "plane",
                                "cylinder", "torus", "pyramid", "ellipsoid"};
  return names[int(kind)];
}

void Dataset::validate() const {
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    const auto& c = clouds[i];
    if (c.points.rows() != num_points || c.points.cols() != 3) {
      throw MalformedInput("dataset: cloud " + std::to_string(i) + " has " +
                           std::to_string(c.points.rows()) + " points, expected " +
                           std::to_string(num_points));
    }
    if (c.label < 0 || c.label >= num_classes()) {
      throw MalformedInput("dataset: cloud " + std::to_string(i) + " label " +
                           std::to_string(c.label) + " out of range");
    }
  }
}

Points<float> sample_shape(ShapeKind kind, int num_points, double jitter_sigma,
                           double jitter_clip, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, jitter_sigma > 0 ? jitter_sigma : 1.0);
  Points<float> out(num_points, 3);
  for (int i = 0; i < num_points; ++i) {
    const Vec3 p = sample_surface_point(kind, rng);
    for (int c = 0; c < 3; ++c) {
      double j = jitter_sigma > 0 ? noise(rng) : 0.0;
      j = std::clamp(j, -jitter_clip, jitter_clip);
      out(i, c) = float(p[c] + j);
    }
  }
  return out;
}

SplitDataset make_toy_dataset(const ToyConfig& config, std::uint64_t seed) {
  if (config.num_classes < 2 || config.num_classes > kMaxToyClasses) {
    throw InvalidArgument("make_toy_dataset: class count must be in 2..8, got " +
                          std::to_string(config.num_classes));
  }
  if (config.num_points < 64) {
    throw InvalidArgument("make_toy_dataset: need at least 64 points per cloud");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  auto make_split = [&](const std::string& split, int per_class) {
    Dataset ds;
    ds.split = split;
    ds.num_points = config.num_points;
    ds.class_names = default_class_names(config.num_classes);
    for (int i = 0; i < per_class * config.num_classes; ++i) {
      const int label = i % config.num_classes;
      Points<float> pts = sample_shape(ShapeKind(label), config.num_points,
                                       config.jitter_sigma, config.jitter_clip, rng);
      const double a = angle(rng);
      Eigen::Matrix3f rot = Eigen::AngleAxisf(float(a), Eigen::Vector3f::UnitZ()).toRotationMatrix();
      pts = (pts * rot.transpose()).eval();
      ds.clouds.push_back({geometry::normalize_unit_cube(pts), label});
    }
    return ds;
  };
  SplitDataset out;
  out.train = make_split("train", config.train_per_class);
  out.test = make_split("test", config.test_per_class);
  return out;
}

Format parse_format(const std::string& name) {
  if (name == "packed") return Format::packed;
  if (name == "ascii-dir" || name == "ascii_dir") return Format::ascii_dir;
  throw InvalidArgument("unknown dataset format '" + name + "' (expected packed or ascii-dir)");
}

void save_packed(const Dataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("save_packed: cannot open " + path.string());
  os.write("PCAD", 4);
  write_u32(os, kPackedVersion);
  write_u32(os, std::uint32_t(dataset.clouds.size()));
  write_u32(os, std::uint32_t(dataset.num_points));
  write_u32(os, std::uint32_t(dataset.num_classes()));
  for (const auto& c : dataset.clouds) {
    write_u32(os, std::uint32_t(c.label));
    os.write(reinterpret_cast<const char*>(c.points.data()),
             std::streamsize(sizeof(float) * std::size_t(c.points.size())));
  }
  if (!os) throw Error("save_packed: write failed for " + path.string());
}

void save_ascii_dir(const Dataset& dataset, const std::filesystem::path& dir) {
  dataset.validate();
  std::filesystem::create_directories(dir);
  std::ofstream labels(dir / "labels.txt");
  std::ofstream classes(dir / "classes.txt");
  if (!labels || !classes) throw Error("save_ascii_dir: cannot write into " + dir.string());
  for (const auto& name : dataset.class_names) classes << name << '\n';
  for (std::size_t i = 0; i < dataset.clouds.size(); ++i) {
    std::ostringstream name;
    name << "cloud_" << std::setw(5) << std::setfill('0') << i << ".txt";
    std::ofstream os(dir / name.str());
    os << std::setprecision(std::numeric_limits<float>::max_digits10);
    const auto& pts = dataset.clouds[i].points;
    for (Eigen::Index r = 0; r < pts.rows(); ++r) {
      os << pts(r, 0) << ' ' << pts(r, 1) << ' ' << pts(r, 2) << '\n';
    }
    labels << name.str() << ' ' << dataset.clouds[i].label << '\n';
  }
}

namespace {

Dataset load_packed(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("load_dataset: cannot open " + path.string());
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, "PCAD", 4) != 0) {
    throw MalformedInput("packed dataset: bad magic in " + path.string());
  }
  const std::uint32_t version = read_u32(is, "version");
  if (version != kPackedVersion) {
    throw MalformedInput("packed dataset: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = read_u32(is, "cloud count");
  const std::uint32_t n = read_u32(is, "points per cloud");
  const std::uint32_t classes = read_u32(is, "class count");
  if (n == 0 || classes == 0) {
    throw MalformedInput("packed dataset: zero points per cloud or zero classes");
  }
  const auto header = std::uint64_t(20);
  const std::uint64_t expected = header + std::uint64_t(count) * (4 + 12ull * n);
  const auto actual = std::uint64_t(std::filesystem::file_size(path));
  if (actual != expected) {
    throw MalformedInput("packed dataset: expected " + std::to_string(expected) +
                         " bytes for " + std::to_string(count) + " clouds, found " +
                         std::to_string(actual));
  }
  Dataset ds;
  ds.num_points = int(n);
  ds.class_names = default_class_names(int(classes));
  ds.clouds.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    PointCloud c;
    c.label = int(read_u32(is, "label"));
    if (std::uint32_t(c.label) >= classes) {
      throw MalformedInput("packed dataset: cloud " + std::to_string(i) + " label " +
                           std::to_string(c.label) + " out of range");
    }
    c.points.resize(n, 3);
    if (!is.read(reinterpret_cast<char*>(c.points.data()), std::streamsize(12ull * n))) {
      throw MalformedInput("packed dataset: truncated coordinates in cloud " + std::to_string(i));
    }
    if (!c.points.allFinite()) {
      throw MalformedInput("packed dataset: non-finite coordinates in cloud " + std::to_string(i));
    }
    ds.clouds.push_back(std::move(c));
  }
  return ds;
}

Dataset load_ascii(const std::filesystem::path& dir) {
  std::ifstream labels(dir / "labels.txt");
  if (!labels) throw MalformedInput("ascii-dir dataset: missing labels.txt in " + dir.string());
  Dataset ds;
  if (std::ifstream classes(dir / "classes.txt"); classes) {
    for (std::string line; std::getline(classes, line);) {
      if (!line.empty()) ds.class_names.push_back(line);
    }
  }
  std::string file;
  long label = 0;
  int max_label = -1;
  while (labels >> file >> label) {
    if (label < 0) throw MalformedInput("ascii-dir dataset: negative label for " + file);
    std::ifstream is(dir / file);
    if (!is) throw MalformedInput("ascii-dir dataset: missing cloud file " + file);
    std::vector<float> xyz;
    for (std::string line; std::getline(is, line);) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::istringstream ls(line);
      float x, y, z;
      if (!(ls >> x >> y >> z)) {
        throw MalformedInput("ascii-dir dataset: bad coordinate line in " + file);
      }
      xyz.insert(xyz.end(), {x, y, z});
    }
    PointCloud c;
    c.label = int(label);
    c.points = Eigen::Map<Points<float>>(xyz.data(), Eigen::Index(xyz.size() / 3), 3);
    if (ds.clouds.empty()) ds.num_points = int(c.points.rows());
    if (c.points.rows() != ds.num_points || c.points.rows() == 0) {
      throw MalformedInput("ascii-dir dataset: " + file + " has " +
                           std::to_string(c.points.rows()) + " points, expected " +
                           std::to_string(ds.num_points));
    }
    max_label = std::max(max_label, c.label);
    ds.clouds.push_back(std::move(c));
  }
  if (!labels.eof()) throw MalformedInput("ascii-dir dataset: malformed labels.txt");
  if (ds.class_names.empty()) ds.class_names = default_class_names(max_label + 1);
  if (max_label >= ds.num_classes()) {
    throw MalformedInput("ascii-dir dataset: label " + std::to_string(max_label) +
                         " out of range for " + std::to_string(ds.num_classes()) + " classes");
  }
  return ds;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path, Format format) {
  if (!std::filesystem::exists(path)) {
    throw Error("load_dataset: " + path.string() + " does not exist");
  }
  Dataset ds = format == Format::packed ? load_packed(path) : load_ascii(path);
  normalize_all(ds);
  ds.validate();
  return ds;
}

}  // namespace pcadv::data
