#include "nhym/snapshot.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace nhym {
namespace {

constexpr const char* kMagic = "NHYMSNAP 1";

void put_real(std::ostream& os, Real v) {
  std::array<char, sizeof(Real)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(Real));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(bytes.data(), bytes.size());
}

Real get_real(std::istream& is) {
  std::array<char, sizeof(Real)> bytes;
  if (!is.read(bytes.data(), bytes.size())) throw ValidationError("snapshot: truncated data block");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  Real v;
  std::memcpy(&v, bytes.data(), sizeof(Real));
  return v;
}

std::string expect_line(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("snapshot: missing header line '" + key + "'");
  if (line.rfind(key + " ", 0) != 0) throw ValidationError("snapshot: expected '" + key + "', got '" + line + "'");
  return line.substr(key.size() + 1);
}

}  // namespace

void write_snapshot(const std::string& path, const std::vector<SnapshotComponent>& components) {
  if (components.empty()) throw ValidationError("snapshot needs at least one component");
  const EndField& first = components.front().field;
  for (const auto& c : components) {
    if (c.name.empty() || c.name.find_first_of(" \t\n") != std::string::npos)
      throw ValidationError("snapshot component names must be non-empty words");
    if (c.field.geometry() != first.geometry() || c.field.rank() != first.rank())
      throw ValidationError("snapshot components must share geometry and rank");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open snapshot file " + path);
  const int r = first.rank();
  os << kMagic << "\n";
  os << "geometry " << first.grid().describe() << "\n";
  os << "rank " << r << "\n";
  os << "nodes " << first.nodes() << "\n";
  os << "components";
  for (const auto& c : components) os << " " << c.name;
  os << "\nend\n";
  for (const auto& c : components)
    for (Eigen::Index i = 0; i < c.field.nodes(); ++i) {
      const Mat m = c.field.node(i);
      for (int row = 0; row < r; ++row)
        for (int col = 0; col < r; ++col) {
          put_real(os, m(row, col).real());
          put_real(os, m(row, col).imag());
        }
    }
  if (!os) throw Error("write failed for snapshot file " + path);
}

std::vector<SnapshotComponent> read_snapshot(const std::string& path, const Geometry& geom) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open snapshot file " + path);
  std::string line;
  if (!std::getline(is, line) || line != kMagic) throw ValidationError("snapshot: bad magic line");
  const std::string descriptor = expect_line(is, "geometry");
  if (descriptor != geom->describe())
    throw ValidationError("snapshot geometry '" + descriptor + "' does not match '" + geom->describe() + "'");
  const int r = std::stoi(expect_line(is, "rank"));
  const long long nodes = std::stoll(expect_line(is, "nodes"));
  if (r < 1 || r > kMaxRank || nodes != geom->node_count())
    throw ValidationError("snapshot: rank or node count out of range");
  std::istringstream names(expect_line(is, "components"));
  std::vector<SnapshotComponent> out;
  for (std::string name; names >> name;) out.push_back({name, EndField(geom, r)});
  if (!std::getline(is, line) || line != "end") throw ValidationError("snapshot: missing 'end'");
  for (auto& c : out)
    for (Eigen::Index i = 0; i < nodes; ++i) {
      Mat m(r, r);
      for (int row = 0; row < r; ++row)
        for (int col = 0; col < r; ++col) {
          const Real re = get_real(is);
          m(row, col) = Complex(re, get_real(is));
        }
      c.field.set_node(i, m);
    }
  return out;
}

}  // namespace nhym
