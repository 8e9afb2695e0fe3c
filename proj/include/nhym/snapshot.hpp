#pragma once

#include <string>
#include <vector>

#include "nhym/fields.hpp"

namespace nhym {

/// One named block of a field snapshot.
struct SnapshotComponent {
  std::string name;
  EndField field;
};

/// Writes the snapshot format: a text header
///
///   NHYMSNAP 1
///   geometry <descriptor>
///   rank <r>
///   nodes <count>
///   components <name> <name> ...
///   end
///
/// followed by one binary block per component. A block lists the nodes in
/// grid order (axis 0 fastest); each node stores its r x r matrix row-major as
/// little-endian float64 pairs (re, im). All components must share geometry
/// and rank. Throws Error on I/O failure.
void write_snapshot(const std::string& path, const std::vector<SnapshotComponent>& components);

/// Reads a snapshot written on `geom`. Throws ValidationError when the header
/// is malformed or its geometry descriptor differs from geom->describe().
std::vector<SnapshotComponent> read_snapshot(const std::string& path, const Geometry& geom);

}  // namespace nhym
