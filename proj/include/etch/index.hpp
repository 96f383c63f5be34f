#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "etch/error.hpp"

namespace etch {

using Index = std::int32_t;
using Coord = std::vector<Index>;

/// The ordered list of index names in play, with their domain sizes.
/// Position in the list is the index id; ids are compared by position,
/// so the declaration order is the global index order.
struct IndexUniverse {
  std::vector<std::string> names;
  std::vector<Index> sizes;

  int add(const std::string& name, Index size) {
    names.push_back(name);
    sizes.push_back(size);
    return static_cast<int>(names.size()) - 1;
  }

  int find(const std::string& name) const {
    for (int i = 0; i < static_cast<int>(names.size()); ++i)
      if (names[i] == name) return i;
    return -1;
  }

  int require(const std::string& name) const {
    int id = find(name);
    if (id < 0) fail(ErrorKind::UnboundVariable, "unknown index '" + name + "'");
    return id;
  }

  Index size_of(int id) const { return sizes.at(static_cast<size_t>(id)); }
  const std::string& name_of(int id) const { return names.at(static_cast<size_t>(id)); }
  int rank() const { return static_cast<int>(names.size()); }
};

}  // namespace etch
