#pragma once

#include <string>
#include <string_view>
#include <vector>

// Data files under data/ compiled into the library.
namespace bss::bundled {

struct Entry {
  std::string_view name;
  std::string_view text;
};

const std::vector<Entry>& entries();

/// Contents of a bundled file, e.g. "anchors.json" or "sweeps/lifetime.json".
/// Throws bss::IoError for unknown names.
std::string_view text(std::string_view name);

bool contains(std::string_view name);

}  // namespace bss::bundled
