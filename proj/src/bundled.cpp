#include "bsslca/bundled.hpp"

#include "bsslca/error.hpp"

#include <algorithm>

namespace bss::bundled {

bool contains(std::string_view name)
{
  const auto& all = entries();
  return std::any_of(all.begin(), all.end(), [&](const Entry& e) { return e.name == name; });
}

std::string_view text(std::string_view name)
{
  for (const auto& e : entries()) {
    if (e.name == name) return e.text;
  }
  throw IoError("no bundled data file named '" + std::string(name) + "'");
}

}  // namespace bss::bundled
