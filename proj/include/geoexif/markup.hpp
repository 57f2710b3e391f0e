#pragma once

#include <string>
#include <string_view>

namespace geoexif {

// Escapes &, <, >, " and ' for XML/HTML text and attribute values. Control
// characters other than tab/newline are dropped; XML 1.0 cannot carry them.
std::string escape_markup(std::string_view text);

}  // namespace geoexif
