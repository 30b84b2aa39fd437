#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace layerfix {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

/// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS" with optional fraction and a
/// "Z" or "+HH:MM" suffix (space also accepted as separator), or a plain
/// integer count of seconds. Throws Error{parse}.
Timestamp parse_timestamp(std::string_view text);

/// "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

}  // namespace layerfix
