#pragma once

#include <json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace lexcraft {

/// Compact UTF-8 serialization with sorted object keys and every floating
/// point number written with exactly six decimals. Byte layout is stable and
/// is what plan hashes, board digests and golden files are computed over.
std::string canonical_dump(const nlohmann::json& value);

/// Rounds to the six-decimal grid used by canonical_dump.
double round6(double v);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

} // namespace lexcraft
