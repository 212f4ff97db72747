#include "lexcraft/canonical.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace lexcraft {

namespace {

void write_number(std::string& out, double v)
{
    if (!std::isfinite(v))
        throw std::invalid_argument("canonical_dump: non-finite number");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string_view s(buf);
    if (s == "-0.000000")
        s = "0.000000";
    out += s;
}

void write(std::string& out, const nlohmann::json& v)
{
    using value_t = nlohmann::json::value_t;
    switch (v.type()) {
    case value_t::object: {
        out += '{';
        bool first = true;
        // nlohmann::json's default object_t is std::map, already key-sorted
        for (const auto& [key, item] : v.items()) {
            if (!first)
                out += ',';
            first = false;
            out += nlohmann::json(key).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
            out += ':';
            write(out, item);
        }
        out += '}';
        break;
    }
    case value_t::array: {
        out += '[';
        bool first = true;
        for (const auto& item : v) {
            if (!first)
                out += ',';
            first = false;
            write(out, item);
        }
        out += ']';
        break;
    }
    case value_t::number_float:
        write_number(out, v.get<double>());
        break;
    case value_t::discarded:
        throw std::invalid_argument("canonical_dump: discarded value");
    default:
        out += v.dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
        break;
    }
}

} // namespace

std::string canonical_dump(const nlohmann::json& value)
{
    std::string out;
    write(out, value);
    return out;
}

double round6(double v)
{
    return std::round(v * 1e6) / 1e6;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string sha256_hex(std::string_view text)
{
    return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace lexcraft
