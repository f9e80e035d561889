#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>

namespace ibo::detail {

double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    if (field.empty()) throw ParseError(line, "empty numeric field");
    const std::string s(field);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ParseError(line, "not a number: '" + s + "'");
    if (!std::isfinite(v)) throw ParseError(line, "non-finite value: '" + s + "'");
    return v;
}

long long parse_int(std::string_view field, std::size_t line) {
    field = trim(field);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError(line, "not an integer: '" + std::string(field) + "'");
    return v;
}

}  // namespace ibo::detail
