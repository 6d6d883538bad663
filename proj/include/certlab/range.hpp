#ifndef CERTLAB_RANGE_HPP
#define CERTLAB_RANGE_HPP

// Integer ranges as written on the command line:
//
//   16            a single value
//   0..10         inclusive, step 1
//   12..20:2      additive step
//   256..4096:x2  multiplicative step

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace certlab {

class RangeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::uint64_t parse_u64(std::string_view s, std::string_view whole) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw RangeError("malformed range '" + std::string(whole) + "'");
  return v;
}

}  // namespace detail

inline std::vector<std::uint64_t> parse_range(std::string_view text) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) return {detail::parse_u64(text, text)};
  const std::uint64_t lo = detail::parse_u64(text.substr(0, dots), text);
  std::string_view rest = text.substr(dots + 2);
  std::uint64_t step = 1;
  bool multiply = false;
  if (auto colon = rest.find(':'); colon != std::string_view::npos) {
    std::string_view s = rest.substr(colon + 1);
    rest = rest.substr(0, colon);
    if (!s.empty() && s[0] == 'x') {
      multiply = true;
      s.remove_prefix(1);
    }
    step = detail::parse_u64(s, text);
  }
  const std::uint64_t hi = detail::parse_u64(rest, text);
  if (lo > hi) throw RangeError("empty range '" + std::string(text) + "'");
  if (multiply ? (step < 2 || lo == 0) : step == 0)
    throw RangeError("range step in '" + std::string(text) + "' never advances");
  std::vector<std::uint64_t> out;
  for (std::uint64_t v = lo; v <= hi;) {
    out.push_back(v);
    const std::uint64_t next = multiply ? v * step : v + step;
    if (next <= v) break;  // overflow
    v = next;
  }
  return out;
}

}  // namespace certlab

#endif  // CERTLAB_RANGE_HPP
