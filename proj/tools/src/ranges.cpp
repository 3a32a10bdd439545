#include "nestquant_tools/ranges.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace nestquant::cli {

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_range(const std::string& text) {
  const auto first = text.find(':');
  if (first == std::string::npos) return {parse_double(text)};
  const auto second = text.find(':', first + 1);
  if (second == std::string::npos) throw std::invalid_argument("range must be start:step:stop, got '" + text + "'");
  const std::string_view view(text);
  const double start = parse_double(view.substr(0, first));
  const double step = parse_double(view.substr(first + 1, second - first - 1));
  const double stop = parse_double(view.substr(second + 1));
  if (!(step > 0.0) || stop < start) throw std::invalid_argument("range needs step > 0 and stop >= start: '" + text + "'");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 1'000'000) throw std::invalid_argument("range has too many points: '" + text + "'");
  std::vector<double> out;
  out.reserve(count);
  // start + i·step rather than repeated addition keeps 0:0.25:5 exact.
  for (std::size_t i = 0; i < count; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::size_t parse_count(const std::string& text) {
  const double v = parse_double(text);
  if (v < 0.0 || v != std::floor(v) || v > 1e15) throw std::invalid_argument("not a count: '" + text + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace nestquant::cli
