#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace nestquant::cli {

/// "a:step:b" → a, a+step, …, up to b inclusive (with 1e-9·step slack).
/// A single number yields itself. Throws std::invalid_argument.
std::vector<double> parse_range(const std::string& text);

/// Accepts integers and scientific notation such as 1e7.
std::size_t parse_count(const std::string& text);

}  // namespace nestquant::cli
