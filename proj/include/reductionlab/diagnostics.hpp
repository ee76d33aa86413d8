#pragma once

#include <functional>
#include <string_view>

namespace reductionlab {

using WarningHandler = std::function<void(std::string_view)>;

// Installs a process-wide sink for non-fatal warnings (regime violations,
// unequal masses, short horizons). Returns the previous handler. The default
// handler writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

}  // namespace reductionlab
