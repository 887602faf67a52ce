#pragma once

#include "etafit/kernels.hpp"

#include <iosfwd>
#include <string>

namespace etafit {

// "exp:alpha", "matern:alpha:nu" or "gauss:alpha".
CorrelationKernel parse_kernel(const std::string& text, double taper = 0.0);

// Exit codes: 0 success, 1 usage, 2 input error, 3 numeric failure.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace etafit
