#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "entropic/sim.hpp"

namespace entropic {

inline constexpr std::string_view kTraceHeader =
    "step,entropy_exact,entropy_mc,alpha,error_e,integral_I,predicted_dH,observed_dH,"
    "lyapunov_V,delta_bias,accuracy_proxy";

/// CSV with kTraceHeader; reals use 17 significant digits so read_trace
/// reproduces every finite value exactly. Throws Error(kInvalidInput) for a
/// non-finite value.
void write_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::string& path);
std::string trace_to_string(const Trace& trace);

/// Throws Error(kIo) with the path (and line) on failure.
Trace read_trace(std::istream& in, const std::string& source = "<stream>");
Trace read_trace(const std::string& path);

}  // namespace entropic
