#include "entropic/trace_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "entropic/error.hpp"

namespace entropic {

namespace {

void put_real(std::ostream& out, double x, std::int64_t step) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::kInvalidInput,
                "write_trace: non-finite value at step " + std::to_string(step));
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out << ',' << buf;
}

[[noreturn]] void parse_fail(const std::string& source, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kIo, source + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

void write_trace(const Trace& trace, std::ostream& out) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << r.step;
    for (double x : {r.entropy_exact, r.entropy_mc, r.alpha, r.error_e, r.integral_I,
                     r.predicted_dH, r.observed_dH, r.lyapunov_V, r.delta_bias, r.accuracy_proxy}) {
      put_real(out, x, r.step);
    }
    out << '\n';
  }
}

void write_trace(const Trace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing: " + std::strerror(errno));
  write_trace(trace, out);
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failure on '" + path + "'");
}

std::string trace_to_string(const Trace& trace) {
  std::ostringstream out;
  write_trace(trace, out);
  return out.str();
}

Trace read_trace(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) parse_fail(source, 1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) parse_fail(source, 1, "unexpected header '" + line + "'");
  Trace trace;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    StepRecord r;
    double* fields[] = {&r.entropy_exact, &r.entropy_mc, &r.alpha,       &r.error_e,
                        &r.integral_I,    &r.predicted_dH, &r.observed_dH, &r.lyapunov_V,
                        &r.delta_bias,    &r.accuracy_proxy};
    const char* p = line.c_str();
    char* end = nullptr;
    errno = 0;
    r.step = std::strtoll(p, &end, 10);
    if (end == p || errno) parse_fail(source, lineno, "bad step field");
    p = end;
    for (double* f : fields) {
      if (*p != ',') parse_fail(source, lineno, "expected 11 comma-separated fields");
      ++p;
      errno = 0;
      *f = std::strtod(p, &end);
      if (end == p || (errno == ERANGE && std::isinf(*f))) parse_fail(source, lineno, "bad numeric field");
      p = end;
    }
    if (*p != '\0') parse_fail(source, lineno, "trailing characters");
    trace.push_back(r);
  }
  if (in.bad()) throw Error(ErrorCode::kIo, "read failure on '" + source + "'");
  return trace;
}

Trace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading: " + std::strerror(errno));
  return read_trace(in, path);
}

}  // namespace entropic
