#pragma once

namespace powcheck {

// Entry point of the powcheck binary: parses argv, runs the requested
// computation, and writes the report to stdout or --out. Returns the process
// exit code: 0 on success, 2 on parameter errors (bad flags or infeasible
// settings), 1 on runtime errors (I/O, unreadable data, failed searches).
int run(int argc, const char* const* argv);

}  // namespace powcheck
