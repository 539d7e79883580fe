#pragma once

namespace animesh::cli {

/// Full command-line entry point. Returns the process exit status:
/// 0 success, 2 usage error, 3 validation error, 4 I/O error,
/// 5 numerical failure.
int run(int argc, const char* const* argv);

}  // namespace animesh::cli
