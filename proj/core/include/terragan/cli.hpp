#pragma once

namespace terragan {

/// The terragan command line: dataset-build, train, generate, plot,
/// export-mesh, inspect. Returns the process exit code: 0 success, 1 usage
/// error, 2 data error, 3 training aborted on a non-finite loss.
int run_cli(int argc, const char* const* argv);

}  // namespace terragan
