#ifndef CRSLAB_CLI_HPP
#define CRSLAB_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace crslab {

// Executes one CLI invocation. Exit codes: 0 success, 1 validation/data
// failure, 2 usage error. Reports go to `out`, diagnostics to `err`; files
// named by --out are written atomically (temp file + rename).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace crslab

#endif
