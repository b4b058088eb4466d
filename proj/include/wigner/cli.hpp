#ifndef WIGNER_CLI_HPP
#define WIGNER_CLI_HPP

#include <iosfwd>

namespace wigner::cli {

/// Exit codes: 0 success, 1 internal error, 2 usage error, 3 validation or
/// not-modeled error.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

} // namespace wigner::cli

#endif // WIGNER_CLI_HPP
