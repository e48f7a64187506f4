#ifndef FVTAXIS_CLI_HPP
#define FVTAXIS_CLI_HPP

#include <string>
#include <vector>

namespace fvtaxis {

/// Entry point behind the fvtaxis executable, factored out so tests can drive
/// the command surface in-process. args excludes argv[0].
///
/// Verbs: run <config>, sweep <base> <overrides>, eps-study <base>,
/// converge <base>, check <config>.
/// Flags: --out <dir> (default $FVTAXIS_OUT or ./out), --workers <n>,
/// --snapshots <cadence>; study knobs --eps <list>, --levels <n>, --mode <m>.
/// Exit codes: 0 success, 2 invalid config, 3 solver nonconvergence,
/// 4 invariant violation, 1 anything else.
int cli_main(const std::vector<std::string>& args);

}  // namespace fvtaxis

#endif
