#pragma once

#include <iosfwd>

namespace fruitbench {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Subcommands: ingest-labelme, write-coco, stats, split, evaluate, loss,
// rec-eval, report, bench. Every option can also come from --config (a
// TOML/INI key-value file, one [section] per subcommand); command-line flags
// win over file values. FRUITBENCH_THREADS sets the default --threads.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace fruitbench
