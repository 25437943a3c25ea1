#pragma once

namespace isip4d::cli {

/// Exit codes of the isip4d tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv and runs one subcommand (gen, voxelize, detect, stip3d,
/// eval, export). Log lines go to stderr; machine outputs go to the
/// declared files or stdout.
int run_cli(int argc, char** argv);

}  // namespace isip4d::cli
