#pragma once

#include <string>

namespace normseq::log {

// Verbosity comes from the NORMSEQ_LOG environment variable:
// "quiet" | "info" (default) | "debug". Messages go to stderr so that
// stdout stays machine-readable.
enum class Level { Quiet = 0, Info = 1, Debug = 2 };

Level level();
void info(const std::string& msg);
void debug(const std::string& msg);

}  // namespace normseq::log
