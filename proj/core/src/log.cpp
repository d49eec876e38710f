#include "normseq/log.hpp"

#include <cstdlib>
#include <iostream>

namespace normseq::log {

Level level() {
  static Level cached = [] {
    const char* env = std::getenv("NORMSEQ_LOG");
    if (env == nullptr) return Level::Info;
    std::string v(env);
    if (v == "quiet") return Level::Quiet;
    if (v == "debug") return Level::Debug;
    return Level::Info;
  }();
  return cached;
}

void info(const std::string& msg) {
  if (level() >= Level::Info) std::cerr << "[normseq] " << msg << "\n";
}

void debug(const std::string& msg) {
  if (level() >= Level::Debug) std::cerr << "[normseq:debug] " << msg << "\n";
}

}  // namespace normseq::log
