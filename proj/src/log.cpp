#include "poselabel/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace poselabel::log {

Level level() {
  static Level lvl = [] {
    const char* env = std::getenv("POSELABEL_LOG");
    if (!env) return Level::warn;
    if (std::strcmp(env, "error") == 0) return Level::error;
    if (std::strcmp(env, "info") == 0) return Level::info;
    if (std::strcmp(env, "debug") == 0) return Level::debug;
    return Level::warn;
  }();
  return lvl;
}

void write(Level lvl, const std::string& msg) {
  if (lvl > level()) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::fprintf(stderr, "[poselabel:%s] %s\n", names[int(lvl)], msg.c_str());
}

}  // namespace poselabel::log
