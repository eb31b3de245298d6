#include "agepath/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>

#include <cstdlib>
#include <string>

namespace agepath::log {

void init_from_env() {
  auto logger = spdlog::stderr_color_mt("agepath");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("AGEPATH_LOG");
  const std::string lvl = env ? env : "warn";
  if (lvl == "error") spdlog::set_level(spdlog::level::err);
  else if (lvl == "info") spdlog::set_level(spdlog::level::info);
  else if (lvl == "debug") spdlog::set_level(spdlog::level::debug);
  else spdlog::set_level(spdlog::level::warn);
}

}  // namespace agepath::log
