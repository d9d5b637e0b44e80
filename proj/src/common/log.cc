#include "fgl/common/log.h"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string>

namespace fgl {

void InitLogging() {
  auto logger = spdlog::get("fgl");
  if (!logger) logger = spdlog::stderr_logger_mt("fgl");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("FGL_LOG");
  std::string level = env != nullptr ? env : "warn";
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace fgl
