#pragma once

namespace fgl {

// Routes spdlog's default logger to stderr and sets its level from FGL_LOG
// (trace|debug|info|warn|error|off; default warn).
void InitLogging();

}  // namespace fgl
