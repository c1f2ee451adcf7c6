#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tsim/engine.hpp"

namespace tsim {

/// Builtin name, `synth` or `synth:key=value,...`, or a program file.
Program resolve_program(const std::string& spec);

/// Preset name or config file, then `key=value` overrides in order.
EngineConfig resolve_config(const std::string& source, const std::vector<std::string>& overrides);

/// Exit codes: 0 ok, 1 violation found, 2 usage or configuration error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tsim
