#pragma once

// Scenario files: INI-style sections [geometry] [gnbs] [ues] [surface]
// [timing] [protocol] [noise] [output]. Repeated nodes use one inline entry
// per line, e.g. `gnb = id=1 x=-10 y=8 freq=0`. Unknown keys are rejected
// with line:column; every default that fills a missing key is reported.

#include <string>
#include <vector>

#include "scenario.hpp"

namespace ws::config {

struct ParseResult {
  sim::Scenario scenario;
  std::vector<std::string> defaults_applied;  // "section.key = value"
};

/// Parses and validates. Syntax errors are ErrorCode::parse with
/// origin:line:col; semantic errors are ErrorCode::config with a key path.
ParseResult parse_config_text(const std::string& text, const std::string& origin = "<config>");
/// Reads `path`; relative codebook and replay paths resolve against the
/// file's directory.
ParseResult parse_config(const std::string& path);

/// Canonical text with every key spelled out; parsing it yields an equal
/// Scenario.
std::string emit_canonical(const sim::Scenario& s);

}  // namespace ws::config
