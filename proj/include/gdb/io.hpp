#pragma once

#include <filesystem>
#include <string>

#include "gdb/core.hpp"

namespace gdb::io {

/// Parses a scenario document. Malformed JSON and unknown keys raise
/// ParseError; absent required keys raise MissingField. No validation.
Scenario parse_scenario(const std::string &text);
Scenario load_scenario(const std::filesystem::path &path);

std::string scenario_to_json(const Scenario &s);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::string &content);

} // namespace gdb::io
