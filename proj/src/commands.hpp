// SPDX-License-Identifier: Apache-2.0
//
// Config-driven front end: JSON parsing (strict schemas), initial-condition
// builders, and the subcommands that write artifact files. Everything here
// is deterministic — sorted keys, shortest-round-trip numbers, no clocks —
// so artifacts from identical configs are byte-identical.
#pragma once

#include <string>

#include "fields.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace nlse {

inline constexpr const char* kVersionString = "0.1.0";

// Parsers for JSON documents (text form). Unknown keys, wrong types, and
// out-of-range values raise Config errors naming the offending key.
// The model document accepts optional "hbar"/"mass" next to its parameters.
ModelSpec model_from_json(const std::string& text);
Grid grid_from_json(const std::string& text);
ComplexField initial_from_json(const Grid& g, const std::string& text);

// Machine-readable catalog of the built-in models.
std::string catalog_json();

// Subcommands. Each parses a full config document, validates it, runs, and
// writes its artifacts under out_dir (created when missing). When
// desk_preset is set, the user config is deep-merged over a small
// desktop-sized default setup. Failures raise nlse::Error.
void cmd_run(const std::string& config_text, const std::string& out_dir,
             bool desk_preset);
void cmd_transform(const std::string& config_text, const std::string& out_dir,
                   bool desk_preset);
void cmd_derive(const std::string& config_text, const std::string& out_dir,
                bool desk_preset);
// Returns false when at least one recorded check failed.
bool cmd_check(const std::string& config_text, const std::string& out_dir,
               bool desk_preset);

}  // namespace nlse
