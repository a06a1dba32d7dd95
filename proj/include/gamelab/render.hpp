#pragma once

#include <map>
#include <string>

#include "gamelab/games.hpp"

namespace gamelab {

// Versioned instruction template. Clause patterns may reference {lower},
// {upper}, {upper_minus_2}, {gap}, {bonus}; the base pattern additionally
// takes {points_sentence} and {bonus_sentence}.
struct InstructionTemplate {
  std::string version;
  std::string base_pattern;
  std::map<std::string, std::string> points_sentences;  // keyed by points id
  std::map<std::string, std::string> bonus_sentences;   // keyed by bonus id
};

// The built-in template, version "v1". A byte-identical copy ships as a data
// file so rendered instructions stay frozen across releases.
const InstructionTemplate& builtin_template_v1();

std::string render_instructions(const GameSpec& spec,
                                const InstructionTemplate& tmpl);
std::string render_instructions(const GameSpec& spec);

}  // namespace gamelab
