#include "gamelab/render.hpp"

#include <stdexcept>

namespace gamelab {

namespace {

std::string substitute(std::string text,
                       const std::map<std::string, std::string>& vars) {
  for (const auto& [name, value] : vars) {
    std::string token = "{" + name + "}";
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
      text.replace(pos, token.size(), value);
      pos += value.size();
    }
  }
  return text;
}

InstructionTemplate make_v1() {
  InstructionTemplate t;
  t.version = "v1";
  t.base_pattern =
      "You are going to play a game where you must select a whole number "
      "between {lower} and {upper}. {points_sentence} After you tell us your "
      "number, we will randomly pair you with another worker who is also "
      "playing this same game. They will also have chosen a number between "
      "{lower} and {upper}. {bonus_sentence} What number would you request?";
  t.points_sentences["n_minus_2"] =
      "A player will receive a number of points equivalent to that number "
      "minus two.";
  t.points_sentences["n_minus_1"] =
      "A player will receive a number of points equivalent to that number "
      "minus one.";
  t.points_sentences["n"] =
      "A player will receive a number of points equivalent to that number.";
  t.points_sentences["n_plus_1"] =
      "A player will receive a number of points equivalent to that number "
      "plus one.";
  t.points_sentences["n_plus_2"] =
      "A player will receive a number of points equivalent to that number "
      "plus two.";
  t.points_sentences["costless_minus_2"] =
      "A player will receive {upper} points for selecting the number {upper} "
      "and {upper_minus_2} points for selecting any other number.";
  t.bonus_sentences["gap_lower"] =
      "If either player selects a number exactly {gap} less than the other "
      "player's number, the player with the lower number will receive an "
      "additional {bonus} points.";
  t.bonus_sentences["gap_higher"] =
      "If either player selects a number exactly {gap} more than the other "
      "player's number, the player with the higher number will receive an "
      "additional {bonus} points.";
  t.bonus_sentences["gap_absolute"] =
      "Both players will receive an additional {bonus} points if their "
      "requested numbers differ from each other by exactly {gap}.";
  t.bonus_sentences["more_than"] =
      "Both players will receive an additional {bonus} points if their "
      "requested numbers differ from each other by more than {gap}.";
  t.bonus_sentences["equal"] =
      "Both players will receive an additional {bonus} points if their "
      "requested numbers are equal to each other.";
  t.bonus_sentences["unequal"] =
      "Both players will receive an additional {bonus} points if their "
      "requested numbers are different from each other.";
  t.bonus_sentences["sum_even"] =
      "Both players will receive an additional {bonus} points if the sum of "
      "the two requested numbers is an even number.";
  t.bonus_sentences["sum_odd"] =
      "Both players will receive an additional {bonus} points if the sum of "
      "the two requested numbers is an odd number.";
  t.bonus_sentences["sum_upper"] =
      "Both players will receive an additional {bonus} points if the sum of "
      "the two requested numbers is exactly {upper}.";
  t.bonus_sentences["less_upper"] =
      "Both players will receive an additional {bonus} points if the sum of "
      "the two requested numbers is less than {upper}.";
  t.bonus_sentences["coordinate_low"] =
      "Both players will receive an additional {bonus} points if both "
      "players select the number {lower}.";
  return t;
}

}  // namespace

const InstructionTemplate& builtin_template_v1() {
  static const InstructionTemplate t = make_v1();
  return t;
}

std::string render_instructions(const GameSpec& spec,
                                const InstructionTemplate& tmpl) {
  if (!spec_is_structural(spec)) throw std::invalid_argument("non-structural game spec");
  std::map<std::string, std::string> vars;
  vars["lower"] = std::to_string(spec.lower);
  vars["upper"] = std::to_string(spec.upper);
  vars["upper_minus_2"] = std::to_string(spec.upper - 2);
  vars["gap"] = std::to_string(spec.gap);
  vars["bonus"] = std::to_string(spec.bonus);

  auto points_it = tmpl.points_sentences.find(points_rule_id(spec.points));
  auto bonus_it = tmpl.bonus_sentences.find(bonus_rule_id(spec.rule));
  if (points_it == tmpl.points_sentences.end() ||
      bonus_it == tmpl.bonus_sentences.end())
    throw std::invalid_argument("instruction template missing a clause");
  vars["points_sentence"] = substitute(points_it->second, vars);
  vars["bonus_sentence"] = substitute(bonus_it->second, vars);
  return substitute(tmpl.base_pattern, vars);
}

std::string render_instructions(const GameSpec& spec) {
  return render_instructions(spec, builtin_template_v1());
}

}  // namespace gamelab
