#include "gamelab/serialize.hpp"

#include <fstream>
#include <stdexcept>

namespace gamelab {

Json game_to_json(const GameSpec& s) {
  Json j;
  j["lower"] = s.lower;
  j["upper"] = s.upper;
  j["gap"] = s.gap;
  j["bonus"] = s.bonus;
  j["points"] = points_rule_id(s.points);
  j["rule"] = bonus_rule_id(s.rule);
  return j;
}

GameSpec game_from_json(const Json& j) {
  GameSpec s;
  s.lower = j.at("lower").get<int>();
  s.upper = j.at("upper").get<int>();
  s.gap = j.at("gap").get<int>();
  s.bonus = j.at("bonus").get<int>();
  auto points = points_rule_from_id(j.at("points").get<std::string>());
  if (!points)
    throw std::invalid_argument("unknown points rule " +
                                j.at("points").get<std::string>());
  auto rule = bonus_rule_from_id(j.at("rule").get<std::string>());
  if (!rule)
    throw std::invalid_argument("unknown bonus rule " +
                                j.at("rule").get<std::string>());
  s.points = *points;
  s.rule = *rule;
  return s;
}

Json matrix_to_json(const SymmetricGame& g) {
  Json j;
  j["actions"] = g.actions;
  j["payoff"] = g.payoff;
  return j;
}

Json template_to_json(const InstructionTemplate& t) {
  Json j;
  j["version"] = t.version;
  j["base_pattern"] = t.base_pattern;
  j["points_sentences"] = Json::object();
  for (const auto& [id, text] : t.points_sentences)
    j["points_sentences"][id] = text;
  j["bonus_sentences"] = Json::object();
  for (const auto& [id, text] : t.bonus_sentences)
    j["bonus_sentences"][id] = text;
  return j;
}

InstructionTemplate template_from_json(const Json& j) {
  InstructionTemplate t;
  t.version = j.at("version").get<std::string>();
  t.base_pattern = j.at("base_pattern").get<std::string>();
  for (auto& [id, text] : j.at("points_sentences").items())
    t.points_sentences[id] = text.get<std::string>();
  for (auto& [id, text] : j.at("bonus_sentences").items())
    t.bonus_sentences[id] = text.get<std::string>();
  return t;
}

Json strategy_to_json(const MixedStrategy& s) {
  Json j = Json::array();
  for (const auto& p : s.probs) j.push_back(rational_to_string(p));
  return j;
}

MixedStrategy strategy_from_json(const Json& j) {
  MixedStrategy s;
  for (const auto& item : j)
    s.probs.push_back(rational_from_string(item.get<std::string>()));
  return s;
}

Json equilibrium_to_json(const EquilibriumProfile& e) {
  Json j;
  j["row"] = strategy_to_json(e.row);
  j["col"] = strategy_to_json(e.col);
  j["row_payoff"] = rational_to_string(e.row_payoff);
  j["col_payoff"] = rational_to_string(e.col_payoff);
  j["symmetric"] = e.symmetric();
  return j;
}

EquilibriumProfile equilibrium_from_json(const Json& j) {
  EquilibriumProfile e;
  e.row = strategy_from_json(j.at("row"));
  e.col = strategy_from_json(j.at("col"));
  e.row_payoff = rational_from_string(j.at("row_payoff").get<std::string>());
  e.col_payoff = rational_from_string(j.at("col_payoff").get<std::string>());
  return e;
}

Json nash_to_json(const NashResult& r) {
  Json j;
  j["resolved"] = r.resolved;
  j["degenerate"] = r.degenerate;
  j["supports_examined"] = r.supports_examined;
  j["equilibria"] = Json::array();
  for (const auto& e : r.equilibria) j["equilibria"].push_back(equilibrium_to_json(e));
  return j;
}

Json selection_to_json(const SelectionOutcome& o) {
  Json j;
  j["resolved"] = o.resolved;
  j["provenance"] = provenance_id(o.provenance);
  if (o.resolved) j["selected"] = equilibrium_to_json(o.selected);
  j["num_equilibria"] = o.num_equilibria;
  j["num_symmetric"] = o.num_symmetric;
  j["num_components"] = o.num_components;
  j["pareto_deleted"] = o.pareto_deleted;
  j["pareto_protected"] = o.pareto_protected;
  j["degenerate"] = o.degenerate;
  j["trace_ran"] = o.trace_ran;
  if (!o.note.empty()) j["note"] = o.note;
  return j;
}

Json distribution_to_json(const ResponseDistribution& d) {
  Json j;
  j["setting_id"] = d.setting_id;
  j["counts"] = d.counts;
  j["total"] = d.total;
  j["probs"] = d.probs;
  return j;
}

ResponseDistribution distribution_from_json(const Json& j) {
  ResponseDistribution d;
  d.setting_id = j.at("setting_id").get<std::string>();
  d.counts = j.at("counts").get<std::vector<double>>();
  d.total = j.at("total").get<double>();
  d.probs = j.at("probs").get<std::vector<double>>();
  if (d.probs.empty()) throw std::invalid_argument("empty distribution");
  return d;
}

Json mixture_fit_to_json(const MixtureFit& f) {
  Json j;
  j["weights"] = f.weights;
  j["objective"] = f.objective;
  j["restarts"] = f.restarts;
  j["seed"] = f.seed;
  j["trace"] = f.trace;
  return j;
}

Json param_fit_to_json(const ParamFit& f) {
  Json j;
  j["best_params"] = f.best_params;
  j["best_objective"] = f.best_objective;
  j["box_exhausted"] = f.box_exhausted;
  j["log"] = Json::array();
  for (const auto& rec : f.log) {
    Json r;
    r["params"] = rec.params;
    r["objective"] = rec.objective;
    r["phase"] = rec.phase;
    j["log"].push_back(std::move(r));
  }
  return j;
}

Json setting_to_json(const Setting& s) {
  Json j;
  j["id"] = s.id;
  j["instructions"] = s.instruction_text;
  j["actions"] = s.actions;
  if (s.game) j["game"] = game_to_json(*s.game);
  return j;
}

Setting setting_from_json(const Json& j) {
  if (j.contains("game")) return setting_for_game(game_from_json(j.at("game")));
  return make_setting(j.at("instructions").get<std::string>(),
                      j.at("actions").get<std::vector<int>>());
}

namespace {

const char* agent_kind_id(AgentKind k) {
  switch (k) {
    case AgentKind::kBackendPersona: return "backend_persona";
    case AgentKind::kMixture: return "mixture";
    case AgentKind::kMechanicalLevelK: return "level_k";
    case AgentKind::kUniform: return "uniform";
    case AgentKind::kRandomPure: return "random_pure";
    case AgentKind::kTabulated: return "tabulated";
  }
  return "?";
}

AgentKind agent_kind_from_id(const std::string& id) {
  if (id == "backend_persona") return AgentKind::kBackendPersona;
  if (id == "mixture") return AgentKind::kMixture;
  if (id == "level_k") return AgentKind::kMechanicalLevelK;
  if (id == "uniform") return AgentKind::kUniform;
  if (id == "random_pure") return AgentKind::kRandomPure;
  if (id == "tabulated") return AgentKind::kTabulated;
  throw std::invalid_argument("unknown agent kind " + id);
}

}  // namespace

Json agent_to_json(const AgentModel& m) {
  Json j;
  j["kind"] = agent_kind_id(m.kind);
  j["name"] = m.name;
  switch (m.kind) {
    case AgentKind::kBackendPersona: {
      Json p;
      p["preamble"] = m.prompt.preamble;
      p["persona"] = m.prompt.persona;
      p["explanation"] = m.prompt.explanation;
      if (!m.prompt.traits.empty()) p["traits"] = m.prompt.traits;
      j["prompt"] = std::move(p);
      j["temperature"] = m.temperature;
      break;
    }
    case AgentKind::kMixture: {
      j["weights"] = m.weights;
      j["components"] = Json::array();
      for (const auto& c : m.components) j["components"].push_back(agent_to_json(c));
      break;
    }
    case AgentKind::kMechanicalLevelK: {
      j["level"] = m.level;
      j["level0"] = m.level0 == Level0Rule::kMaxGuaranteed ? "max_guaranteed"
                                                           : "uniform";
      break;
    }
    case AgentKind::kTabulated: {
      Json t = Json::object();
      for (const auto& [setting, dist] : m.table)
        t[setting] = distribution_to_json(dist);
      j["table"] = std::move(t);
      break;
    }
    default:
      break;
  }
  return j;
}

AgentModel agent_from_json(const Json& j) {
  AgentModel m;
  m.kind = agent_kind_from_id(j.at("kind").get<std::string>());
  if (j.contains("name")) m.name = j.at("name").get<std::string>();
  switch (m.kind) {
    case AgentKind::kBackendPersona: {
      const Json& p = j.at("prompt");
      m.prompt.preamble = p.value("preamble", "");
      m.prompt.persona = p.at("persona").get<std::string>();
      m.prompt.explanation = p.value("explanation", "");
      if (p.contains("traits"))
        m.prompt.traits = p.at("traits").get<std::map<std::string, int>>();
      m.temperature = j.value("temperature", 1.0);
      break;
    }
    case AgentKind::kMixture: {
      m.weights = j.at("weights").get<std::vector<double>>();
      for (const auto& c : j.at("components"))
        m.components.push_back(agent_from_json(c));
      break;
    }
    case AgentKind::kMechanicalLevelK: {
      m.level = j.at("level").get<int>();
      m.level0 = j.value("level0", "max_guaranteed") == std::string("uniform")
                     ? Level0Rule::kUniform
                     : Level0Rule::kMaxGuaranteed;
      break;
    }
    case AgentKind::kTabulated: {
      for (auto& [setting, dist] : j.at("table").items())
        m.table[setting] = distribution_from_json(dist);
      break;
    }
    default:
      break;
  }
  return m;
}

Json frame_to_json(const GameSampleFrame& f) {
  Json j;
  j["scheme"] = f.scheme == SampleScheme::kWeighted ? "weighted" : "uniform";
  j["seed"] = f.seed;
  j["population_digest"] = f.population_digest;
  j["games"] = Json::array();
  for (std::size_t i = 0; i < f.games.size(); ++i) {
    Json g = game_to_json(f.games[i]);
    g["weight"] = f.weights[i];
    j["games"].push_back(std::move(g));
  }
  return j;
}

GameSampleFrame frame_from_json(const Json& j) {
  GameSampleFrame f;
  f.scheme = j.at("scheme").get<std::string>() == "weighted" ? SampleScheme::kWeighted
                                                          : SampleScheme::kUniform;
  f.seed = j.at("seed").get<std::uint64_t>();
  f.population_digest = j.at("population_digest").get<std::string>();
  for (const auto& g : j.at("games")) {
    f.games.push_back(game_from_json(g));
    f.weights.push_back(g.at("weight").get<double>());
  }
  return f;
}

void write_population(const std::string& path, const FamilyIndex& index) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  Json header;
  header["raw_count"] = index.raw_count;
  header["unique_count"] = index.unique.size();
  header["digest"] = index.digest;
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < index.unique.size(); ++i) {
    Json line;
    line["spec"] = game_to_json(index.unique[i]);
    line["mass"] = rational_to_string(index.weighted_mass[i]);
    out << line.dump() << '\n';
  }
}

FamilyIndex read_population(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty population file");
  Json header = Json::parse(line);
  FamilyIndex index;
  index.raw_count = header.at("raw_count").get<std::uint64_t>();
  index.digest = header.at("digest").get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    index.unique.push_back(game_from_json(j.at("spec")));
    index.weighted_mass.push_back(
        rational_from_string(j.at("mass").get<std::string>()));
  }
  return index;
}

std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << canonical_dump(j);
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  Json j;
  in >> j;
  return j;
}

}  // namespace gamelab
