#include "gamelab/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gamelab/backend.hpp"
#include "gamelab/hash.hpp"
#include "gamelab/render.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {

namespace {

std::string setting_digest(const std::string& text, const std::vector<int>& actions) {
  std::string blob = text;
  blob += '\n';
  for (int a : actions) {
    blob += std::to_string(a);
    blob += ',';
  }
  return sha256_hex(blob).substr(0, 16);
}

}  // namespace

Setting make_setting(const std::string& instruction_text,
                     const std::vector<int>& actions) {
  if (actions.empty()) throw std::invalid_argument("setting needs actions");
  for (std::size_t i = 1; i < actions.size(); ++i)
    if (actions[i] == actions[i - 1])
      throw std::invalid_argument("duplicate action label");
  Setting s;
  s.instruction_text = instruction_text;
  s.actions = actions;
  s.id = setting_digest(instruction_text, actions);
  return s;
}

Setting setting_for_game(const GameSpec& spec) {
  std::vector<int> actions(spec.num_actions());
  std::iota(actions.begin(), actions.end(), spec.lower);
  Setting s = make_setting(render_instructions(spec), actions);
  s.game = spec;
  return s;
}

Setting setting_for_matrix(const std::string& name, const SymmetricGame& game) {
  return make_setting(name, game.actions);
}

std::string PromptSpec::text() const {
  std::string body = persona;
  for (const auto& [key, value] : traits) {
    std::string slot = "{" + key + "}";
    std::size_t pos;
    while ((pos = body.find(slot)) != std::string::npos)
      body.replace(pos, slot.size(), std::to_string(value));
  }
  if (body.find('{') != std::string::npos &&
      body.find('}', body.find('{')) != std::string::npos)
    throw std::invalid_argument("unresolved trait slot in persona text");
  std::string out;
  if (!preamble.empty()) out = preamble + " ";
  out += body;
  if (!explanation.empty()) out += " " + explanation;
  return out;
}

std::string PromptSpec::digest() const { return sha256_hex(text()).substr(0, 16); }

ResponseDistribution distribution_from_counts(const std::string& setting_id,
                                              const std::vector<double>& counts) {
  ResponseDistribution d;
  d.setting_id = setting_id;
  d.counts = counts;
  for (double c : counts) {
    if (c < 0) throw std::invalid_argument("negative count");
    d.total += c;
  }
  if (d.total <= 0) throw std::invalid_argument("empty distribution");
  d.probs.resize(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) d.probs[i] = counts[i] / d.total;
  return d;
}

std::optional<int> parse_response(const std::string& raw,
                                  const std::vector<int>& actions) {
  std::optional<int> found;
  std::size_t i = 0;
  std::size_t n = raw.size();
  while (i < n) {
    if (!std::isdigit((unsigned char)raw[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < n && std::isdigit((unsigned char)raw[i])) ++i;
    // Reject digit runs that are part of a decimal number.
    bool decimal = false;
    if (start > 0 && raw[start - 1] == '.' && start > 1 &&
        std::isdigit((unsigned char)raw[start - 2]))
      decimal = true;
    if (i < n && raw[i] == '.' && i + 1 < n && std::isdigit((unsigned char)raw[i + 1]))
      decimal = true;
    if (decimal) continue;
    bool negative = start > 0 && raw[start - 1] == '-';
    std::string tok = raw.substr(start, i - start);
    if (tok.size() > 9) continue;
    int value = std::stoi(tok);
    if (negative) value = -value;
    if (std::find(actions.begin(), actions.end(), value) != actions.end())
      found = value;
  }
  return found;
}

ResponseDistribution mixture_distribution(
    const std::vector<ResponseDistribution>& components,
    const std::vector<double>& weights) {
  if (components.empty() || components.size() != weights.size())
    throw std::invalid_argument("components and weights must align");
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("weights must sum to 1");
  const auto& first = components.front();
  ResponseDistribution out;
  out.setting_id = first.setting_id;
  out.probs.assign(first.probs.size(), 0.0);
  for (std::size_t c = 0; c < components.size(); ++c) {
    if (weights[c] < 0) throw std::invalid_argument("negative mixture weight");
    if (components[c].setting_id != first.setting_id)
      throw std::invalid_argument("mixture components cover different settings");
    if (components[c].probs.size() != first.probs.size())
      throw std::invalid_argument("mixture components over different action sets");
    for (std::size_t i = 0; i < out.probs.size(); ++i)
      out.probs[i] += weights[c] * components[c].probs[i];
    out.total += weights[c] * components[c].total;
  }
  out.counts.resize(out.probs.size());
  for (std::size_t i = 0; i < out.probs.size(); ++i)
    out.counts[i] = out.probs[i] * out.total;
  return out;
}

ResponseDistribution mechanical_levelk(const SymmetricGame& game, int k,
                                       Level0Rule level0_rule) {
  if (k < 0) throw std::invalid_argument("level must be nonnegative");
  int n = game.num_actions();
  std::vector<double> current(n, 0.0);
  if (level0_rule == Level0Rule::kUniform) {
    std::fill(current.begin(), current.end(), 1.0 / n);
  } else {
    // Most guaranteed money: maximin over the opponent's pure actions,
    // ties toward the highest action.
    long long best = 0;
    int best_i = -1;
    for (int i = 0; i < n; ++i) {
      long long worst = game.at(i, 0);
      for (int j = 1; j < n; ++j) worst = std::min(worst, (long long)game.at(i, j));
      if (best_i < 0 || worst >= best) {
        best = worst;
        best_i = i;
      }
    }
    current[best_i] = 1.0;
  }
  for (int step = 0; step < k; ++step) {
    int best_i = -1;
    double best = 0;
    for (int i = 0; i < n; ++i) {
      double payoff = 0;
      for (int j = 0; j < n; ++j) payoff += double(game.at(i, j)) * current[j];
      // >= keeps the highest action among ties
      if (best_i < 0 || payoff >= best - 1e-12) {
        best = std::max(best, payoff);
        best_i = i;
      }
    }
    std::fill(current.begin(), current.end(), 0.0);
    current[best_i] = 1.0;
  }
  ResponseDistribution d;
  d.setting_id = "";
  d.probs = current;
  d.counts = current;
  d.total = 1.0;
  return d;
}

std::vector<int> scale_mixture_to_population(const std::vector<double>& weights,
                                             int n) {
  if (n < 1) throw std::invalid_argument("population size must be positive");
  double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (std::abs(wsum - 1.0) > 1e-9)
    throw std::invalid_argument("weights must sum to 1");
  std::size_t k = weights.size();
  std::vector<int> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> fracs(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double quota = weights[i] * n;
    counts[i] = int(std::floor(quota + 1e-12));
    assigned += counts[i];
    fracs[i] = {quota - counts[i], i};
  }
  std::sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int r = 0; r < n - assigned; ++r) ++counts[fracs[r % k].second];
  return counts;
}

namespace {

ResponseDistribution elicit_backend(const AgentModel& model, const Setting& setting,
                                    int n, std::uint64_t seed, ChatBackend* backend) {
  if (!backend) throw std::runtime_error("backend persona requires a chat backend");
  std::string persona = model.prompt.text();
  std::vector<double> counts(setting.actions.size(), 0.0);
  int valid = 0;
  for (int draw = 0; draw < n; ++draw) {
    std::uint64_t s1 = derive_seed(seed, "elicit/" + setting.id + "/reason", draw);
    std::vector<ChatMessage> first{
        {"system", persona},
        {"user", setting.instruction_text +
                     " Reason out a few settings according to your personality and "
                     "how others might respond."}};
    std::string thoughts = backend->complete(first, model.temperature, s1);
    std::uint64_t s2 = derive_seed(seed, "elicit/" + setting.id + "/answer", draw);
    std::vector<ChatMessage> second{
        {"system", persona},
        {"user", setting.instruction_text +
                     " You previously had the following thoughts: " + thoughts +
                     " What amount of money would you request?"}};
    std::string reply = backend->complete(second, model.temperature, s2);
    auto action = parse_response(reply, setting.actions);
    if (!action) continue;  // discarded without resampling
    std::size_t idx = std::find(setting.actions.begin(), setting.actions.end(),
                                *action) -
                      setting.actions.begin();
    counts[idx] += 1;
    ++valid;
  }
  if (valid == 0) throw std::runtime_error("all backend responses were invalid");
  ResponseDistribution d = distribution_from_counts(setting.id, counts);
  return d;
}

}  // namespace

ResponseDistribution elicit_distribution(const AgentModel& model,
                                         const Setting& setting, int n,
                                         std::uint64_t seed, ChatBackend* backend) {
  if (n < 1) throw std::invalid_argument("draw count must be positive");
  std::size_t k = setting.actions.size();
  switch (model.kind) {
    case AgentKind::kUniform: {
      Rng rng(derive_seed(seed, "elicit/uniform/" + setting.id, 0));
      std::vector<double> counts(k, 0.0);
      for (int i = 0; i < n; ++i) counts[rng.uniform_int(int(k))] += 1;
      return distribution_from_counts(setting.id, counts);
    }
    case AgentKind::kRandomPure: {
      Rng rng(derive_seed(seed, "elicit/random-pure/" + setting.id, 0));
      std::vector<double> counts(k, 0.0);
      counts[rng.uniform_int(int(k))] = n;
      return distribution_from_counts(setting.id, counts);
    }
    case AgentKind::kMechanicalLevelK: {
      if (!setting.game)
        throw std::invalid_argument("level-k model needs a game-backed setting");
      ResponseDistribution d =
          mechanical_levelk(payoff_matrix(*setting.game), model.level, model.level0);
      d.setting_id = setting.id;
      for (auto& c : d.counts) c *= n;
      d.total = n;
      return d;
    }
    case AgentKind::kTabulated: {
      auto it = model.table.find(setting.id);
      if (it == model.table.end())
        throw std::runtime_error("tabulated model missing setting " + setting.id);
      return it->second;
    }
    case AgentKind::kMixture: {
      if (model.components.size() != model.weights.size())
        throw std::invalid_argument("mixture weights misaligned");
      std::vector<ResponseDistribution> parts;
      parts.reserve(model.components.size());
      for (std::size_t c = 0; c < model.components.size(); ++c)
        parts.push_back(elicit_distribution(
            model.components[c], setting, n,
            derive_seed(seed, "elicit/mixture", std::uint64_t(c)), backend));
      return mixture_distribution(parts, model.weights);
    }
    case AgentKind::kBackendPersona:
      return elicit_backend(model, setting, n, seed, backend);
  }
  throw std::logic_error("unknown agent kind");
}

}  // namespace gamelab
