#include "gamelab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gamelab/hash.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {

std::string game_id(const GameSpec& s) {
  std::string id = "L" + std::to_string(s.lower) + "U" + std::to_string(s.upper) +
                   "G" + std::to_string(s.gap) + "B" + std::to_string(s.bonus);
  id += "-";
  id += points_rule_id(s.points);
  id += "-";
  id += bonus_rule_id(s.rule);
  return id;
}

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

std::string RunManifest::hash() const {
  Json j;
  j["tool_version"] = tool_version;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = input_hashes;
  return sha256_hex(canonical_dump(j));
}

Json manifest_to_json(const RunManifest& m) {
  Json j;
  j["tool_version"] = m.tool_version;
  j["seed"] = m.seed;
  j["config"] = m.config;
  j["inputs"] = m.input_hashes;
  if (!m.created_at.empty()) j["created_at"] = m.created_at;
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  m.tool_version = j.at("tool_version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config = j.at("config");
  if (j.contains("inputs"))
    m.input_hashes = j.at("inputs").get<std::map<std::string, std::string>>();
  if (j.contains("created_at")) m.created_at = j.at("created_at").get<std::string>();
  return m;
}

int HumanDataset::total_responses() const {
  int total = 0;
  for (const auto& [game, actions] : responses) total += int(actions.size());
  return total;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

HumanDataset ingest_human_csv(
    const std::string& path,
    const std::map<std::string, std::vector<int>>& action_sets,
    const IngestOptions& filters) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  HumanDataset out;
  out.source = path;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + path);
  {
    auto header = split_csv_line(line);
    if (header.size() != 3 || header[0] != "game_id" ||
        header[1] != "subject_id" || header[2] != "action")
      throw std::runtime_error(
          "expected header game_id,subject_id,action in " + path);
  }
  std::set<std::pair<std::string, std::string>> seen_pairs;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      out.filters.errors.push_back("line " + std::to_string(line_no) +
                                   ": expected game_id,subject_id,action");
      continue;
    }
    const std::string& game = fields[0];
    const std::string& subject = fields[1];
    auto set_it = action_sets.find(game);
    if (set_it == action_sets.end()) {
      out.filters.errors.push_back("line " + std::to_string(line_no) +
                                   ": unknown game_id " + game);
      continue;
    }
    if (!seen_pairs.insert({game, subject}).second)
      throw std::runtime_error("duplicate (game_id, subject_id) at line " +
                               std::to_string(line_no) + ": " + game + ", " +
                               subject);
    double value;
    try {
      std::size_t used = 0;
      value = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument(fields[2]);
    } catch (const std::exception&) {
      out.filters.errors.push_back("line " + std::to_string(line_no) +
                                   ": unparseable action " + fields[2]);
      continue;
    }
    if (value != std::floor(value)) {
      if (filters.whole_number_filter) {
        ++out.filters.not_whole;
        continue;
      }
      out.filters.errors.push_back("line " + std::to_string(line_no) +
                                   ": non-integer action " + fields[2]);
      continue;
    }
    int action = int(value);
    const auto& actions = set_it->second;
    if (std::find(actions.begin(), actions.end(), action) == actions.end()) {
      if (filters.range_filter) {
        ++out.filters.out_of_range;
        continue;
      }
      out.filters.errors.push_back("line " + std::to_string(line_no) +
                                   ": action " + fields[2] + " outside range");
      continue;
    }
    out.responses[game].push_back(action);
  }
  return out;
}

Json dataset_to_json(const HumanDataset& d) {
  Json j;
  j["source"] = d.source;
  j["responses"] = Json::object();
  for (const auto& [game, actions] : d.responses) j["responses"][game] = actions;
  j["filters"] = {{"out_of_range", d.filters.out_of_range},
                  {"not_whole", d.filters.not_whole},
                  {"errors", d.filters.errors}};
  return j;
}

HumanDataset dataset_from_json(const Json& j) {
  HumanDataset d;
  d.source = j.at("source").get<std::string>();
  for (auto& [game, actions] : j.at("responses").items())
    d.responses[game] = actions.get<std::vector<int>>();
  if (j.contains("filters")) {
    d.filters.out_of_range = j["filters"].at("out_of_range").get<int>();
    d.filters.not_whole = j["filters"].at("not_whole").get<int>();
    d.filters.errors =
        j["filters"].at("errors").get<std::vector<std::string>>();
  }
  return d;
}

Json model_to_json(const ModelDistributions& m) {
  Json j;
  j["name"] = m.name;
  j["games"] = Json::object();
  for (const auto& [game, actions] : m.actions) {
    Json g;
    g["actions"] = actions;
    g["probs"] = m.probs.at(game);
    j["games"][game] = std::move(g);
  }
  return j;
}

ModelDistributions model_from_json(const Json& j) {
  ModelDistributions m;
  m.name = j.at("name").get<std::string>();
  for (auto& [game, g] : j.at("games").items()) {
    m.actions[game] = g.at("actions").get<std::vector<int>>();
    m.probs[game] = g.at("probs").get<std::vector<double>>();
    if (m.actions[game].size() != m.probs[game].size())
      throw std::runtime_error("model " + m.name + " game " + game +
                               ": actions and probs differ in length");
  }
  return m;
}

RegressionTable subgroup_regression(
    const std::vector<GameComparison>& comparisons,
    const std::map<std::string, GameSpec>& specs,
    const std::vector<std::string>& by) {
  bool by_points = false, by_bonus = false;
  for (const auto& column : by) {
    if (column == "points_rule") by_points = true;
    else if (column == "bonus_rule") by_bonus = true;
    else throw std::invalid_argument("unknown grouping column " + column);
  }
  if (!by_points && !by_bonus)
    throw std::invalid_argument("no grouping columns requested");

  std::vector<PointsRule> points_levels;
  std::vector<BonusRule> bonus_levels;
  for (const auto& c : comparisons) {
    auto it = specs.find(c.game_id);
    if (it == specs.end())
      throw std::runtime_error("no game spec for " + c.game_id);
    const GameSpec& s = it->second;
    if (by_points && s.points != PointsRule::kN &&
        std::find(points_levels.begin(), points_levels.end(), s.points) ==
            points_levels.end())
      points_levels.push_back(s.points);
    if (by_bonus && s.rule != BonusRule::kCoordinateLow &&
        std::find(bonus_levels.begin(), bonus_levels.end(), s.rule) ==
            bonus_levels.end())
      bonus_levels.push_back(s.rule);
  }
  std::sort(points_levels.begin(), points_levels.end());
  std::sort(bonus_levels.begin(), bonus_levels.end());

  RegressionTable table;
  table.terms.push_back("const");
  for (PointsRule p : points_levels)
    table.terms.push_back(std::string("points:") + points_rule_id(p));
  for (BonusRule b : bonus_levels)
    table.terms.push_back(std::string("bonus:") + bonus_rule_id(b));

  std::vector<double> y;
  std::vector<std::vector<double>> rows;
  for (const auto& c : comparisons) {
    const GameSpec& s = specs.at(c.game_id);
    std::vector<double> row;
    row.push_back(1.0);
    for (PointsRule p : points_levels) row.push_back(s.points == p ? 1.0 : 0.0);
    for (BonusRule b : bonus_levels) row.push_back(s.rule == b ? 1.0 : 0.0);
    rows.push_back(std::move(row));
    y.push_back(c.llr);
  }
  table.fit = ols_robust(y, rows);
  return table;
}

namespace {

std::string epsilon_label(double epsilon) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", epsilon);
  return buf;
}

int action_index(const std::vector<int>& actions, int action,
                 const std::string& game, const std::string& who) {
  auto it = std::find(actions.begin(), actions.end(), action);
  if (it == actions.end())
    throw std::runtime_error("response " + std::to_string(action) +
                             " outside the action set of game " + game +
                             " for " + who);
  return int(it - actions.begin());
}

}  // namespace

EvaluationBundle run_evaluation(const std::vector<ComparisonTask>& tasks,
                                const EvaluationConfig& config,
                                const std::string& manifest_hash) {
  EvaluationBundle bundle;
  bundle.manifest_hash = manifest_hash;
  for (const auto& task : tasks) {
    // Resolve the per-game action sets and both model distributions once.
    struct GameRow {
      std::string id;
      std::vector<int> indices;             // responses as indices
      const std::vector<double>* probs_a;
      const std::vector<double>* probs_b;
    };
    std::vector<GameRow> rows;
    int excluded = 0;
    for (const auto& [game, actions_taken] : task.humans.responses) {
      if (task.exclude_unresolved && task.unresolved_games.count(game)) {
        ++excluded;
        continue;
      }
      auto a_it = task.model_a.probs.find(game);
      if (a_it == task.model_a.probs.end())
        throw std::runtime_error("missing model distribution: model " +
                                 task.model_a.name + ", game " + game);
      auto b_it = task.model_b.probs.find(game);
      if (b_it == task.model_b.probs.end())
        throw std::runtime_error("missing model distribution: model " +
                                 task.model_b.name + ", game " + game);
      const auto& actions = task.model_a.actions.at(game);
      const auto& actions_b = task.model_b.actions.at(game);
      if (actions != actions_b)
        throw std::runtime_error("models disagree on the action set of game " +
                                 game);
      GameRow row;
      row.id = game;
      for (int action : actions_taken)
        row.indices.push_back(
            action_index(actions, action, game, "model " + task.model_a.name));
      row.probs_a = &a_it->second;
      row.probs_b = &b_it->second;
      rows.push_back(std::move(row));
    }

    for (double epsilon : config.epsilons) {
      ComparisonBlock block;
      block.label = task.label;
      block.model_a = task.model_a.name;
      block.model_b = task.model_b.name;
      block.epsilon = epsilon;
      block.games_excluded = excluded;
      for (const auto& row : rows) {
        SmoothedModel a = smooth(*row.probs_a, epsilon);
        SmoothedModel b = smooth(*row.probs_b, epsilon);
        block.comparisons.push_back(game_llr(row.id, row.indices, a, b));
      }
      block.games_used = int(block.comparisons.size());
      std::uint64_t block_seed = derive_seed(
          config.seed, "eval/" + task.label + "/eps" + epsilon_label(epsilon), 0);
      block.report = aggregate(block.comparisons, config.bootstrap_draws,
                               block_seed, config.permutation_iterations);
      if (!task.specs.empty())
        block.regression = subgroup_regression(
            block.comparisons, task.specs, {"points_rule", "bonus_rule"});
      bundle.blocks.push_back(std::move(block));
    }

    if (config.coverage) {
      for (int which = 0; which < 2; ++which) {
        const ModelDistributions& model =
            which == 0 ? task.model_a : task.model_b;
        CoverageBlock cov;
        cov.label = task.label;
        cov.model = model.name;
        cov.games_excluded = excluded;
        std::vector<CoverageInput> inputs;
        for (const auto& row : rows) {
          CoverageInput input;
          input.responses = row.indices;
          input.model = which == 0 ? *row.probs_a : *row.probs_b;
          inputs.push_back(std::move(input));
        }
        cov.games_used = int(inputs.size());
        cov.summary = support_coverage(inputs);
        bundle.coverage.push_back(std::move(cov));
      }
    }
  }
  return bundle;
}

namespace {

Json report_to_json(const ComparisonReport& r) {
  Json j;
  j["n_games"] = r.n_games;
  j["mean"] = r.mean;
  j["bootstrap_se"] = r.bootstrap_se;
  j["ci_lower"] = r.ci_lower;
  j["ci_upper"] = r.ci_upper;
  j["sample_se"] = r.sample_se;
  j["between_var"] = r.between_var;
  j["within_mean"] = r.within_mean;
  j["best_predictor"] = {{"proportion", r.best_predictor.proportion},
                         {"lower", r.best_predictor.lower},
                         {"upper", r.best_predictor.upper},
                         {"successes", r.best_predictor.successes},
                         {"n", r.best_predictor.n}};
  j["wilcoxon_p"] = r.wilcoxon_p;
  j["permutation_p"] = r.permutation_p;
  return j;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

}  // namespace

Json bundle_to_json(const EvaluationBundle& b) {
  Json j;
  j["manifest_hash"] = b.manifest_hash;
  j["blocks"] = Json::array();
  for (const auto& block : b.blocks) {
    Json bj;
    bj["label"] = block.label;
    bj["model_a"] = block.model_a;
    bj["model_b"] = block.model_b;
    bj["epsilon"] = block.epsilon;
    bj["games_used"] = block.games_used;
    bj["games_excluded"] = block.games_excluded;
    bj["report"] = report_to_json(block.report);
    Json llrs = Json::object();
    for (const auto& c : block.comparisons) llrs[c.game_id] = c.llr;
    bj["game_llr"] = std::move(llrs);
    if (block.regression) {
      Json rj;
      rj["terms"] = block.regression->terms;
      rj["coef"] = block.regression->fit.coef;
      rj["robust_se"] = block.regression->fit.robust_se;
      rj["r2"] = block.regression->fit.r2;
      rj["n"] = block.regression->fit.n;
      bj["regression"] = std::move(rj);
    }
    j["blocks"].push_back(std::move(bj));
  }
  j["coverage"] = Json::array();
  for (const auto& cov : b.coverage) {
    Json cj;
    cj["label"] = cov.label;
    cj["model"] = cov.model;
    cj["games_used"] = cov.games_used;
    cj["games_excluded"] = cov.games_excluded;
    cj["share_argmax"] = cov.summary.share_argmax;
    cj["share_top3"] = cov.summary.share_top3;
    cj["share_positive"] = cov.summary.share_positive;
    cj["games_any"] = cov.summary.games_any;
    cj["games_all"] = cov.summary.games_all;
    j["coverage"].push_back(std::move(cj));
  }
  return j;
}

std::string bundle_to_markdown(const EvaluationBundle& b) {
  std::ostringstream out;
  out << "# Evaluation report\n\n";
  out << "Manifest: `" << b.manifest_hash << "`\n\n";
  out << "## Model comparisons\n\n";
  out << "| Comparison | eps | Games | Mean LLR (SE) | Best predictor (SE) | "
         "Wilcoxon p | Permutation p |\n";
  out << "|---|---|---|---|---|---|---|\n";
  for (const auto& block : b.blocks) {
    const auto& r = block.report;
    double prop_se = std::sqrt(r.best_predictor.proportion *
                               (1 - r.best_predictor.proportion) /
                               std::max(r.best_predictor.n, 1));
    out << "| " << block.label << " | " << epsilon_label(block.epsilon) << " | "
        << block.games_used << " | " << fixed3(r.mean) << " ("
        << fixed3(r.bootstrap_se) << ") | "
        << fixed3(r.best_predictor.proportion) << " (" << fixed3(prop_se)
        << ") | " << fixed3(r.wilcoxon_p) << " | " << fixed3(r.permutation_p)
        << " |\n";
  }
  if (!b.coverage.empty()) {
    out << "\n## Support coverage (unsmoothed)\n\n";
    out << "| Comparison | Model | Argmax % | Top-3 % | Positive % | Any-game % "
           "| All-game % |\n";
    out << "|---|---|---|---|---|---|---|\n";
    for (const auto& cov : b.coverage) {
      out << "| " << cov.label << " | " << cov.model << " | "
          << fixed3(100 * cov.summary.share_argmax) << " | "
          << fixed3(100 * cov.summary.share_top3) << " | "
          << fixed3(100 * cov.summary.share_positive) << " | "
          << fixed3(100 * cov.summary.games_any) << " | "
          << fixed3(100 * cov.summary.games_all) << " |\n";
    }
  }
  bool any_regression = false;
  for (const auto& block : b.blocks)
    if (block.regression) any_regression = true;
  if (any_regression) {
    out << "\n## Subgroup regressions\n\n";
    for (const auto& block : b.blocks) {
      if (!block.regression) continue;
      out << "### " << block.label << ", eps " << epsilon_label(block.epsilon)
          << "\n\n";
      out << "| Term | Coefficient | Robust SE |\n|---|---|---|\n";
      for (std::size_t t = 0; t < block.regression->terms.size(); ++t)
        out << "| " << block.regression->terms[t] << " | "
            << fixed3(block.regression->fit.coef[t]) << " | "
            << fixed3(block.regression->fit.robust_se[t]) << " |\n";
      out << "\nR^2 " << fixed3(block.regression->fit.r2) << ", n "
          << block.regression->fit.n << "\n\n";
    }
  }
  return out.str();
}

std::string bundle_to_csv(const EvaluationBundle& b) {
  std::ostringstream out;
  out << "label,model_a,model_b,epsilon,games_used,games_excluded,mean,"
         "bootstrap_se,sample_se,proportion,prop_lower,prop_upper,wilcoxon_p,"
         "permutation_p\n";
  char buf[512];
  for (const auto& block : b.blocks) {
    const auto& r = block.report;
    std::snprintf(buf, sizeof(buf),
                  "%s,%s,%s,%g,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,"
                  "%.10g\n",
                  block.label.c_str(), block.model_a.c_str(),
                  block.model_b.c_str(), block.epsilon, block.games_used,
                  block.games_excluded, r.mean, r.bootstrap_se, r.sample_se,
                  r.best_predictor.proportion, r.best_predictor.lower,
                  r.best_predictor.upper, r.wilcoxon_p, r.permutation_p);
    out << buf;
  }
  return out.str();
}

RunResult run_from_manifest(const std::string& manifest_path,
                            const std::string& out_dir) {
  namespace fs = std::filesystem;
  Json mj = read_json_file(manifest_path);
  RunManifest manifest = manifest_from_json(mj);
  fs::path base = fs::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path.string() : (base / path).string();
  };

  const Json& config = manifest.config;
  EvaluationConfig eval_config;
  eval_config.seed = manifest.seed;
  if (config.contains("epsilons"))
    eval_config.epsilons = config.at("epsilons").get<std::vector<double>>();
  if (config.contains("bootstrap_draws"))
    eval_config.bootstrap_draws = config.at("bootstrap_draws").get<int>();
  if (config.contains("permutation_iterations"))
    eval_config.permutation_iterations =
        config.at("permutation_iterations").get<int>();
  if (config.contains("coverage"))
    eval_config.coverage = config.at("coverage").get<bool>();

  // Hash every referenced input, then freeze the manifest hash.
  manifest.input_hashes.clear();
  for (const auto& tj : config.at("tasks")) {
    for (const char* key : {"humans", "model_a", "model_b"}) {
      std::string rel = tj.at(key).get<std::string>();
      manifest.input_hashes[rel] = file_sha256(resolve(rel));
    }
  }
  std::string manifest_hash = manifest.hash();

  std::vector<ComparisonTask> tasks;
  for (const auto& tj : config.at("tasks")) {
    ComparisonTask task;
    task.label = tj.at("label").get<std::string>();
    task.model_a = model_from_json(read_json_file(resolve(tj.at("model_a"))));
    task.model_b = model_from_json(read_json_file(resolve(tj.at("model_b"))));
    IngestOptions filters;
    task.humans = ingest_human_csv(resolve(tj.at("humans")),
                                   task.model_a.actions, filters);
    if (tj.contains("exclude_unresolved"))
      task.exclude_unresolved = tj.at("exclude_unresolved").get<bool>();
    if (tj.contains("unresolved_games"))
      for (const auto& g : tj.at("unresolved_games"))
        task.unresolved_games.insert(g.get<std::string>());
    tasks.push_back(std::move(task));
  }

  EvaluationBundle bundle = run_evaluation(tasks, eval_config, manifest_hash);

  fs::create_directories(out_dir);
  RunResult result;
  result.manifest_hash = manifest_hash;
  auto write_text = [&](const std::string& name, const std::string& text) {
    fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    result.outputs.push_back(path.string());
  };
  write_text("report.json", canonical_dump(bundle_to_json(bundle)));
  write_text("report.md", bundle_to_markdown(bundle));
  write_text("report.csv",
             "# manifest " + manifest_hash + "\n" + bundle_to_csv(bundle));
  return result;
}

}  // namespace gamelab
