#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gamelab/agents.hpp"
#include "gamelab/backend.hpp"
#include "gamelab/equilibria.hpp"
#include "gamelab/games.hpp"
#include "gamelab/optimize.hpp"
#include "gamelab/pipeline.hpp"
#include "gamelab/render.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/serialize.hpp"
#include "gamelab/stats.hpp"

namespace {

using namespace gamelab;

std::vector<int> offsets_from_name(const std::string& name) {
  if (name == "4-19") return default_offsets();
  if (name == "4-20") return wide_offsets();
  throw CLI::ValidationError("--offsets must be 4-19 or 4-20");
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << canonical_dump(j);
  } else {
    write_json_file(out_path, j);
    std::cout << "wrote " << out_path << "\n";
  }
}

GameSpec load_spec(const std::string& path) {
  return game_from_json(read_json_file(path));
}

SymmetricGame load_matrix_or_spec(const std::string& spec_path,
                                  const std::string& matrix_path) {
  if (!matrix_path.empty()) {
    Json j = read_json_file(matrix_path);
    SymmetricGame g;
    g.actions = j.at("actions").get<std::vector<int>>();
    g.payoff = j.at("payoff").get<std::vector<std::vector<long long>>>();
    return g;
  }
  return payoff_matrix(load_spec(spec_path));
}

// Family dedup reconciliation, kept next to the numbers it explains.
Json dedup_summary(const FamilyIndex& index) {
  Json j;
  j["raw_count"] = index.raw_count;
  j["unique_count"] = index.unique.size();
  j["published_count"] = 883320;
  j["digest"] = index.digest;
  j["reconciliation"] =
      "Collapsing only the separation parameter for the seven rules that "
      "ignore it leaves 38400 * (4*4 + 7) = 883200 combinations, 120 fewer "
      "than the published 883320; exact payoff-matrix equality additionally "
      "merges bonus rules that coincide on small boards (for example, a "
      "separation larger than the board makes several rules pay never or "
      "always), giving the unique_count reported here. The published figure "
      "sits between the two, so it was not produced by either rule; the gap "
      "is documented rather than reverse-engineered.";
  return j;
}

int run_self_checks() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    if (!ok) ++failures;
  };

  {
    GameSpec basic{11, 20, 1, 20, PointsRule::kN, BonusRule::kGapLower};
    NashResult nash = enumerate_nash(payoff_matrix(basic));
    std::vector<Rational> want = {0,
                                  0,
                                  0,
                                  0,
                                  Rational(1, 4),
                                  Rational(1, 4),
                                  Rational(1, 5),
                                  Rational(3, 20),
                                  Rational(1, 10),
                                  Rational(1, 20)};
    bool ok = nash.resolved;
    bool found = false;
    for (const auto& e : nash.equilibria)
      if (e.symmetric() && e.row.probs == want) found = true;
    report("solver finds the pinned 11-20 mixed equilibrium", ok && found);
  }
  {
    SmoothedModel m = smooth({1, 0, 0, 0, 0, 0, 0, 0, 0, 0}, 0.2);
    bool ok = std::abs(m.probs[0] - 0.82) < 1e-12;
    for (int i = 1; i < 10; ++i) ok = ok && std::abs(m.probs[i] - 0.02) < 1e-12;
    report("smoothing arithmetic (0.82 / 0.02)", ok);
  }
  {
    ProportionInterval ci = clopper_pearson(10, 10);
    bool ok = std::abs(ci.lower - std::pow(0.025, 0.1)) < 1e-9 && ci.upper == 1.0;
    report("exact binomial interval closed form at x = n", ok);
  }
  {
    std::vector<GameSpec> specs;
    std::vector<Rational> mass;
    for (int lower = 1; lower <= 10; ++lower) {
      specs.push_back({lower, lower + 4, 1, 3, PointsRule::kN, BonusRule::kEqual});
      mass.push_back(Rational(1, 10));
    }
    FamilyIndex index;
    index.unique = specs;
    index.weighted_mass = mass;
    index.raw_count = specs.size();
    index.digest = "selfcheck";
    GameSampleFrame a = sample_games(index, SampleScheme::kWeighted, 5, 7);
    GameSampleFrame b = sample_games(index, SampleScheme::kWeighted, 5, 7);
    bool ok = a.games.size() == 5 && a.games == b.games;
    report("seeded sampling is deterministic", ok);
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric money-request games: enumeration, equilibria, "
               "agents, fitting, evaluation"};
  app.require_subcommand(0, 1);
  bool offline = false;
  bool check = false;
  app.add_flag("--offline", offline, "forbid all network access");
  app.add_flag("--check", check,
               "run built-in self checks; exit nonzero on failure");

  // family
  auto* family = app.add_subcommand("family", "game family operations");
  family->require_subcommand(1);
  std::string offsets_name = "4-19";
  auto* fam_enum = family->add_subcommand("enumerate", "count raw parameter combinations");
  fam_enum->add_option("--offsets", offsets_name, "offset preset (4-19 or 4-20)");
  auto* fam_dedup = family->add_subcommand("dedup", "deduplicate by exact payoff matrix");
  std::string dedup_out = "population.jsonl";
  fam_dedup->add_option("--offsets", offsets_name, "offset preset (4-19 or 4-20)");
  fam_dedup->add_option("--out", dedup_out, "population file to write");
  auto* fam_sample = family->add_subcommand("sample", "draw games from a population");
  std::string population_path, sample_out;
  std::size_t sample_n = 1500;
  std::string scheme_name = "weighted";
  std::uint64_t seed = 0;
  fam_sample->add_option("--population", population_path, "population file")->required();
  fam_sample->add_option("--n", sample_n, "number of games");
  fam_sample->add_option("--scheme", scheme_name, "uniform or weighted");
  fam_sample->add_option("--seed", seed, "root seed");
  fam_sample->add_option("--out", sample_out, "frame file to write");

  // game
  auto* game = app.add_subcommand("game", "single-game operations");
  game->require_subcommand(1);
  std::string spec_path, matrix_path, out_path;
  auto* game_render = game->add_subcommand("render", "render instruction text");
  game_render->add_option("--spec", spec_path, "game spec JSON")->required();
  auto* game_matrix = game->add_subcommand("matrix", "print the payoff matrix");
  game_matrix->add_option("--spec", spec_path, "game spec JSON")->required();
  auto* game_template =
      game->add_subcommand("template", "print the builtin instruction template");
  game_template->add_option("--out", out_path, "output file");

  // eq
  auto* eq = app.add_subcommand("eq", "equilibrium operations");
  eq->require_subcommand(1);
  double solve_budget = 30.0;
  auto* eq_solve = eq->add_subcommand("solve", "enumerate Nash equilibria");
  eq_solve->add_option("--spec", spec_path, "game spec JSON");
  eq_solve->add_option("--matrix", matrix_path, "payoff matrix JSON");
  eq_solve->add_option("--budget", solve_budget, "time budget in seconds");
  eq_solve->add_option("--out", out_path, "output file");
  auto* eq_select = eq->add_subcommand("select", "select one equilibrium");
  eq_select->add_option("--spec", spec_path, "game spec JSON");
  eq_select->add_option("--matrix", matrix_path, "payoff matrix JSON");
  eq_select->add_option("--budget", solve_budget, "time budget in seconds");
  eq_select->add_option("--out", out_path, "output file");
  auto* eq_stats = eq->add_subcommand("stats", "selection statistics over a frame");
  std::string frame_path;
  std::size_t stats_limit = 0;
  eq_stats->add_option("--frame", frame_path, "sampled frame JSON")->required();
  eq_stats->add_option("--budget", solve_budget, "per-game budget in seconds");
  eq_stats->add_option("--limit", stats_limit, "only the first N games");
  eq_stats->add_option("--out", out_path, "output file");

  // elicit
  auto* elicit = app.add_subcommand("elicit", "draw responses from an agent model");
  std::string model_path, settings_path, backend_name = "fixture";
  std::string fixture_path, cache_dir, http_model = "gpt-4o";
  int draw_n = 100;
  elicit->add_option("--model", model_path, "agent model JSON")->required();
  elicit->add_option("--settings", settings_path, "settings JSON (array)")->required();
  elicit->add_option("--n", draw_n, "draws per setting");
  elicit->add_option("--seed", seed, "root seed");
  elicit->add_option("--backend", backend_name, "fixture or http");
  elicit->add_option("--fixture", fixture_path, "fixture replies JSON");
  elicit->add_option("--cache", cache_dir, "response cache directory");
  elicit->add_option("--http-model", http_model, "chat model name for http");
  elicit->add_option("--out", out_path, "output file");

  // optimize
  auto* optimize = app.add_subcommand("optimize", "fit agent populations");
  optimize->require_subcommand(1);
  auto* opt_select = optimize->add_subcommand("select", "fit mixture weights");
  std::string candidates_dir, target_path, measure_name = "cdf-abs";
  int restarts = 64;
  opt_select->add_option("--candidates", candidates_dir, "directory of candidate distribution JSON files")->required();
  opt_select->add_option("--target", target_path, "target distribution JSON")->required();
  opt_select->add_option("--measure", measure_name, "forward-kl, cdf-abs, mae, emd");
  opt_select->add_option("--restarts", restarts, "random restarts");
  opt_select->add_option("--seed", seed, "root seed");
  opt_select->add_option("--out", out_path, "output file");
  auto* opt_construct = optimize->add_subcommand("construct", "fit integer trait parameters");
  std::string template_path, box_path, budget_str = "5+15";
  std::string targets_path, evaluator_path;
  int slots = 1;
  opt_construct->add_option("--template", template_path, "prompt template JSON")->required();
  opt_construct->add_option("--box", box_path, "integer box JSON")->required();
  opt_construct->add_option("--budget", budget_str, "init+guided evaluations");
  opt_construct->add_option("--targets", targets_path, "target distributions JSON (array)")->required();
  opt_construct->add_option("--evaluator", evaluator_path, "replayable evaluation table JSON")->required();
  opt_construct->add_option("--slots", slots, "agent slots");
  opt_construct->add_option("--measure", measure_name, "distance measure");
  opt_construct->add_option("--seed", seed, "root seed");
  opt_construct->add_option("--out", out_path, "output file");

  // eval
  auto* eval = app.add_subcommand("eval", "statistical evaluation");
  eval->require_subcommand(1);
  std::string humans_path, model_a_path, model_b_path, specs_path, label = "compare";
  double epsilon = 0.2;
  std::vector<double> epsilons = {0.05, 0.1, 0.2, 0.3};
  int bootstrap_draws = 10000, permutation_iterations = 100000;
  auto* eval_compare = eval->add_subcommand("compare", "two models on one dataset");
  eval_compare->add_option("--humans", humans_path, "responses CSV")->required();
  eval_compare->add_option("--model-a", model_a_path, "model distributions JSON")->required();
  eval_compare->add_option("--model-b", model_b_path, "model distributions JSON")->required();
  eval_compare->add_option("--epsilon", epsilon, "smoothing epsilon");
  eval_compare->add_option("--bootstrap", bootstrap_draws, "bootstrap resamples");
  eval_compare->add_option("--permutations", permutation_iterations, "permutation iterations");
  eval_compare->add_option("--seed", seed, "root seed");
  eval_compare->add_option("--label", label, "block label");
  eval_compare->add_option("--out", out_path, "output file");
  auto* eval_grid = eval->add_subcommand("grid", "comparison across the epsilon grid");
  eval_grid->add_option("--humans", humans_path, "responses CSV")->required();
  eval_grid->add_option("--model-a", model_a_path, "model distributions JSON")->required();
  eval_grid->add_option("--model-b", model_b_path, "model distributions JSON")->required();
  eval_grid->add_option("--epsilons", epsilons, "comma-separated grid")->delimiter(',');
  eval_grid->add_option("--bootstrap", bootstrap_draws, "bootstrap resamples");
  eval_grid->add_option("--permutations", permutation_iterations, "permutation iterations");
  eval_grid->add_option("--seed", seed, "root seed");
  eval_grid->add_option("--label", label, "block label");
  eval_grid->add_option("--out", out_path, "output file");
  auto* eval_coverage = eval->add_subcommand("coverage", "support coverage of one model");
  eval_coverage->add_option("--humans", humans_path, "responses CSV")->required();
  eval_coverage->add_option("--model", model_a_path, "model distributions JSON")->required();
  eval_coverage->add_option("--out", out_path, "output file");
  auto* eval_regress = eval->add_subcommand("regress", "subgroup regression of per-game LLRs");
  std::string by = "points_rule,bonus_rule";
  eval_regress->add_option("--humans", humans_path, "responses CSV")->required();
  eval_regress->add_option("--model-a", model_a_path, "model distributions JSON")->required();
  eval_regress->add_option("--model-b", model_b_path, "model distributions JSON")->required();
  eval_regress->add_option("--epsilon", epsilon, "smoothing epsilon");
  eval_regress->add_option("--specs", specs_path, "frame JSON carrying game specs")->required();
  eval_regress->add_option("--by", by, "grouping columns");
  eval_regress->add_option("--out", out_path, "output file");

  // run
  auto* run = app.add_subcommand("run", "execute a manifest end to end");
  std::string manifest_path, run_out_dir = "out";
  run->add_option("--manifest", manifest_path, "manifest JSON")->required();
  run->add_option("--out", run_out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check) return run_self_checks();

    if (fam_enum->parsed()) {
      auto offsets = offsets_from_name(offsets_name);
      std::uint64_t count = enumerate_family(offsets, [](const GameSpec&) {});
      Json j;
      j["offsets"] = offsets_name;
      j["raw_count"] = count;
      emit(j, "");
      return 0;
    }
    if (fam_dedup->parsed()) {
      FamilyIndex index = dedup_family(offsets_from_name(offsets_name));
      write_population(dedup_out, index);
      Json j = dedup_summary(index);
      j["population"] = dedup_out;
      emit(j, "");
      return 0;
    }
    if (fam_sample->parsed()) {
      FamilyIndex index = read_population(population_path);
      SampleScheme scheme;
      if (scheme_name == "weighted") scheme = SampleScheme::kWeighted;
      else if (scheme_name == "uniform") scheme = SampleScheme::kUniform;
      else throw CLI::ValidationError("--scheme must be uniform or weighted");
      GameSampleFrame frame = sample_games(index, scheme, sample_n, seed);
      emit(frame_to_json(frame), sample_out);
      return 0;
    }
    if (game_render->parsed()) {
      std::cout << render_instructions(load_spec(spec_path)) << "\n";
      return 0;
    }
    if (game_matrix->parsed()) {
      emit(matrix_to_json(payoff_matrix(load_spec(spec_path))), "");
      return 0;
    }
    if (game_template->parsed()) {
      emit(template_to_json(builtin_template_v1()), out_path);
      return 0;
    }
    if (eq_solve->parsed()) {
      SymmetricGame g = load_matrix_or_spec(spec_path, matrix_path);
      SolveOptions opt;
      opt.time_budget_seconds = solve_budget;
      emit(nash_to_json(enumerate_nash(g, opt)), out_path);
      return 0;
    }
    if (eq_select->parsed()) {
      SymmetricGame g = load_matrix_or_spec(spec_path, matrix_path);
      SolveOptions opt;
      opt.time_budget_seconds = solve_budget;
      emit(selection_to_json(hs_select(g, opt)), out_path);
      return 0;
    }
    if (eq_stats->parsed()) {
      GameSampleFrame frame = frame_from_json(read_json_file(frame_path));
      SolveOptions opt;
      opt.time_budget_seconds = solve_budget;
      std::size_t n = frame.games.size();
      if (stats_limit > 0) n = std::min(n, stats_limit);
      std::map<std::string, int> provenance_counts;
      int resolved = 0, degenerate = 0, pure = 0;
      for (std::size_t i = 0; i < n; ++i) {
        SelectionOutcome outcome = hs_select(payoff_matrix(frame.games[i]), opt);
        ++provenance_counts[provenance_id(outcome.provenance)];
        if (outcome.resolved) ++resolved;
        if (outcome.degenerate) ++degenerate;
        if (outcome.resolved) {
          bool is_pure = false;
          for (const auto& p : outcome.selected.row.probs)
            if (p == 1) is_pure = true;
          if (is_pure) ++pure;
        }
      }
      Json j;
      j["games"] = n;
      j["resolved"] = resolved;
      j["degenerate_flagged"] = degenerate;
      j["selected_pure"] = pure;
      j["provenance"] = provenance_counts;
      emit(j, out_path);
      return 0;
    }
    if (elicit->parsed()) {
      AgentModel model = agent_from_json(read_json_file(model_path));
      Json settings_json = read_json_file(settings_path);
      std::unique_ptr<FixtureBackend> fixture;
      std::unique_ptr<HttpBackend> http;
      std::unique_ptr<ResponseCache> cache;
      std::unique_ptr<CachedBackend> cached;
      ChatBackend* backend = nullptr;
      if (backend_name == "fixture") {
        fixture = std::make_unique<FixtureBackend>();
        if (!fixture_path.empty()) fixture->load_file(fixture_path);
        backend = fixture.get();
      } else if (backend_name == "http") {
        http = std::make_unique<HttpBackend>(http_model, offline);
        backend = http.get();
      } else {
        throw CLI::ValidationError("--backend must be fixture or http");
      }
      if (!cache_dir.empty()) {
        cache = std::make_unique<ResponseCache>(cache_dir);
        cached = std::make_unique<CachedBackend>(backend, cache.get());
        backend = cached.get();
      }
      Json out = Json::array();
      for (const auto& sj : settings_json) {
        Setting setting = setting_from_json(sj);
        ResponseDistribution d =
            elicit_distribution(model, setting, draw_n, seed, backend);
        out.push_back(distribution_to_json(d));
      }
      emit(out, out_path);
      return 0;
    }
    if (opt_select->parsed()) {
      namespace fs = std::filesystem;
      std::vector<std::string> files;
      for (const auto& entry : fs::directory_iterator(candidates_dir))
        if (entry.path().extension() == ".json")
          files.push_back(entry.path().string());
      std::sort(files.begin(), files.end());
      if (files.empty())
        throw std::runtime_error("no candidate .json files in " + candidates_dir);
      std::vector<ResponseDistribution> candidates;
      for (const auto& f : files)
        candidates.push_back(distribution_from_json(read_json_file(f)));
      ResponseDistribution target =
          distribution_from_json(read_json_file(target_path));
      MixtureFit fit = select_mixture(candidates, target,
                                      measure_from_id(measure_name), restarts,
                                      seed);
      Json j = mixture_fit_to_json(fit);
      j["candidates"] = files;
      j["measure"] = measure_name;
      emit(j, out_path);
      return 0;
    }
    if (opt_construct->parsed()) {
      Json tj = read_json_file(template_path);
      PromptSpec prompt;
      prompt.preamble = tj.value("preamble", "");
      prompt.persona = tj.at("persona").get<std::string>();
      prompt.explanation = tj.value("explanation", "");
      Json bj = read_json_file(box_path);
      IntegerBox box;
      box.names = bj.at("names").get<std::vector<std::string>>();
      box.lower = bj.at("lower").get<std::vector<int>>();
      box.upper = bj.at("upper").get<std::vector<int>>();
      auto plus = budget_str.find('+');
      if (plus == std::string::npos)
        throw CLI::ValidationError("--budget must look like 5+15");
      ConstructOptions options;
      options.init_budget = std::stoi(budget_str.substr(0, plus));
      options.guided_budget = std::stoi(budget_str.substr(plus + 1));
      std::vector<ResponseDistribution> targets;
      for (const auto& t : read_json_file(targets_path))
        targets.push_back(distribution_from_json(t));
      Json table = read_json_file(evaluator_path);
      ConstructEvaluator evaluator =
          [&table](const std::vector<int>& params) {
            std::string key;
            for (std::size_t i = 0; i < params.size(); ++i) {
              if (i) key += ',';
              key += std::to_string(params[i]);
            }
            if (!table.contains(key))
              throw std::runtime_error(
                  "evaluation table has no entry for parameters " + key);
            std::vector<ResponseDistribution> out;
            for (const auto& d : table.at(key))
              out.push_back(distribution_from_json(d));
            return out;
          };
      ParamFit fit =
          construct_params(prompt, slots, box, targets,
                           measure_from_id(measure_name), evaluator, options,
                           seed);
      Json j = param_fit_to_json(fit);
      j["measure"] = measure_name;
      emit(j, out_path);
      return 0;
    }
    if (eval_compare->parsed() || eval_grid->parsed()) {
      ComparisonTask task;
      task.label = label;
      task.model_a = model_from_json(read_json_file(model_a_path));
      task.model_b = model_from_json(read_json_file(model_b_path));
      task.humans = ingest_human_csv(humans_path, task.model_a.actions, {});
      EvaluationConfig config;
      config.seed = seed;
      config.bootstrap_draws = bootstrap_draws;
      config.permutation_iterations = permutation_iterations;
      config.coverage = false;
      config.epsilons =
          eval_compare->parsed() ? std::vector<double>{epsilon} : epsilons;
      RunManifest manifest;
      manifest.seed = seed;
      manifest.config = {{"epsilons", config.epsilons},
                         {"bootstrap_draws", bootstrap_draws},
                         {"permutation_iterations", permutation_iterations}};
      manifest.input_hashes[humans_path] = file_sha256(humans_path);
      manifest.input_hashes[model_a_path] = file_sha256(model_a_path);
      manifest.input_hashes[model_b_path] = file_sha256(model_b_path);
      EvaluationBundle bundle =
          run_evaluation({task}, config, manifest.hash());
      emit(bundle_to_json(bundle), out_path);
      return 0;
    }
    if (eval_coverage->parsed()) {
      ModelDistributions model = model_from_json(read_json_file(model_a_path));
      HumanDataset humans = ingest_human_csv(humans_path, model.actions, {});
      std::vector<CoverageInput> inputs;
      for (const auto& [game, actions_taken] : humans.responses) {
        CoverageInput input;
        const auto& actions = model.actions.at(game);
        for (int a : actions_taken) {
          auto it = std::find(actions.begin(), actions.end(), a);
          input.responses.push_back(int(it - actions.begin()));
        }
        input.model = model.probs.at(game);
        inputs.push_back(std::move(input));
      }
      CoverageSummary s = support_coverage(inputs);
      Json j;
      j["model"] = model.name;
      j["games"] = inputs.size();
      j["share_argmax"] = s.share_argmax;
      j["share_top3"] = s.share_top3;
      j["share_positive"] = s.share_positive;
      j["games_any"] = s.games_any;
      j["games_all"] = s.games_all;
      emit(j, out_path);
      return 0;
    }
    if (eval_regress->parsed()) {
      ComparisonTask task;
      task.model_a = model_from_json(read_json_file(model_a_path));
      task.model_b = model_from_json(read_json_file(model_b_path));
      task.humans = ingest_human_csv(humans_path, task.model_a.actions, {});
      GameSampleFrame frame = frame_from_json(read_json_file(specs_path));
      std::map<std::string, GameSpec> specs;
      for (const auto& s : frame.games) specs[game_id(s)] = s;
      std::vector<GameComparison> comparisons;
      for (const auto& [game, actions_taken] : task.humans.responses) {
        const auto& actions = task.model_a.actions.at(game);
        std::vector<int> indices;
        for (int a : actions_taken) {
          auto it = std::find(actions.begin(), actions.end(), a);
          indices.push_back(int(it - actions.begin()));
        }
        SmoothedModel ma = smooth(task.model_a.probs.at(game), epsilon);
        SmoothedModel mb = smooth(task.model_b.probs.at(game), epsilon);
        comparisons.push_back(game_llr(game, indices, ma, mb));
      }
      std::vector<std::string> columns;
      std::istringstream in(by);
      std::string column;
      while (std::getline(in, column, ',')) columns.push_back(column);
      RegressionTable table = subgroup_regression(comparisons, specs, columns);
      Json j;
      j["terms"] = table.terms;
      j["coef"] = table.fit.coef;
      j["robust_se"] = table.fit.robust_se;
      j["classical_se"] = table.fit.classical_se;
      j["r2"] = table.fit.r2;
      j["adj_r2"] = table.fit.adj_r2;
      j["n"] = table.fit.n;
      emit(j, out_path);
      return 0;
    }
    if (run->parsed()) {
      RunResult result = run_from_manifest(manifest_path, run_out_dir);
      Json j;
      j["manifest_hash"] = result.manifest_hash;
      j["outputs"] = result.outputs;
      emit(j, "");
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::cout << app.help();
  return 0;
}
