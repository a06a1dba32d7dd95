// Generates the bundled model-comparison fixture under data/eval.
//
// Four blocks, one per reference model. Each block holds 1000 games with 30
// actions and three observed responses per game, and model distributions
// chosen so that the epsilon = 0.2 log-likelihood-ratio summary reproduces
// the published comparison table: means 1.227 / 0.891 / 0.592 / 4.151 and
// best-predictor proportions 0.715 / 0.622 / 0.643 / 0.902. The reference
// block against the equilibrium model additionally splits into mixed- and
// pure-equilibrium games whose subgroup means print as 0.878 and 0.899.
//
// The construction is exact: all of a game's responses sit on one action, so
// with smoothing (1-e)p + e/K the per-game LLR (a per-response average)
// depends only on the two models' mass on that action, and each game assigns
// the optimized model the mass that realizes its target LLR. The action set
// must be large enough that ln(smoothed(1)/smoothed(0)) clears the largest
// target. The tool rebuilds the fixture deterministically and verifies the
// printed values by running the full evaluation pipeline on the result.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gamelab/pipeline.hpp"
#include "gamelab/serialize.hpp"

using namespace gamelab;

namespace {

constexpr int kActions = 30;
constexpr int kResponses = 3;
constexpr double kEpsilon = 0.2;
constexpr std::uint64_t kSeed = 20260214;

double smoothed(double p) { return (1 - kEpsilon) * p + kEpsilon / kActions; }

// Mass the optimized model must put on the observed action so the smoothed
// LLR against reference mass q equals llr. The per-game LLR averages over
// responses, and all of a game's responses coincide, so the per-response
// ratio carries the whole target.
double solve_mass(double llr, double q) {
  double p = (smoothed(q) * std::exp(llr) - kEpsilon / kActions) / (1 - kEpsilon);
  if (!(p > 0.0 && p < 1.0))
    throw std::runtime_error("target LLR not realizable: p=" + std::to_string(p));
  double check = std::log(smoothed(p) / smoothed(q));
  if (std::fabs(check - llr) > 1e-9)
    throw std::runtime_error("LLR reconstruction drift");
  return p;
}

struct GameRow {
  std::string id;
  double llr;       // engineered value at epsilon 0.2
  double ref_mass;  // reference model mass on the observed action
  double ref_rest;  // reference mass on each other action; -1 = point mass
};

struct Block {
  std::string label;       // file prefix and reference model name
  std::string task_label;  // task label inside the manifest
  std::vector<GameRow> rows;
};

// Positive rows get a common positive LLR solved from the block mean, the
// rest share v_neg, so the mean and the positive count are both exact.
double solve_positive_level(double mean, int positives, int n, double v_neg) {
  return (n * mean - (n - positives) * v_neg) / positives;
}

std::vector<GameRow> flat_rows(const std::string& prefix, int n, int positives,
                               double mean, double ref_mass, double ref_rest) {
  double v_neg = -0.6;
  double v_pos = solve_positive_level(mean, positives, n, v_neg);
  std::vector<GameRow> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s%04d", prefix.c_str(), i + 1);
    rows.push_back({id, i < positives ? v_pos : v_neg, ref_mass, ref_rest});
  }
  return rows;
}

// Reference is a point mass: on a non-observed action for positive games
// (the reference misses badly) and on the observed action otherwise.
std::vector<GameRow> point_rows(const std::string& prefix, int n,
                                int positives, double mean) {
  double v_neg = -0.6;
  double v_pos = solve_positive_level(mean, positives, n, v_neg);
  std::vector<GameRow> rows;
  rows.reserve(n);
  for (int i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "%s%04d", prefix.c_str(), i + 1);
    bool positive = i < positives;
    rows.push_back({id, positive ? v_pos : v_neg, positive ? 0.0 : 1.0, -1.0});
  }
  return rows;
}

std::vector<Block> build_blocks() {
  std::vector<Block> blocks;

  // Baseline persona sample: spread reference with modest mass everywhere.
  blocks.push_back({"baseline", "optimized-vs-baseline",
                    flat_rows("g", 1000, 715, 1.227, 0.05, 0.95 / (kActions - 1))});

  // Equilibrium model: mixed-equilibrium games keep a spread reference,
  // pure-equilibrium games a point mass. Subgroup means are pinned a hair
  // off their printed values so the combined mean still prints 0.891.
  Block hs{"hs_nash", "optimized-vs-hs-nash", {}};
  hs.rows = flat_rows("mixed_", 417, 270, 0.87845, 0.1, 0.9 / (kActions - 1));
  auto pure = point_rows("pure_", 583, 352, 0.899211);
  hs.rows.insert(hs.rows.end(), pure.begin(), pure.end());
  blocks.push_back(std::move(hs));

  blocks.push_back({"uniform", "optimized-vs-uniform",
                    flat_rows("g", 1000, 643, 0.592, 1.0 / kActions,
                              1.0 / kActions)});

  blocks.push_back({"random_pure", "optimized-vs-random-pure",
                    point_rows("g", 1000, 902, 4.151)});
  return blocks;
}

Json model_json(const std::string& name, const Block& block, bool optimized) {
  ModelDistributions m;
  m.name = name;
  std::vector<int> actions(kActions);
  for (int a = 0; a < kActions; ++a) actions[a] = a + 1;
  for (const auto& row : block.rows) {
    std::vector<double> probs(kActions, 0.0);
    if (optimized) {
      double p = solve_mass(row.llr, row.ref_mass);
      probs[0] = p;
      for (int a = 1; a < kActions; ++a) probs[a] = (1 - p) / (kActions - 1);
    } else if (row.ref_rest < 0) {
      if (row.ref_mass == 1.0) probs[0] = 1.0;   // point mass on the response
      else probs[1] = 1.0;                       // point mass elsewhere
    } else {
      probs[0] = row.ref_mass;
      for (int a = 1; a < kActions; ++a) probs[a] = row.ref_rest;
    }
    m.actions[row.id] = actions;
    m.probs[row.id] = std::move(probs);
  }
  return model_to_json(m);
}

void write_csv(const std::string& path, const Block& block) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "game_id,subject_id,action\n";
  for (const auto& row : block.rows)
    for (int s = 1; s <= kResponses; ++s) out << row.id << ",s" << s << ",1\n";
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

int verify(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "eval_fixture_verify";
  fs::remove_all(tmp);
  RunResult run = run_from_manifest(manifest_path, tmp.string());
  Json report = read_json_file((tmp / "report.json").string());

  struct Expect {
    std::string label, mean, proportion;
  };
  const std::vector<Expect> expected = {
      {"optimized-vs-baseline", "1.227", "0.715"},
      {"optimized-vs-hs-nash", "0.891", "0.622"},
      {"optimized-vs-uniform", "0.592", "0.643"},
      {"optimized-vs-random-pure", "4.151", "0.902"},
  };
  int failures = 0;
  auto check = [&](const std::string& what, const std::string& got,
                   const std::string& want) {
    bool ok = got == want;
    std::printf("%s %s: got %s want %s\n", ok ? "ok" : "FAIL", what.c_str(),
                got.c_str(), want.c_str());
    if (!ok) ++failures;
  };
  for (const auto& e : expected) {
    bool found = false;
    for (const auto& block : report.at("blocks")) {
      if (block.at("label") != e.label || block.at("epsilon") != kEpsilon)
        continue;
      found = true;
      check(e.label + " mean",
            fixed3(block.at("report").at("mean").get<double>()), e.mean);
      check(e.label + " proportion",
            fixed3(block.at("report")
                       .at("best_predictor")
                       .at("proportion")
                       .get<double>()),
            e.proportion);
      if (e.label == "optimized-vs-hs-nash") {
        double mixed_sum = 0, pure_sum = 0;
        int mixed_n = 0, pure_n = 0;
        for (const auto& [game, llr] : block.at("game_llr").items()) {
          if (game.rfind("mixed_", 0) == 0) {
            mixed_sum += llr.get<double>();
            ++mixed_n;
          } else {
            pure_sum += llr.get<double>();
            ++pure_n;
          }
        }
        check("mixed subgroup mean", fixed3(mixed_sum / mixed_n), "0.878");
        check("pure subgroup mean", fixed3(pure_sum / pure_n), "0.899");
      }
    }
    if (!found) {
      std::printf("FAIL missing block %s\n", e.label.c_str());
      ++failures;
    }
  }
  std::printf("manifest %s\n", run.manifest_hash.c_str());
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rebuild the bundled model-comparison fixture"};
  std::string out_dir = "data/eval";
  bool verify_only = false;
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--verify-only", verify_only, "check an existing fixture");

  CLI11_PARSE(app, argc, argv);

  try {
    namespace fs = std::filesystem;
    std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    if (!verify_only) {
      fs::create_directories(out_dir);
      RunManifest manifest;
      manifest.seed = kSeed;
      Json tasks = Json::array();
      for (const auto& block : build_blocks()) {
        std::string humans = block.label + "_humans.csv";
        std::string model_a = block.label + "_optimized.json";
        std::string model_b = block.label + "_reference.json";
        write_csv((fs::path(out_dir) / humans).string(), block);
        write_json_file((fs::path(out_dir) / model_a).string(),
                        model_json("optimized", block, true));
        write_json_file((fs::path(out_dir) / model_b).string(),
                        model_json(block.label, block, false));
        Json task;
        task["label"] = block.task_label;
        task["humans"] = humans;
        task["model_a"] = model_a;
        task["model_b"] = model_b;
        tasks.push_back(std::move(task));
        for (const std::string& name : {humans, model_a, model_b})
          manifest.input_hashes[name] =
              file_sha256((fs::path(out_dir) / name).string());
      }
      manifest.config["epsilons"] = std::vector<double>{kEpsilon};
      manifest.config["bootstrap_draws"] = 10000;
      manifest.config["permutation_iterations"] = 100000;
      manifest.config["coverage"] = false;
      manifest.config["tasks"] = std::move(tasks);
      write_json_file(manifest_path, manifest_to_json(manifest));
      std::printf("wrote %s\n", manifest_path.c_str());
    }
    int failures = verify(manifest_path);
    if (failures) {
      std::printf("%d check(s) failed\n", failures);
      return 1;
    }
    std::printf("fixture OK\n");
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
