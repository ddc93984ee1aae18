#include "tac/experiment.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "tac/model_io.hpp"

namespace tac {

using nlohmann::json;

TbnModel build_experiment_tbn(int k, bool testing, const std::string& structure) {
  if (k < 1) throw ModelError("experiment: need at least one testing node");
  if (structure != "tree" && structure != "flat")
    throw ModelError("experiment: structure must be 'tree' or 'flat'");
  if (structure == "flat" && k > 12)
    throw ModelError("experiment: flat structure is limited to k <= 12");

  std::vector<Variable> vars;
  std::vector<Cpt> cpts;

  const VarId e1 = 0, e2 = 1;
  vars.push_back({"E1", {"1", "0"}});
  cpts.push_back(regular_cpt(e1, {}, {0.5, 0.5}));
  vars.push_back({"E2", {"1", "0"}});
  cpts.push_back(regular_cpt(e2, {}, {0.5, 0.5}));

  std::vector<VarId> layer;
  for (int j = 0; j < k; ++j) {
    VarId t = static_cast<VarId>(vars.size());
    vars.push_back({"T" + std::to_string(j + 1), {"1", "0"}});
    if (testing) {
      // 4 parent states: thresholds 0.5, mildly informative row pairs (all
      // retrained anyway)
      std::vector<double> thr(4, 0.5), pos, neg;
      for (int u = 0; u < 4; ++u) {
        pos.insert(pos.end(), {0.7, 0.3});
        neg.insert(neg.end(), {0.3, 0.7});
      }
      cpts.push_back(testing_cpt(t, {e1, e2}, thr, pos, neg));
    } else {
      std::vector<double> rows;
      for (int u = 0; u < 4; ++u) rows.insert(rows.end(), {0.5, 0.5});
      cpts.push_back(regular_cpt(t, {e1, e2}, rows));
    }
    layer.push_back(t);
  }

  auto add_regular = [&](const std::string& name, std::vector<VarId> parents) {
    VarId v = static_cast<VarId>(vars.size());
    vars.push_back({name, {"1", "0"}});
    const int64_t np = 1ll << parents.size();
    std::vector<double> rows(np * 2, 0.5);
    cpts.push_back(regular_cpt(v, std::move(parents), std::move(rows)));
    return v;
  };

  if (structure == "flat") {
    add_regular("Q", layer);
  } else {
    // pairwise aggregation tree; the root is Q
    int level = 0;
    while (layer.size() > 1) {
      ++level;
      std::vector<VarId> next;
      for (size_t i = 0; i + 1 < layer.size(); i += 2) {
        const bool last = layer.size() <= 2;
        std::string name =
            last ? "Q" : "A" + std::to_string(level) + "_" + std::to_string(i / 2 + 1);
        next.push_back(add_regular(name, {layer[i], layer[i + 1]}));
      }
      if (layer.size() % 2 == 1) next.push_back(layer.back());
      layer = std::move(next);
    }
    if (k == 1) add_regular("Q", {layer[0]});
  }

  return TbnModel(std::move(vars), std::move(cpts));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.config = cfg;

  Target2d target = find_target(cfg.id);
  Dataset data = grid_dataset(target, cfg.grid_resolution);

  auto compile_variant = [&](bool testing) {
    TbnModel model = build_experiment_tbn(cfg.n_testing, testing, cfg.structure);
    CompileRequest req;
    req.query = model.require("Q");
    req.evidence_vars = {model.require("E1"), model.require("E2")};
    req.mode = SelectionMode::Sigmoid;
    req.gamma = cfg.gamma;
    return compile_query(model, req);
  };

  Circuit tac_circuit = compile_variant(true);
  result.tac_stats = tac_circuit.stats();
  Circuit ac_circuit;
  if (cfg.run_ac_baseline) {
    ac_circuit = compile_variant(false);
    result.ac_stats = ac_circuit.stats();
  }

  auto run_seeds = [&](const Circuit& circuit, std::vector<RunMetrics>& runs, int& best,
                       Circuit& best_circuit) {
    for (int s = 0; s < cfg.seeds; ++s) {
      TrainConfig tc = cfg.trainer;
      tc.seed = cfg.base_seed + static_cast<uint64_t>(s);
      TrainSession session(circuit, data, tc);
      RunMetrics rm;
      rm.seed = tc.seed;
      rm.epochs = tc.epochs;
      try {
        TrainResult tr = session.train();
        rm.test_mse = tr.best_val;
        rm.best_epoch = tr.best_epoch;
        rm.train_mse = tr.final_train;
        rm.grid_mse = session.mse(data);
      } catch (const TrainError& e) {
        rm.diverged = true;
        rm.test_mse = std::numeric_limits<double>::infinity();
        rm.best_epoch = e.epoch;
      }
      runs.push_back(rm);
      if (best < 0 || rm.test_mse < runs[best].test_mse) {
        best = s;
        if (!rm.diverged) best_circuit = session.trained_circuit();
      }
    }
  };

  run_seeds(tac_circuit, result.tac_runs, result.tac_best, result.tac_circuit);
  if (cfg.run_ac_baseline)
    run_seeds(ac_circuit, result.ac_runs, result.ac_best, result.ac_circuit);

  if (!cfg.outdir.empty()) write_experiment_outputs(result);
  return result;
}

namespace {

void write_surface(const std::string& path, const Circuit& circuit,
                   const Target2d& target, int resolution) {
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= resolution; ++i)
    for (int j = 0; j <= resolution; ++j)
      rows.push_back({static_cast<double>(i) / resolution,
                      static_cast<double>(j) / resolution});
  std::vector<double> learned = predict_rows(circuit, {"E1", "E2"}, rows);

  std::ofstream out(path);
  out.precision(17);
  out << "x,y,f,learned\n";
  for (size_t r = 0; r < rows.size(); ++r)
    out << rows[r][0] << "," << rows[r][1] << "," << target(rows[r][0], rows[r][1]) << ","
        << learned[r] << "\n";
}

json run_to_json(const RunMetrics& rm) {
  return {{"seed", rm.seed},         {"train_mse", rm.train_mse},
          {"test_mse", rm.test_mse}, {"grid_mse", rm.grid_mse},
          {"best_epoch", rm.best_epoch}, {"epochs", rm.epochs},
          {"diverged", rm.diverged}};
}

}  // namespace

void write_experiment_outputs(const ExperimentResult& result) {
  const ExperimentConfig& cfg = result.config;
  std::filesystem::create_directories(cfg.outdir);
  Target2d target = find_target(cfg.id);

  json doc;
  doc["id"] = cfg.id;
  doc["n_testing"] = cfg.n_testing;
  doc["structure"] = cfg.structure;
  doc["gamma"] = cfg.gamma;
  doc["grid_resolution"] = cfg.grid_resolution;
  doc["seeds"] = cfg.seeds;
  doc["base_seed"] = cfg.base_seed;
  doc["trainer"] = {{"optimizer", cfg.trainer.optimizer == OptimizerKind::Adam ? "adam" : "sgd"},
                    {"lr", cfg.trainer.lr},
                    {"batch_size", cfg.trainer.batch_size},
                    {"epochs", cfg.trainer.epochs},
                    {"validation_fraction", cfg.trainer.validation_fraction}};
  doc["ac_baseline"] = "same structure with testing CPTs replaced by regular trainable CPTs";

  doc["tac"] = json::array();
  for (const auto& rm : result.tac_runs) doc["tac"].push_back(run_to_json(rm));
  doc["tac_best_test_mse"] = result.tac_best_mse();
  doc["tac_nodes"] = result.tac_stats.nodes;
  if (!result.ac_runs.empty()) {
    doc["ac"] = json::array();
    for (const auto& rm : result.ac_runs) doc["ac"].push_back(run_to_json(rm));
    doc["ac_best_test_mse"] = result.ac_best_mse();
    doc["ac_nodes"] = result.ac_stats.nodes;
  }

  const std::string prefix = cfg.outdir + "/" + cfg.id + "_k" + std::to_string(cfg.n_testing);
  std::ofstream(prefix + "_metrics.json") << doc.dump(2) << "\n";
  if (result.tac_circuit.node_count() > 0)
    write_surface(prefix + "_tac_surface.csv", result.tac_circuit, target,
                  cfg.surface_resolution);
  if (!result.ac_runs.empty() && result.ac_circuit.node_count() > 0)
    write_surface(prefix + "_ac_surface.csv", result.ac_circuit, target,
                  cfg.surface_resolution);
}

}  // namespace tac
