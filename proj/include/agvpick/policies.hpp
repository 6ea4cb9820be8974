#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agvpick/neuradp.hpp"
#include "agvpick/options.hpp"

namespace agvpick {

struct PolicySpec {
  enum class Kind { NeurAdp, MyopicIlp, MyopicHeuristic };
  Kind kind = Kind::MyopicIlp;
  std::string checkpoint;    // NeurAdp
  bool humans_first = true;  // MyopicHeuristic
  int charge_threshold = 0;  // MyopicHeuristic, percent

  static PolicySpec neuradp(std::string checkpoint = {}) { return {Kind::NeurAdp, std::move(checkpoint), true, 0}; }
  static PolicySpec myopic_ilp() { return {}; }
  static PolicySpec heuristic(bool humans_first, int threshold) {
    return {Kind::MyopicHeuristic, {}, humans_first, threshold};
  }

  /// "neuradp[:path]", "myopic-ilp", "myopic-hf-<pct>", "myopic-rf-<pct>".
  static PolicySpec parse(const std::string& text);
  std::string name() const;
};

struct DecisionContext {
  const GridMap* map = nullptr;
  const FleetParams* params = nullptr;
  FeatureScales scales;
  int candidate_cap = 100;
  double discount = 0.9;
  const ValueNet* net = nullptr;  // required by NeurAdp
};

struct Decision {
  std::vector<int> choices;  // option action id per worker
  // Filled by NeurAdp only.
  std::optional<MenuInstance> menu;
  std::vector<Eigen::MatrixXd> features;
};

Decision decide(const PolicySpec& policy, const SystemState& state, const std::vector<WorkerOptions>& options,
                const DecisionContext& context);

}  // namespace agvpick
