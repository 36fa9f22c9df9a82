#include "scenforge/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "scenforge/simulator.hpp"
#include "scenforge/stats.hpp"
#include "violation_json.hpp"

namespace scenforge {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::size_t kind_index(ViolationKind k) { return static_cast<std::size_t>(k); }

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (workers <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    workers = hw == 0 ? 1 : static_cast<int>(hw);
  }
  workers = std::min<int>(workers, static_cast<int>(n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) break;
        body(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

std::string scenario_name(Representation rep, std::uint64_t seed, int gen,
                          std::size_t index) {
  std::ostringstream os;
  os << to_string(rep) << "-s" << seed << "-g" << gen << "-i" << index;
  return os.str();
}

}  // namespace

ScenarioGenome sample_scenario(const ExperimentConfig& cfg, const LaneMap& map,
                               Rng& rng, const std::string& scenario_id) {
  ScenarioGenome s;
  s.id = scenario_id;
  s.duration = cfg.duration;

  bool routed = false;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    s.ego_start = sample_lane_point(map, rng);
    s.ego_end = sample_lane_point(map, rng);
    const auto route = map.shortest_route(s.ego_start, s.ego_end);
    if (route && route->total_length >= cfg.min_ego_route_length) {
      routed = true;
      break;
    }
  }
  if (!routed)
    throw std::runtime_error(
        "sample_scenario: no ego route of at least " +
        std::to_string(cfg.min_ego_route_length) + " m found on this map");

  const int span = cfg.max_obstacles - cfg.min_obstacles + 1;
  const int count =
      cfg.min_obstacles + static_cast<int>(rng.uniform_int(
                              static_cast<std::uint64_t>(span)));
  for (int i = 0; i < count; ++i)
    s.obstacles.push_back(sample_obstacle(cfg.constraints, map, rng, i + 1));
  return s;
}

std::vector<EvaluatedScenario> evaluate_population(
    const std::vector<ScenarioGenome>& scenarios, const LaneMap& map,
    const ExperimentConfig& cfg, double* sim_seconds, double* oracle_seconds) {
  const std::size_t n = scenarios.size();
  std::vector<EvaluatedScenario> out(n);
  std::vector<double> sim_times(n, 0.0);
  std::vector<double> oracle_times(n, 0.0);

  parallel_for(n, cfg.workers, [&](std::size_t i) {
    const auto t0 = Clock::now();
    const Trace trace = simulate(scenarios[i], map, cfg.planner);
    const auto t1 = Clock::now();
    Evaluation eval = evaluate(trace, map, cfg.thresholds);
    const auto t2 = Clock::now();
    sim_times[i] = seconds_between(t0, t1);
    oracle_times[i] = seconds_between(t1, t2);
    out[i] = EvaluatedScenario{scenarios[i], eval.objectives,
                               std::move(eval.per_obstacle_min_distance),
                               std::move(eval.violations)};
  });
  if (sim_seconds)
    *sim_seconds = std::accumulate(sim_times.begin(), sim_times.end(), 0.0);
  if (oracle_seconds)
    *oracle_seconds =
        std::accumulate(oracle_times.begin(), oracle_times.end(), 0.0);
  return out;
}

namespace {

std::vector<ScenarioGenome> breed_full(
    const std::vector<EvaluatedScenario>& parents, const ExperimentConfig& cfg,
    const LaneMap& map, Rng& rng, Representation rep, std::uint64_t seed,
    int gen) {
  std::vector<ScenarioGenome> children;
  children.reserve(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    ScenarioGenome child = parents[i].genome;
    child.id = scenario_name(rep, seed, gen, i);
    IdAllocator ids = IdAllocator::for_scenario(child);

    std::vector<std::size_t> order(child.obstacles.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = order.size(); k > 1; --k)
      std::swap(order[k - 1], order[rng.uniform_int(k)]);
    for (std::size_t k = 0; k + 1 < order.size(); k += 2) {
      if (!rng.chance(cfg.p_crossover)) continue;
      auto [ca, cb] =
          two_point_crossover(child.obstacles[order[k]],
                              child.obstacles[order[k + 1]], cfg.constraints,
                              map, rng, ids);
      child.obstacles[order[k]] = ca;
      child.obstacles[order[k + 1]] = cb;
    }
    for (auto& obstacle : child.obstacles) {
      if (rng.chance(cfg.p_gene_mutation))
        obstacle = mutate_genes(obstacle, cfg.constraints, map, rng,
                                cfg.p_gene_mutation);
    }
    const std::size_t donor_index =
        parents.size() > 1
            ? (i + 1 + rng.uniform_int(parents.size() - 1)) % parents.size()
            : i;
    child = mutate_scenario(child, parents[i].per_obstacle_min_distance,
                            parents[donor_index].genome,
                            parents[donor_index].per_obstacle_min_distance,
                            rng, cfg.p_add, cfg.p_remove, cfg.min_obstacles,
                            cfg.max_obstacles);
    children.push_back(std::move(child));
  }
  return children;
}

std::vector<ScenarioGenome> breed_partial(
    const std::vector<EvaluatedScenario>& parents, const ExperimentConfig& cfg,
    const LaneMap& map, Rng& rng, Representation rep, std::uint64_t seed,
    int gen) {
  std::vector<ScenarioGenome> children;
  children.reserve(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) {
    ScenarioGenome child = parents[i].genome;
    child.id = scenario_name(rep, seed, gen, i);
    children.push_back(std::move(child));
  }
  // Whole-obstacle exchange between scenario pairs, no gene mixing.
  std::vector<std::size_t> order(children.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = order.size(); k > 1; --k)
    std::swap(order[k - 1], order[rng.uniform_int(k)]);
  for (std::size_t k = 0; k + 1 < order.size(); k += 2) {
    if (rng.chance(cfg.p_crossover))
      swap_obstacles(children[order[k]], children[order[k + 1]], rng);
  }
  for (std::size_t i = 0; i < children.size(); ++i) {
    for (auto& obstacle : children[i].obstacles) {
      if (rng.chance(cfg.p_gene_mutation))
        obstacle = mutate_single_gene(obstacle, cfg.constraints, map, rng);
    }
    const std::size_t donor_index =
        parents.size() > 1
            ? (i + 1 + rng.uniform_int(parents.size() - 1)) % parents.size()
            : i;
    children[i] = mutate_scenario(
        children[i], parents[i].per_obstacle_min_distance,
        parents[donor_index].genome,
        parents[donor_index].per_obstacle_min_distance, rng, cfg.p_add,
        cfg.p_remove, cfg.min_obstacles, cfg.max_obstacles);
  }
  return children;
}

struct RunState {
  int next_violation_id = 0;
  std::array<std::size_t, 5> cumulative{};
};

GenerationStats log_generation(const std::vector<EvaluatedScenario>& batch,
                               const LaneMap& map, const ExperimentConfig& cfg,
                               int gen, const std::string& run_dir,
                               RunState& state, RunReport& report) {
  GenerationStats stats;
  stats.generation = gen;
  stats.evaluations = batch.size();

  bool first = true;
  for (const auto& es : batch) {
    const auto& o = es.objectives;
    if (first) {
      stats.best = o;
      first = false;
    } else {
      stats.best.collision = std::min(stats.best.collision, o.collision);
      stats.best.speed = std::min(stats.best.speed, o.speed);
      stats.best.unsafe_change =
          std::max(stats.best.unsafe_change, o.unsafe_change);
      stats.best.fast_accel = std::max(stats.best.fast_accel, o.fast_accel);
      stats.best.hard_brake = std::min(stats.best.hard_brake, o.hard_brake);
    }
    if (es.violations.empty()) continue;

    write_scenario(es.genome, map.id(),
                   run_dir + "/scenarios/" + es.genome.id + ".json");
    const Trace trace = simulate(es.genome, map, cfg.planner);
    write_record(trace, run_dir + "/records/" + es.genome.id + ".jsonl");

    for (const Violation& v : es.violations) {
      stats.new_violations[kind_index(v.kind)] += 1;
      state.cumulative[kind_index(v.kind)] += 1;
      report.violations.push_back({state.next_violation_id++, es.genome.id, v});
    }
  }
  stats.cumulative_violations = state.cumulative;
  return stats;
}

void write_run_files(const RunReport& report, const ExperimentConfig& cfg) {
  (void)cfg;
  ordered_json jr;
  jr["representation"] = to_string(report.representation);
  jr["seed"] = report.seed;
  jr["total_evaluations"] = report.total_evaluations;
  jr["timings_s"] = {{"simulation", report.sim_seconds},
                     {"oracles", report.oracle_seconds},
                     {"misc", report.misc_seconds},
                     {"e2e", report.wall_seconds}};
  jr["generations"] = ordered_json::array();
  for (const auto& g : report.generations) {
    ordered_json jg;
    jg["generation"] = g.generation;
    jg["evaluations"] = g.evaluations;
    ordered_json now, cum;
    for (ViolationKind k : kAllViolationKinds) {
      now[to_string(k)] = g.new_violations[kind_index(k)];
      cum[to_string(k)] = g.cumulative_violations[kind_index(k)];
    }
    jg["new_violations"] = now;
    jg["cumulative_violations"] = cum;
    jg["best_objectives"] = {{"collision", g.best.collision},
                             {"speed", g.best.speed},
                             {"unsafeChange", g.best.unsafe_change},
                             {"fastAccl", g.best.fast_accel},
                             {"hardBrake", g.best.hard_brake}};
    jg["timings_s"] = {{"breed", g.breed_seconds},
                       {"simulation", g.sim_seconds},
                       {"oracles", g.oracle_seconds}};
    jr["generations"].push_back(std::move(jg));
  }
  ordered_json totals;
  for (const auto& [kind, counts] : report.dedup.per_kind) {
    totals[kind] = {{"all", counts.all},
                    {"unique", counts.unique},
                    {"eliminated_percent", counts.eliminated_percent}};
  }
  totals["total"] = {{"all", report.dedup.total.all},
                     {"unique", report.dedup.total.unique},
                     {"eliminated_percent", report.dedup.total.eliminated_percent}};
  jr["violation_totals"] = std::move(totals);
  std::ofstream(report.run_dir + "/run_report.json")
      << jr.dump(2) << "\n";

  ordered_json jv;
  jv["representation"] = to_string(report.representation);
  jv["seed"] = report.seed;
  jv["violations"] = ordered_json::array();
  for (const auto& lv : report.violations) {
    ordered_json item;
    item["violation_id"] = lv.violation_id;
    item["scenario_id"] = lv.scenario_id;
    item["violation"] = detail::violation_to_json(lv.violation);
    jv["violations"].push_back(std::move(item));
  }
  std::ofstream(report.run_dir + "/violations.json") << jv.dump(2) << "\n";

  std::ofstream csv(report.run_dir + "/violations.csv");
  csv << "violation_id," << violations_csv_header() << "\n";
  for (const auto& lv : report.violations)
    csv << lv.violation_id << ','
        << violation_to_csv_row(lv.scenario_id, lv.violation) << "\n";

  ordered_json jd;
  for (const auto& [kind, counts] : report.dedup.per_kind) {
    jd["per_kind"][kind] = {{"all", counts.all},
                            {"unique", counts.unique},
                            {"eliminated_percent", counts.eliminated_percent}};
  }
  jd["total"] = {{"all", report.dedup.total.all},
                 {"unique", report.dedup.total.unique},
                 {"eliminated_percent", report.dedup.total.eliminated_percent}};
  ordered_json assignments;
  for (std::size_t i = 0; i < report.dedup.cluster_of.size(); ++i)
    assignments[std::to_string(report.violations[i].violation_id)] =
        report.dedup.cluster_of[i];
  jd["assignments"] = std::move(assignments);
  jd["representatives"] = ordered_json::array();
  for (std::size_t idx : report.dedup.representatives)
    jd["representatives"].push_back(report.violations[idx].violation_id);
  std::ofstream(report.run_dir + "/dedup.json") << jd.dump(2) << "\n";

  std::ofstream uniq(report.run_dir + "/unique_violations.csv");
  uniq << "violation_id,kind,scenario_id,scenario_file,record_file\n";
  for (std::size_t idx : report.dedup.representatives) {
    const auto& lv = report.violations[idx];
    uniq << lv.violation_id << ',' << to_string(lv.violation.kind) << ','
         << lv.scenario_id << ",scenarios/" << lv.scenario_id
         << ".json,records/" << lv.scenario_id << ".jsonl\n";
  }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, Representation rep,
                         std::uint64_t seed) {
  cfg.validate();
  LaneMap map = LaneMap::load(cfg.map_path);
  map.set_lane_change_penalty(cfg.lane_change_penalty);

  RunReport report;
  report.representation = rep;
  report.seed = seed;
  report.run_dir = cfg.output_dir + "/" + to_string(rep) + "_seed" +
                   std::to_string(seed);
  fs::create_directories(report.run_dir + "/records");
  fs::create_directories(report.run_dir + "/scenarios");

  Rng base(seed);
  Rng rng = base.fork(static_cast<std::uint64_t>(rep) + 1);
  RunState state;
  const auto run_start = Clock::now();

  auto sample_batch = [&](int gen) {
    std::vector<ScenarioGenome> batch;
    batch.reserve(static_cast<std::size_t>(cfg.population_size));
    for (int i = 0; i < cfg.population_size; ++i)
      batch.push_back(sample_scenario(
          cfg, map, rng,
          scenario_name(rep, seed, gen, static_cast<std::size_t>(i))));
    return batch;
  };

  auto breed_start = Clock::now();
  std::vector<ScenarioGenome> initial = sample_batch(0);
  double breed_s = seconds_between(breed_start, Clock::now());

  double sim_s = 0.0, oracle_s = 0.0;
  std::vector<EvaluatedScenario> population =
      evaluate_population(initial, map, cfg, &sim_s, &oracle_s);
  report.total_evaluations += population.size();

  GenerationStats gs =
      log_generation(population, map, cfg, 0, report.run_dir, state, report);
  gs.breed_seconds = breed_s;
  gs.sim_seconds = sim_s;
  gs.oracle_seconds = oracle_s;
  report.generations.push_back(gs);
  report.sim_seconds += sim_s;
  report.oracle_seconds += oracle_s;
  report.misc_seconds += breed_s;

  const bool wall_mode = cfg.wall_clock_minutes > 0.0;
  int gen = 0;
  while (true) {
    if (wall_mode) {
      const double elapsed_min =
          seconds_between(run_start, Clock::now()) / 60.0;
      if (elapsed_min >= cfg.wall_clock_minutes) break;
    } else if (gen >= cfg.generations) {
      break;
    }
    ++gen;

    breed_start = Clock::now();
    std::vector<ScenarioGenome> children;
    switch (rep) {
      case Representation::kFull:
        children = breed_full(population, cfg, map, rng, rep, seed, gen);
        break;
      case Representation::kPartial:
        children = breed_partial(population, cfg, map, rng, rep, seed, gen);
        break;
      case Representation::kRandom:
        children = sample_batch(gen);
        break;
    }
    breed_s = seconds_between(breed_start, Clock::now());

    std::vector<EvaluatedScenario> evaluated =
        evaluate_population(children, map, cfg, &sim_s, &oracle_s);
    report.total_evaluations += evaluated.size();

    gs = log_generation(evaluated, map, cfg, gen, report.run_dir, state,
                        report);
    gs.breed_seconds = breed_s;
    gs.sim_seconds = sim_s;
    gs.oracle_seconds = oracle_s;
    report.generations.push_back(gs);
    report.sim_seconds += sim_s;
    report.oracle_seconds += oracle_s;
    report.misc_seconds += breed_s;

    if (rep == Representation::kRandom) {
      population = std::move(evaluated);
    } else {
      // mu+lambda: survivors drawn from parents and children together.
      std::vector<EvaluatedScenario> merged = std::move(population);
      merged.insert(merged.end(), std::make_move_iterator(evaluated.begin()),
                    std::make_move_iterator(evaluated.end()));
      std::vector<ObjectiveVector> objectives;
      objectives.reserve(merged.size());
      for (const auto& es : merged) objectives.push_back(es.objectives);
      const auto keep = nsga2_select(
          objectives, static_cast<std::size_t>(cfg.population_size));
      std::vector<EvaluatedScenario> survivors;
      survivors.reserve(keep.size());
      for (std::size_t idx : keep) survivors.push_back(std::move(merged[idx]));
      population = std::move(survivors);
    }
  }

  std::vector<Violation> plain;
  plain.reserve(report.violations.size());
  for (const auto& lv : report.violations) plain.push_back(lv.violation);
  report.dedup = dedup(plain);
  report.wall_seconds = seconds_between(run_start, Clock::now());

  write_run_files(report, cfg);
  return report;
}

void emit_report(const ExperimentConfig& cfg,
                 const std::vector<RunReport>& reports) {
  fs::create_directories(cfg.output_dir);

  // Representations in config order, skipping ones without runs.
  std::vector<Representation> reps;
  for (Representation r : cfg.representations) {
    for (const auto& report : reports) {
      if (report.representation == r) {
        reps.push_back(r);
        break;
      }
    }
  }

  auto kind_counts = [&](Representation rep, const std::string& kind) {
    std::size_t all = 0, unique = 0;
    for (const auto& report : reports) {
      if (report.representation != rep) continue;
      if (kind == "total") {
        all += report.dedup.total.all;
        unique += report.dedup.total.unique;
      } else if (auto it = report.dedup.per_kind.find(kind);
                 it != report.dedup.per_kind.end()) {
        all += it->second.all;
        unique += it->second.unique;
      }
    }
    return std::make_pair(all, unique);
  };

  std::ofstream csv(cfg.output_dir + "/summary.csv");
  csv << "kind,representation,all_violations,unique_violations,"
         "eliminated_percent\n";
  std::vector<std::string> kinds;
  for (ViolationKind k : kAllViolationKinds) kinds.push_back(to_string(k));
  kinds.push_back("total");
  csv.setf(std::ios::fixed);
  csv.precision(2);
  for (const auto& kind : kinds) {
    for (Representation rep : reps) {
      const auto [all, unique] = kind_counts(rep, kind);
      const double elim =
          all == 0 ? 0.0
                   : 100.0 * (1.0 - static_cast<double>(unique) /
                                        static_cast<double>(all));
      csv << kind << ',' << to_string(rep) << ',' << all << ',' << unique
          << ',' << elim << "\n";
    }
  }
  csv.close();

  // Per-seed unique counts feed the pairwise comparisons.
  auto samples_of = [&](Representation rep, const std::string& kind) {
    std::vector<double> xs;
    for (const auto& report : reports) {
      if (report.representation != rep) continue;
      if (kind == "total") {
        xs.push_back(static_cast<double>(report.dedup.total.unique));
      } else {
        const auto it = report.dedup.per_kind.find(kind);
        xs.push_back(it == report.dedup.per_kind.end()
                         ? 0.0
                         : static_cast<double>(it->second.unique));
      }
    }
    return xs;
  };

  ordered_json js;
  js["metric"] = "unique_violations_per_seed";
  js["insufficient_samples"] = reps.size() < 2;
  if (reps.size() < 2)
    js["note"] = "insufficient samples: need runs from at least two "
                 "representations";
  js["pairs"] = ordered_json::array();
  for (std::size_t a = 0; a < reps.size(); ++a) {
    for (std::size_t b = a + 1; b < reps.size(); ++b) {
      ordered_json pair;
      pair["a"] = to_string(reps[a]);
      pair["b"] = to_string(reps[b]);
      ordered_json per_kind;
      for (const auto& kind : kinds) {
        const auto xs = samples_of(reps[a], kind);
        const auto ys = samples_of(reps[b], kind);
        per_kind[kind] = {{"p_value", mann_whitney_u(xs, ys)},
                          {"a12", vargha_delaney_a12(xs, ys)}};
      }
      pair["kinds"] = std::move(per_kind);
      js["pairs"].push_back(std::move(pair));
    }
  }
  std::ofstream(cfg.output_dir + "/stats.json") << js.dump(2) << "\n";
}

ReplayResult replay_scenario(const std::string& scenario_path,
                             const std::string& map_path,
                             const PlannerConfig& planner,
                             const Thresholds& thresholds,
                             double lane_change_penalty) {
  LaneMap map = LaneMap::load(map_path);
  map.set_lane_change_penalty(lane_change_penalty);
  const ScenarioGenome scenario = read_scenario(scenario_path);
  ReplayResult result{simulate(scenario, map, planner), {}};
  result.evaluation = evaluate(result.trace, map, thresholds);
  return result;
}

std::vector<LoggedViolation> read_violations_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open violations file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const ordered_json j = ordered_json::parse(buf.str());
  std::vector<LoggedViolation> out;
  for (const auto& item : j.at("violations")) {
    LoggedViolation lv;
    lv.violation_id = item.at("violation_id").get<int>();
    lv.scenario_id = item.at("scenario_id").get<std::string>();
    lv.violation = detail::violation_from_json(item.at("violation"));
    out.push_back(std::move(lv));
  }
  return out;
}

DedupReport dedup_violations_file(const std::string& path) {
  std::string file = path;
  if (fs::is_directory(path)) file = path + "/violations.json";
  const auto logged = read_violations_file(file);
  std::vector<Violation> plain;
  plain.reserve(logged.size());
  for (const auto& lv : logged) plain.push_back(lv.violation);
  return dedup(plain);
}

}  // namespace scenforge
