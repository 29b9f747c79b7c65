#include "tohfb/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "tohfb/agents.hpp"
#include "tohfb/errors.hpp"
#include "tohfb/http_server.hpp"
#include "tohfb/irl.hpp"
#include "tohfb/models.hpp"
#include "tohfb/stats.hpp"

namespace tohfb::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t i) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (i + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Common {
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "random seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--config", c.config, "JSON file of option defaults");
}

fs::path prepare_out(const Common& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir.string());
  return dir;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::IoError, "cannot write " + p.string());
  return f;
}

void write_manifest(const fs::path& dir, const std::string& sub, const Common& c, json inputs,
                    json outputs, json options) {
  json m{{"tool", "tohfb"},
         {"version", TOHFB_VERSION},
         {"subcommand", sub},
         {"seed", c.seed},
         {"inputs", std::move(inputs)},
         {"outputs", std::move(outputs)},
         {"options", std::move(options)}};
  if (!c.config.empty()) m["config"] = c.config;
  open_out(dir / "manifest.json") << m.dump(2) << '\n';
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dash = text.find('-');
  try {
    if (dash == std::string::npos) {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "bad trial range '" + text + "'");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidArgument, "bad number '" + item + "'");
    }
  }
  return out;
}

struct Filters {
  std::string trials;
  bool success_only = false;
  std::string phase = "training";
  std::string condition;
};

void add_filters(CLI::App* sub, Filters& f) {
  sub->add_option("--trials", f.trials, "trial range within the phase, e.g. 6-10");
  sub->add_flag("--success-only", f.success_only, "keep solved trials only");
  sub->add_option("--phase", f.phase, "training or transfer");
  sub->add_option("--condition", f.condition, "keep one condition");
}

std::vector<TrajectoryRecord> apply_filters(std::vector<TrajectoryRecord> recs, const Filters& f) {
  if (!f.phase.empty()) recs = filter_phase(recs, parse_phase(f.phase));
  if (!f.condition.empty()) recs = filter_condition(recs, parse_condition(f.condition));
  if (!f.trials.empty()) {
    const auto [a, b] = parse_range(f.trials);
    recs = filter_trials(recs, a, b);
  }
  if (f.success_only) recs = filter_solved(recs);
  return recs;
}

json filters_json(const Filters& f) {
  return {{"trials", f.trials}, {"success_only", f.success_only}, {"phase", f.phase}, {"condition", f.condition}};
}

// solve ------------------------------------------------------------------

struct SolveArgs {
  int n = 4;
  std::string target;
  std::string start;
  double gamma = kDefaultGamma;
};

int cmd_solve(const SolveArgs& a, const Common& c, std::ostream& out) {
  const auto graph = build_state_graph(a.n);
  const TohState target = TohState::parse(a.target, a.n);
  const TohState start = a.start.empty() ? TohState::uniform(a.n, 0) : TohState::parse(a.start, a.n);
  const auto values = tutor_values(graph, target, a.gamma);
  const auto path = greedy_rollout(values, graph->index_of(start), graph->num_states());

  const auto dir = prepare_out(c);
  {
    auto f = open_out(dir / "values.csv");
    write_value_csv(f, *graph, values);
  }
  {
    auto f = open_out(dir / "q.csv");
    write_q_csv(f, *graph, values);
  }
  json states = json::array();
  for (auto s : path) states.push_back(graph->label(s));
  const std::size_t length = path.size() - 1;
  open_out(dir / "path.json") << json{{"start", start.str()}, {"target", target.str()},
                                      {"length", length}, {"states", states}}
                                     .dump(2)
                              << '\n';
  write_manifest(dir, "solve", c, json::array(), {"values.csv", "q.csv", "path.json"},
                 {{"n", a.n}, {"target", target.str()}, {"start", start.str()}, {"gamma", a.gamma}});
  out << "path length " << length << ":";
  for (const auto& s : states) out << ' ' << s.get<std::string>();
  out << '\n';
  return 0;
}

// simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string spec;
  int agents = 20;
  std::string model = "M2";
  double k = 1.0;
  double target_weight = 1.0;
  std::string condition = "numeric";
  double gamma = kDefaultGamma;
  double request_rate = 0.5;
  std::string training_target;
};

int cmd_simulate(SimulateArgs a, Common c, std::ostream& out) {
  std::map<std::string, double> weights;
  if (!a.spec.empty()) {
    std::ifstream in(a.spec);
    if (!in) fail(ErrorCode::IoError, "cannot read " + a.spec);
    json j;
    try {
      j = json::parse(in);
      a.agents = j.value("agents", a.agents);
      a.model = j.value("model", a.model);
      a.k = j.value("k", a.k);
      a.target_weight = j.value("target_weight", a.target_weight);
      a.condition = j.value("condition", a.condition);
      a.gamma = j.value("gamma", a.gamma);
      a.request_rate = j.value("request_rate", a.request_rate);
      a.training_target = j.value("training_target", a.training_target);
      c.seed = j.value("seed", c.seed);
      if (j.contains("state_weights")) weights = j.at("state_weights").get<std::map<std::string, double>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::ParseError, "cohort spec " + a.spec + ": " + e.what());
    }
  }
  if (a.agents < 1) fail(ErrorCode::InvalidArgument, "need at least one agent");
  agents::AgentSpec base;
  base.model = agents::parse_model(a.model);
  base.k = a.k;
  base.target_weight = a.target_weight;
  base.gamma = a.gamma;
  base.request_rate = a.request_rate;
  base.state_weights = weights;
  std::vector<agents::AgentSpec> specs;
  for (int i = 0; i < a.agents; ++i) {
    auto s = base;
    s.seed = mix_seed(c.seed, static_cast<std::uint64_t>(i));
    specs.push_back(s);
  }
  agents::Protocol proto;
  proto.condition = parse_condition(a.condition);
  if (!a.training_target.empty()) proto.training_target = TohState::parse(a.training_target, proto.training_disks);
  const auto recs = agents::simulate_cohort(specs, proto);

  const auto dir = prepare_out(c);
  write_jsonl(dir / "trajectories.jsonl", recs);
  json inputs = json::array();
  if (!a.spec.empty()) inputs.push_back(a.spec);
  write_manifest(dir, "simulate", c, inputs, {"trajectories.jsonl"},
                 {{"agents", a.agents}, {"model", a.model}, {"k", a.k}, {"target_weight", a.target_weight},
                  {"condition", a.condition}, {"gamma", a.gamma}, {"request_rate", a.request_rate},
                  {"state_weights", weights}, {"training_target", a.training_target}});
  out << recs.size() << " records written to " << (dir / "trajectories.jsonl").string() << '\n';
  return 0;
}

// irl --------------------------------------------------------------------

struct IrlArgs {
  std::string data;
  std::string features = "all";
  bool split = false;
  std::string target;
  int folds = 5;
  std::string lambdas;
  double gamma = kDefaultGamma;
};

int cmd_irl(const IrlArgs& a, const Filters& flt, const Common& c, std::ostream& out) {
  auto recs = apply_filters(read_jsonl(fs::path(a.data)), flt);
  if (recs.empty()) fail(ErrorCode::EmptyDataset, "no records left after filtering");
  const int n = recs.front().n;
  for (const auto& r : recs)
    if (r.n != n) fail(ErrorCode::InvalidArgument, "records mix disk counts; select a phase");
  const auto graph = shared_graph(n);
  const auto mode = irl::parse_feature_mode(a.features);
  const auto fm = mode == irl::FeatureMode::AllStates ? irl::FeatureMap::all_states(*graph)
                                                      : irl::FeatureMap::subset8(*graph);
  irl::IrlConfig cfg;
  cfg.gamma = a.gamma;
  cfg.folds = a.folds;
  cfg.seed = c.seed;
  if (!a.lambdas.empty()) cfg.lambdas = parse_list(a.lambdas);

  struct Split {
    std::string name;
    std::vector<TrajectoryRecord> recs;
    std::optional<TohState> target;
  };
  std::vector<Split> splits;
  if (a.split) {
    for (auto tri : {Triangle::T2, Triangle::T3}) {
      Split s{std::string(to_string(tri)), {}, std::nullopt};
      for (const auto& r : recs)
        if (triangle_of(r.target) == tri) s.recs.push_back(r);
      splits.push_back(std::move(s));
    }
  } else if (!a.target.empty()) {
    const auto t = TohState::parse(a.target, n);
    Split s{t.str(), {}, t};
    for (const auto& r : recs)
      if (r.target == t) s.recs.push_back(r);
    splits.push_back(std::move(s));
  } else {
    splits.push_back({"all", recs, std::nullopt});
  }

  const auto dir = prepare_out(c);
  json outputs = json::array();
  for (const auto& s : splits) {
    if (s.recs.empty()) fail(ErrorCode::EmptyDataset, "split " + s.name + " has no records");
    const auto demos = irl::Demonstrations::from_records(graph, s.recs, s.target);
    const auto res = irl::cross_validate(demos, fm, cfg);
    const auto map = irl::reward_map_export(res.weights(), fm, *graph);
    const std::string jname = "irl_" + s.name + ".json";
    const std::string cname = "reward_" + s.name + ".csv";
    open_out(dir / jname) << irl::to_json(res, fm).dump(2) << '\n';
    {
      auto f = open_out(dir / cname);
      irl::write_reward_csv(f, *graph, map);
    }
    outputs.push_back(jname);
    outputs.push_back(cname);
    const auto best = std::max_element(map.begin(), map.end()) - map.begin();
    std::size_t nonzero = 0;
    for (double w : res.weights()) nonzero += w != 0.0;
    out << s.name << ": " << s.recs.size() << " trajectories, lambda " << res.lambda << ", train logL "
        << std::setprecision(6) << res.train_loglik << ", " << nonzero << " nonzero weights, top state "
        << graph->label(static_cast<std::size_t>(best)) << '\n';
  }
  auto opts = filters_json(flt);
  opts["features"] = a.features;
  opts["split_by_triangle"] = a.split;
  opts["target"] = a.target;
  opts["folds"] = a.folds;
  opts["lambdas"] = cfg.lambdas;
  opts["gamma"] = a.gamma;
  write_manifest(dir, "irl", c, {a.data}, outputs, opts);
  return 0;
}

// fit-models -------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string features = "both";
  int folds = 5;
  std::string lambdas;
  double gamma = kDefaultGamma;
};

int cmd_fit_models(const FitArgs& a, const Filters& flt, const Common& c, std::ostream& out) {
  auto recs = apply_filters(read_jsonl(fs::path(a.data)), flt);
  if (recs.empty()) fail(ErrorCode::EmptyDataset, "no records left after filtering");
  std::vector<irl::FeatureMode> modes;
  if (a.features == "both") {
    modes = {irl::FeatureMode::AllStates, irl::FeatureMode::Subset8};
  } else {
    modes = {irl::parse_feature_mode(a.features)};
  }
  irl::IrlConfig cfg;
  cfg.gamma = a.gamma;
  cfg.folds = a.folds;
  cfg.seed = c.seed;
  cfg.lambdas = a.lambdas.empty() ? models::default_model_lambdas() : parse_list(a.lambdas);
  const auto part = models::partition_groups(recs, recs.front().n);
  const auto rep = models::model_selection_report(part, modes, cfg);

  const auto dir = prepare_out(c);
  {
    auto f = open_out(dir / "report.csv");
    models::write_report_csv(f, rep);
  }
  {
    auto f = open_out(dir / "report.txt");
    models::write_report_table(f, rep);
  }
  models::write_report_table(out, rep);
  auto opts = filters_json(flt);
  opts["features"] = a.features;
  opts["folds"] = a.folds;
  opts["lambdas"] = cfg.lambdas;
  opts["gamma"] = a.gamma;
  write_manifest(dir, "fit-models", c, {a.data}, {"report.csv", "report.txt"}, opts);
  return 0;
}

// stats ------------------------------------------------------------------

struct StatsArgs {
  std::string data;
  std::string data_b;
  std::string compare;
  std::string phase;
  std::string condition;
  bool welch = false;
};

int cmd_stats(const StatsArgs& a, const Common& c, std::ostream& out) {
  const auto recs = read_jsonl(fs::path(a.data));
  std::optional<Condition> cond;
  std::optional<Phase> phase;
  if (!a.condition.empty()) cond = parse_condition(a.condition);
  if (!a.phase.empty()) phase = parse_phase(a.phase);
  const auto bundle = stats::summarize(recs, cond, phase);

  const auto dir = prepare_out(c);
  json outputs = {"summary.json", "summary.csv", "trial_means.csv"};
  open_out(dir / "summary.json") << stats::to_json(bundle).dump(2) << '\n';
  {
    auto f = open_out(dir / "summary.csv");
    stats::write_summary_csv(f, bundle);
  }
  {
    auto f = open_out(dir / "trial_means.csv");
    stats::write_trial_means_csv(f, bundle);
  }
  stats::write_summary_csv(out, bundle);

  auto select = [&](const std::vector<TrajectoryRecord>& rs, std::optional<Condition> cc) {
    std::vector<TrajectoryRecord> keep;
    for (const auto& r : rs)
      if ((!cc || r.condition == *cc) && (!phase || r.phase == *phase)) keep.push_back(r);
    return stats::percentage_scores(keep);
  };
  std::optional<stats::TTest> test;
  json tj;
  if (!a.data_b.empty()) {
    const auto other = read_jsonl(fs::path(a.data_b));
    test = stats::two_sample_t_test(select(recs, cond), select(other, cond), a.welch);
    tj = stats::to_json(*test);
    tj["a"] = a.data;
    tj["b"] = a.data_b;
  } else if (!a.compare.empty()) {
    const auto comma = a.compare.find(',');
    if (comma == std::string::npos) fail(ErrorCode::InvalidArgument, "--compare expects two conditions");
    const auto ca = parse_condition(a.compare.substr(0, comma));
    const auto cb = parse_condition(a.compare.substr(comma + 1));
    test = stats::two_sample_t_test(select(recs, ca), select(recs, cb), a.welch);
    tj = stats::to_json(*test);
    tj["a"] = to_string(ca);
    tj["b"] = to_string(cb);
  }
  if (test) {
    open_out(dir / "ttest.json") << tj.dump(2) << '\n';
    outputs.push_back("ttest.json");
    out << "t = " << std::setprecision(6) << test->t << ", df = " << test->df << ", p = " << test->p << '\n';
  }
  json inputs = {a.data};
  if (!a.data_b.empty()) inputs.push_back(a.data_b);
  write_manifest(dir, "stats", c, inputs, outputs,
                 {{"compare", a.compare}, {"phase", a.phase}, {"condition", a.condition}, {"welch", a.welch}});
  return 0;
}

// serve ------------------------------------------------------------------

struct ServeArgs {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir = "data";
};

int cmd_serve(const ServeArgs& a, const Common& c, std::ostream& out) {
  service::ServiceOptions opts;
  opts.data_dir = a.data_dir;
  opts.seed = c.seed;
  service::SessionManager manager(opts);
  service::HttpServer server(manager);
  out << "serving on http://" << a.host << ':' << a.port << " (data in " << a.data_dir << ")" << std::endl;
  if (!server.listen(a.host, a.port)) fail(ErrorCode::IoError, "cannot bind " + a.host + ":" + std::to_string(a.port));
  return 0;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, "config " + path + ": " + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ParseError, "config " + path + " must be a JSON object");
  std::vector<std::string> out = args;
  for (const auto& [key, value] : j.items()) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out.push_back(flag);
      out.push_back(joined);
    } else {
      out.push_back(flag);
      out.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return out;
}

int run(const std::vector<std::string>& raw, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tower of Hanoi evaluative-feedback toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", TOHFB_VERSION);
  Common common;

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "value iteration and an optimal path for one target");
  solve->add_option("--n", sa.n, "disk count")->check(CLI::Range(1, kMaxDisks));
  solve->add_option("--target", sa.target, "target state digits")->required();
  solve->add_option("--start", sa.start, "start state (default all on peg 0)");
  solve->add_option("--gamma", sa.gamma, "discount");
  add_common(solve, common);

  SimulateArgs ma;
  auto* sim = app.add_subcommand("simulate", "synthetic cohort through the 15-trial protocol");
  sim->add_option("--spec", ma.spec, "cohort spec JSON");
  sim->add_option("--agents", ma.agents, "number of agents");
  sim->add_option("--model", ma.model, "M1, M2, M3 or M4");
  sim->add_option("--k", ma.k, "feedback gain");
  sim->add_option("--target-weight", ma.target_weight, "reward for reaching the target");
  sim->add_option("--condition", ma.condition, "experiment condition");
  sim->add_option("--gamma", ma.gamma, "discount");
  sim->add_option("--request-rate", ma.request_rate, "feedback request probability (optional condition)");
  sim->add_option("--training-target", ma.training_target, "fixed training target");
  add_common(sim, common);

  IrlArgs ia;
  Filters ifl;
  auto* irl_cmd = app.add_subcommand("irl", "maximum-entropy IRL with cross-validated L1 penalty");
  irl_cmd->add_option("--data", ia.data, "trajectory JSONL")->required();
  irl_cmd->add_option("--features", ia.features, "all or subset8");
  irl_cmd->add_flag("--split-by-triangle", ia.split, "fit T2 and T3 targets separately");
  irl_cmd->add_option("--target", ia.target, "keep one target and make it absorbing");
  irl_cmd->add_option("--folds", ia.folds, "cross-validation folds");
  irl_cmd->add_option("--lambdas", ia.lambdas, "comma-separated penalty grid");
  irl_cmd->add_option("--gamma", ia.gamma, "discount");
  add_filters(irl_cmd, ifl);
  add_common(irl_cmd, common);

  FitArgs fa;
  Filters ffl;
  auto* fit_cmd = app.add_subcommand("fit-models", "AIC/BIC comparison of the four feedback models");
  fit_cmd->add_option("--data", fa.data, "trajectory JSONL")->required();
  fit_cmd->add_option("--features", fa.features, "both, all or subset8");
  fit_cmd->add_option("--folds", fa.folds, "cross-validation folds");
  fit_cmd->add_option("--lambdas", fa.lambdas, "comma-separated penalty grid");
  fit_cmd->add_option("--gamma", fa.gamma, "discount");
  add_filters(fit_cmd, ffl);
  add_common(fit_cmd, common);

  StatsArgs ta;
  auto* st = app.add_subcommand("stats", "success rates, score quantiles and t-tests");
  st->add_option("--data", ta.data, "trajectory JSONL")->required();
  st->add_option("--data-b", ta.data_b, "second dataset to compare against");
  st->add_option("--compare", ta.compare, "two conditions, e.g. numeric,no_feedback");
  st->add_option("--phase", ta.phase, "training or transfer");
  st->add_option("--condition", ta.condition, "keep one condition");
  st->add_flag("--welch", ta.welch, "Welch's unequal-variance test");
  add_common(st, common);

  ServeArgs va;
  auto* serve = app.add_subcommand("serve", "HTTP experiment service");
  serve->add_option("--port", va.port, "TCP port");
  serve->add_option("--host", va.host, "bind address");
  serve->add_option("--data-dir", va.data_dir, "persistence directory");
  add_common(serve, common);

  try {
    const auto args = expand_config(raw);
    std::vector<const char*> argv{"tohfb"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << TOHFB_VERSION << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 2;
  }

  try {
    if (*solve) {
      try {
        TohState::parse(sa.target, sa.n);
      } catch (const Error& e) {
        err << "usage error: --target: " << e.what() << '\n';
        return 2;
      }
      return cmd_solve(sa, common, out);
    }
    if (*sim) return cmd_simulate(ma, common, out);
    if (*irl_cmd) return cmd_irl(ia, ifl, common, out);
    if (*fit_cmd) return cmd_fit_models(fa, ffl, common, out);
    if (*st) return cmd_stats(ta, common, out);
    if (*serve) return cmd_serve(va, common, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tohfb::cli
