#include "itmdp/cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "itmdp/belief.hpp"
#include "itmdp/errors.hpp"
#include "itmdp/it_model.hpp"
#include "itmdp/json_io.hpp"
#include "itmdp/mdp_core.hpp"
#include "itmdp/semi_markov.hpp"
#include "itmdp/simulator.hpp"

namespace itmdp {

namespace {

using json_io::Json;
using Clock = std::chrono::steady_clock;

class OutputError : public Error {
public:
    using Error::Error;
};

struct Common {
    std::string params;
    std::string out;
    bool json = false;
};

struct SimFlags {
    std::uint64_t seed = 0;
    std::uint64_t stages = 100000;
    std::uint64_t trajectories = 1;
    std::uint64_t burn_in = 0;
    std::string initial_state;
};

std::string real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{:.17g}", v);
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw OutputError(fmt::format("cannot write '{}'", tmp));
        f << content;
        f.flush();
        if (!f) throw OutputError(fmt::format("write to '{}' failed", tmp));
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw OutputError(fmt::format("cannot rename '{}' to '{}': {}", tmp, path, ec.message()));
}

// Carries the run manifest and writes outputs either to the stream or, with
// --out, atomically to a file plus a `.manifest.json` sidecar that also
// records the wall-clock duration.
class Emitter {
public:
    Emitter(std::string command, std::ostream& out) : command_(std::move(command)), out_(out) {}

    Json manifest(const Json& inputs, const Json& options) {
        manifest_ = Json{{"tool", "itmdp"},
                         {"version", kToolVersion},
                         {"command", command_},
                         {"inputs", inputs},
                         {"options", options}};
        return manifest_;
    }

    void emit(const std::string& path, const std::string& content) {
        if (path.empty()) {
            out_ << content;
            return;
        }
        write_atomic(path, content);
        Json side = manifest_;
        side["output"] = path;
        side["wall_clock_seconds"] =
            std::chrono::duration<double>(Clock::now() - start_).count();
        write_atomic(path + ".manifest.json", side.dump(2) + "\n");
    }

private:
    std::string command_;
    std::ostream& out_;
    Json manifest_;
    Clock::time_point start_ = Clock::now();
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

bool is_model(const Json& doc) { return doc.is_object() && doc.contains("transition"); }

std::optional<std::size_t> parse_index(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(s));
}

std::size_t resolve(const std::string& s, const std::vector<std::string>& labels, const char* what) {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == s) return i;
    if (auto i = parse_index(s); i && *i < labels.size()) return *i;
    throw ParseError(fmt::format("unknown {} '{}'", what, s));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

// "W", "D" or "R" names a candidate policy of the three-state model; a
// comma-separated list gives one action (label or index) per state; any
// other string gives one single-character action label per state.
StationaryPolicy parse_policy(const std::string& text, const GenericMdp& model, bool three_state) {
    if (three_state && text.size() == 1) {
        for (auto c : it::kCandidates)
            if (it::letter(c) == text[0]) return it::policy_of(c);
    }
    StationaryPolicy p;
    if (text.find(',') != std::string::npos || parse_index(text)) {
        for (const auto& part : split(text, ',')) p.action_of_state.push_back(resolve(part, model.action_labels, "action"));
    } else {
        for (char ch : text) p.action_of_state.push_back(resolve(std::string(1, ch), model.action_labels, "action"));
    }
    return p;
}

std::string policy_text(const StationaryPolicy& p, const GenericMdp& m) {
    std::string s;
    for (std::size_t i = 0; i < p.action_of_state.size(); ++i) {
        if (i) s += ' ';
        s += m.state_labels[i] + ":" + m.action_labels[p.action_of_state[i]];
    }
    return s;
}

Json policy_labels(const StationaryPolicy& p, const GenericMdp& m) {
    Json out = Json::array();
    for (auto u : p.action_of_state) out.push_back(m.action_labels[u]);
    return out;
}

SimConfig sim_config(const SimFlags& f, const GenericMdp& model) {
    SimConfig c;
    c.seed = f.seed;
    c.stages = f.stages;
    c.trajectories = f.trajectories;
    c.burn_in = f.burn_in;
    if (!f.initial_state.empty()) c.initial_state = resolve(f.initial_state, model.state_labels, "state");
    return c;
}

Json sim_options(const SimFlags& f) {
    return Json{{"seed", f.seed},
                {"stages", f.stages},
                {"trajectories", f.trajectories},
                {"burn_in", f.burn_in},
                {"initial_state", f.initial_state.empty() ? Json("0") : Json(f.initial_state)}};
}

void add_common(CLI::App* cmd, Common& c, bool json_flag = true) {
    cmd->add_option("--params", c.params, "Input JSON document")->required();
    cmd->add_option("--out", c.out, "Write output to this file instead of stdout");
    if (json_flag) cmd->add_flag("--json", c.json, "Emit JSON instead of text");
}

void add_sim(CLI::App* cmd, SimFlags& f) {
    cmd->add_option("--seed", f.seed, "Base seed; trajectory i uses stream (seed, i)");
    cmd->add_option("--stages", f.stages, "Stages per trajectory")->check(CLI::PositiveNumber);
    cmd->add_option("--trajectories", f.trajectories, "Independent trajectories")->check(CLI::PositiveNumber);
    cmd->add_option("--burn-in", f.burn_in, "Initial stages excluded from averages");
    cmd->add_option("--initial-state", f.initial_state, "Initial state label or index (default 0)");
}

// ---- commands -------------------------------------------------------------

int cmd_validate(const Common& c, std::ostream& out) {
    Emitter em("validate", out);
    const Json doc = json_io::parse_file(c.params);
    std::string kind;
    std::vector<std::string> problems;
    if (is_model(doc) && doc.contains("durations")) {
        kind = "semi-markov";
        problems = validate(json_io::smdp_from_json(doc));
    } else if (is_model(doc)) {
        kind = "mdp";
        for (const auto& v : validate(json_io::mdp_from_json(doc))) problems.push_back(v.message);
    } else {
        kind = "params";
        problems = it::violations(json_io::params_from_json(doc));
        if (doc.contains("detector"))
            for (auto& v : violations(json_io::detector_from_json(doc["detector"])))
                problems.push_back("detector: " + v);
    }
    const Json manifest = em.manifest(doc, Json::object());
    std::string text;
    if (c.json) {
        text = dump(Json{{"manifest", manifest},
                         {"kind", kind},
                         {"valid", problems.empty()},
                         {"violations", problems}});
    } else if (problems.empty()) {
        text = fmt::format("valid {}\n", kind);
    } else {
        for (const auto& p : problems) text += p + "\n";
    }
    em.emit(c.out, text);
    return problems.empty() ? exit_ok : exit_domain;
}

std::string optimal_text(const it::PolicyTriple& t) {
    if (!t.tie()) return std::string(it::name(t.recommended));
    std::string s = "tie {";
    for (std::size_t i = 0; i < t.optimal.size(); ++i) {
        if (i) s += ',';
        s += it::letter(t.optimal[i]);
    }
    return s + "}";
}

std::string sufficiency_text(const it::SufficiencyClass& s, const char* mode) {
    const double weak = s.refined ? s.bounds.refined_weak : s.bounds.basic_weak;
    const double strong = s.refined ? s.bounds.refined_strong : s.bounds.basic_strong;
    return fmt::format("sufficiency_{} = {} (weak bound {}, strong bound {})\n", mode, it::name(s.cls),
                       real(weak), real(strong));
}

int cmd_evaluate(const Common& c, std::ostream& out) {
    Emitter em("evaluate", out);
    const Json doc = json_io::parse_file(c.params);
    const it::ItParams p = json_io::params_from_json(doc);
    it::require_valid(p);
    const auto t = it::evaluate_triple(p);
    const auto cmp = it::compare(p);
    const auto basic = it::classify_sufficiency(p, false);
    const auto refined = it::classify_sufficiency(p, true);
    const auto geo = it::partition_geometry(p);
    const Json manifest = em.manifest(json_io::to_json(p), Json::object());

    std::string text;
    if (c.json) {
        text = dump(Json{{"manifest", manifest},
                         {"params", json_io::to_json(p)},
                         {"triple", json_io::to_json(t)},
                         {"comparison", json_io::to_json(cmp)},
                         {"sufficiency", Json{{"basic", json_io::to_json(basic)},
                                              {"refined", json_io::to_json(refined)}}},
                         {"geometry", json_io::to_json(geo)}});
    } else {
        for (auto cand : it::kCandidates) {
            const auto i = static_cast<std::size_t>(cand);
            const char l = it::letter(cand);
            text += fmt::format("lambda_{} = {}\n", l, real(t.lambda[i]));
            text += fmt::format("lambda_M_{} = {}\n", l, real(t.decomposition[i].maintenance));
            text += fmt::format("lambda_F_{} = {}\n", l, real(t.decomposition[i].failure));
            text += fmt::format("mttf_{} = {}\n", l, real(t.mttf[i]));
        }
        text += fmt::format("optimal = {}\n", optimal_text(t));
        text += fmt::format("recommended = {}\n", it::name(t.recommended));
        text += fmt::format("best_lambda = {}\n", real(t.best_lambda()));
        auto ineq = [&](const char* label, const it::Inequality& q) {
            text += fmt::format("{} = {} (margin {})\n", label, q.holds ? "true" : "false", real(q.margin));
        };
        ineq("W_below_R", cmp.wait_below_reset);
        ineq("W_below_D", cmp.wait_below_defend);
        ineq("D_below_R", cmp.defend_below_reset);
        text += sufficiency_text(basic, "basic");
        text += sufficiency_text(refined, "refined");
        text += fmt::format("defend_effectiveness = {}\n", it::name(basic.defend));
    }
    em.emit(c.out, text);
    return exit_ok;
}

int cmd_partition(const Common& c, const std::string& plane_text, std::size_t grid, std::ostream& out) {
    Emitter em("partition", out);
    const auto plane = it::parse_plane(plane_text);
    if (!plane) throw ParseError(fmt::format("unknown plane '{}' (expected cA-cD, cR-cD or 3d)", plane_text));
    const it::ItParams p = json_io::params_from_json(json_io::parse_file(c.params));
    em.manifest(json_io::to_json(p), Json{{"plane", std::string(it::name(*plane))}, {"grid", grid}});
    const auto cells = it::partition_sweep(p, *plane, grid);
    const bool three = *plane == it::Plane::full_over_failure;

    std::string text = three ? "x,y,z,region,lambda_W,lambda_D,lambda_R,margin\n"
                             : "x,y,region,lambda_W,lambda_D,lambda_R,margin\n";
    for (const auto& cell : cells) {
        text += real(cell.x) + ',' + real(cell.y) + ',';
        if (three) text += real(cell.z.value_or(0.0)) + ',';
        text += fmt::format("{},{},{},{},{}\n", it::name(cell.region), real(cell.lambda[0]),
                            real(cell.lambda[1]), real(cell.lambda[2]), real(cell.margin));
    }
    em.emit(c.out, text);
    return exit_ok;
}

int cmd_sufficiency(const Common& c, std::ostream& out) {
    Emitter em("sufficiency", out);
    const it::ItParams p = json_io::params_from_json(json_io::parse_file(c.params));
    if (auto v = it::probability_violations(p); !v.empty()) throw InvalidInput(std::move(v));
    const auto basic = it::classify_sufficiency(p, false);
    const auto refined = it::classify_sufficiency(p, true);
    const Json manifest = em.manifest(json_io::to_json(p), Json::object());
    std::string text;
    if (c.json) {
        text = dump(Json{{"manifest", manifest},
                         {"basic", json_io::to_json(basic)},
                         {"refined", json_io::to_json(refined)}});
    } else {
        text += sufficiency_text(basic, "basic");
        text += sufficiency_text(refined, "refined");
        text += fmt::format("z2_bound = {}\n", real(basic.bounds.z2_exceeds_one));
        text += fmt::format("x1_exceeds_one = {}\n", refined.x1_exceeds_one);
        text += fmt::format("x2_exceeds_one = {}\n", refined.x2_exceeds_one);
        text += fmt::format("z2_exceeds_one = {}\n", refined.z2_exceeds_one);
        text += fmt::format("defend_effectiveness = {}\n", it::name(basic.defend));
    }
    em.emit(c.out, text);
    return exit_ok;
}

// A model document, or three-state parameters turned into their MDP.
GenericMdp load_model(const Json& doc, std::optional<it::ItParams>* params = nullptr) {
    if (is_model(doc)) return json_io::mdp_from_json(doc);
    const it::ItParams p = json_io::params_from_json(doc);
    it::require_valid(p);
    if (params) *params = p;
    GenericMdp m = it::build_mdp(p);
    if (doc.contains("detector")) m = with_detector(std::move(m), json_io::detector_from_json(doc["detector"]));
    return m;
}

int cmd_solve(const Common& c, bool enumerate, std::ostream& out) {
    Emitter em("solve", out);
    const Json doc = json_io::parse_file(c.params);
    const GenericMdp model = load_model(doc);
    require_valid(model);
    const Json manifest = em.manifest(doc, Json{{"enumerate", enumerate}});
    const RviResult r = relative_value_iteration(model);
    std::vector<EnumeratedPolicy> ranking;
    if (enumerate) ranking = enumerate_policies(model);

    std::string text;
    if (c.json) {
        Json greedy = Json::array();
        for (const auto& g : r.greedy_sets) greedy.push_back(g);
        Json j{{"manifest", manifest},
               {"lambda", json_io::number(r.lambda)},
               {"policy", json_io::to_json(r.policy)},
               {"policy_labels", policy_labels(r.policy, model)},
               {"greedy_sets", greedy},
               {"bias", json_io::to_json(r.bias)},
               {"iterations", r.iterations}};
        if (enumerate) {
            Json list = Json::array();
            for (const auto& e : ranking)
                list.push_back(Json{{"policy", json_io::to_json(e.policy)},
                                    {"lambda", e.evaluation ? json_io::number(e.evaluation->lambda) : Json()},
                                    {"multichain", e.multichain},
                                    {"tie_group", e.tie_group}});
            j["enumeration"] = std::move(list);
        }
        text = dump(j);
    } else {
        text += fmt::format("lambda = {}\n", real(r.lambda));
        text += fmt::format("policy = {}\n", policy_text(r.policy, model));
        std::string g;
        for (std::size_t i = 0; i < r.greedy_sets.size(); ++i) {
            if (i) g += ' ';
            g += model.state_labels[i] + ":{";
            for (std::size_t k = 0; k < r.greedy_sets[i].size(); ++k) {
                if (k) g += ',';
                g += model.action_labels[r.greedy_sets[i][k]];
            }
            g += '}';
        }
        text += fmt::format("greedy = {}\n", g);
        text += fmt::format("iterations = {}\n", r.iterations);
        for (std::size_t k = 0; k < ranking.size(); ++k) {
            const auto& e = ranking[k];
            text += fmt::format("rank {}: {} lambda = {} group {}\n", k + 1, policy_text(e.policy, model),
                                e.evaluation ? real(e.evaluation->lambda) : "multichain", e.tie_group);
        }
    }
    em.emit(c.out, text);
    return exit_ok;
}

int cmd_simulate(const Common& c, const SimFlags& f, const std::string& policy_arg,
                 const std::string& passage_arg, const PassageConfig& passage, std::ostream& out) {
    Emitter em("simulate", out);
    const Json doc = json_io::parse_file(c.params);
    std::optional<it::ItParams> params;
    const GenericMdp model = load_model(doc, &params);
    require_valid(model);
    StationaryPolicy policy;
    if (!policy_arg.empty()) {
        policy = parse_policy(policy_arg, model, params.has_value());
    } else if (params) {
        policy = it::policy_of(it::evaluate_triple(*params).recommended);
    } else {
        throw ParseError("--policy is required for a generic model");
    }
    require_valid(model, policy);
    const SimConfig config = sim_config(f, model);

    Json options = sim_options(f);
    options["policy"] = json_io::to_json(policy);
    if (!passage_arg.empty()) {
        options["first_passage"] = passage_arg;
        options["hits"] = passage.hits;
        options["stage_cap"] = passage.stage_cap;
    }
    const Json manifest = em.manifest(doc, options);

    SimResult result = simulate(model, policy, config);
    if (!passage_arg.empty()) {
        const auto ends = split(passage_arg, ',');
        if (ends.size() != 2) throw ParseError("--first-passage expects SOURCE,TARGET");
        result.first_passage = first_passage(model, policy, resolve(ends[0], model.state_labels, "state"),
                                             resolve(ends[1], model.state_labels, "state"), config, passage);
    }
    Json j{{"manifest", manifest},
           {"policy", json_io::to_json(policy)},
           {"policy_labels", policy_labels(policy, model)},
           {"result", json_io::to_json(result)}};
    try {
        j["exact_lambda"] = json_io::number(evaluate_policy(model, policy).lambda);
    } catch (const MultichainError&) {
        j["exact_lambda"] = nullptr;
    }
    em.emit(c.out, dump(j));
    return exit_ok;
}

const char* kObservationLetters[] = {"N", "A", "F"};

int cmd_belief_sim(const Common& c, const SimFlags& f, const std::string& detector_path,
                   const BeliefThresholds& th, const std::string& trace_path, std::ostream& out) {
    Emitter em("belief-sim", out);
    const Json doc = json_io::parse_file(c.params);
    const it::ItParams p = json_io::params_from_json(doc);
    it::require_valid(p);
    Json detector_doc;
    if (!detector_path.empty()) detector_doc = json_io::parse_file(detector_path);
    else if (doc.contains("detector")) detector_doc = doc["detector"];
    else throw ParseError("belief-sim needs a detector (a 'detector' field or --detector)");
    const DetectorParams detector = json_io::detector_from_json(detector_doc);
    if (auto v = violations(detector); !v.empty()) throw InvalidInput(std::move(v));
    const GenericMdp model = it::build_mdp(p);
    const SimConfig config = sim_config(f, model);

    Json options = sim_options(f);
    options["defend_on_attack_mass"] = json_io::number(th.defend_on_attack_mass);
    options["reset_on_failure_mass"] = json_io::number(th.reset_on_failure_mass);
    if (!trace_path.empty()) options["trace"] = trace_path;
    Json inputs = json_io::to_json(p);
    inputs["detector"] = json_io::to_json(detector);
    const Json manifest = em.manifest(inputs, options);

    const SimResult result = simulate_pomdp(model, detector, th, config);
    if (!trace_path.empty()) {
        std::string csv = "stage,b_N,b_A,b_F,action,observation\n";
        for (const auto& row : trace_pomdp(model, detector, th, config))
            csv += fmt::format("{},{},{},{},{},{}\n", row.stage, real(row.belief(0)), real(row.belief(1)),
                               real(row.belief(2)), model.action_labels[row.action],
                               kObservationLetters[row.observation]);
        Emitter trace_em("belief-sim", out);
        trace_em.manifest(inputs, options);
        trace_em.emit(trace_path, csv);
    }
    em.emit(c.out, dump(Json{{"manifest", manifest},
                             {"detector", json_io::to_json(detector)},
                             {"result", json_io::to_json(result)}}));
    return exit_ok;
}

int cmd_uniformize(const Common& c, const std::string& action_arg, std::optional<double> tau,
                   std::ostream& out) {
    Emitter em("uniformize", out);
    const Json doc = json_io::parse_file(c.params);
    const SemiMarkovModel model = json_io::smdp_from_json(doc);
    const UniformizedModel u = uniformize(model);
    const std::size_t action = resolve(action_arg, model.embedded.action_labels, "action");
    Json options{{"action", action}};
    if (tau) options["tau"] = json_io::number(*tau);
    const Json manifest = em.manifest(doc, options);
    const Matrix shown = tau ? transition_over_time(u, action, *tau) : u.transition_bar[action];

    std::string text;
    if (c.json) {
        Json j{{"manifest", manifest}, {"uniformized", json_io::to_json(u)}};
        if (tau) j["transition_over_time"] = json_io::to_json(shown);
        text = dump(j);
    } else {
        const auto& labels = model.embedded.state_labels;
        text = "from";
        for (const auto& l : labels) text += ',' + l;
        text += '\n';
        for (Eigen::Index i = 0; i < shown.rows(); ++i) {
            text += labels[static_cast<std::size_t>(i)];
            for (Eigen::Index k = 0; k < shown.cols(); ++k) text += ',' + real(shown(i, k));
            text += '\n';
        }
    }
    em.emit(c.out, text);
    return exit_ok;
}

int cmd_build(const Common& c, std::ostream& out) {
    Emitter em("build", out);
    const Json doc = json_io::parse_file(c.params);
    const GenericMdp model = load_model(doc);
    Json j = json_io::to_json(model);
    j["manifest"] = em.manifest(doc, Json::object());
    em.emit(c.out, dump(j));
    return exit_ok;
}

}  // namespace

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Average-cost MDP toolkit for the three-state intrusion-tolerance model", "itmdp"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common common;
    SimFlags sim;
    std::string plane = "cA-cD";
    std::size_t grid = 101;
    bool enumerate = false;
    std::string policy, passage_arg, detector_path, trace_path, action = "0";
    PassageConfig passage;
    BeliefThresholds thresholds;
    std::optional<double> tau;

    auto* validate_cmd = app.add_subcommand("validate", "Check parameters or a model against every constraint");
    add_common(validate_cmd, common);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Closed-form evaluation of the three candidate policies");
    add_common(evaluate_cmd, common);

    auto* partition_cmd = app.add_subcommand("partition", "Optimal-policy regions over a normalized cost grid (CSV)");
    add_common(partition_cmd, common, false);
    partition_cmd->add_option("--plane", plane, "cA-cD, cR-cD or 3d");
    partition_cmd->add_option("--grid", grid, "Points per axis, endpoints included")->check(CLI::Range(2, 100000));

    auto* sufficiency_cmd = app.add_subcommand("sufficiency", "Classify reset reliability");
    add_common(sufficiency_cmd, common);

    auto* solve_cmd = app.add_subcommand("solve", "Relative value iteration on parameters or a model");
    add_common(solve_cmd, common);
    solve_cmd->add_flag("--enumerate", enumerate, "Also rank every stationary policy");

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo simulation of a stationary policy (JSON)");
    add_common(simulate_cmd, common, false);
    add_sim(simulate_cmd, sim);
    simulate_cmd->add_option("--policy", policy, "W, D, R, a label string such as WDR, or indices 0,1,2");
    simulate_cmd->add_option("--first-passage", passage_arg, "SOURCE,TARGET states for passage statistics");
    simulate_cmd->add_option("--hits", passage.hits, "Passages to collect")->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--stage-cap", passage.stage_cap, "Per-trajectory stage cap for passages")
        ->check(CLI::PositiveNumber);

    auto* belief_cmd = app.add_subcommand("belief-sim", "Simulate a belief-threshold policy under an imperfect detector (JSON)");
    add_common(belief_cmd, common, false);
    add_sim(belief_cmd, sim);
    belief_cmd->add_option("--detector", detector_path, "Detector JSON (default: the params 'detector' field)");
    belief_cmd->add_option("--defend-threshold", thresholds.defend_on_attack_mass, "Defend when b[A] reaches this");
    belief_cmd->add_option("--reset-threshold", thresholds.reset_on_failure_mass, "Reset when b[F] reaches this");
    belief_cmd->add_option("--trace", trace_path, "Write the belief trace of trajectory 0 as CSV");

    auto* uniformize_cmd = app.add_subcommand("uniformize", "Uniformized chain or F(u; tau) of a semi-Markov model");
    add_common(uniformize_cmd, common);
    uniformize_cmd->add_option("--action", action, "Action label or index");
    uniformize_cmd->add_option("--tau", tau, "Elapsed time; omit to print the uniformized matrix");

    auto* build_cmd = app.add_subcommand("build", "Emit the model JSON of three-state parameters");
    add_common(build_cmd, common, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*validate_cmd) return cmd_validate(common, out);
        if (*evaluate_cmd) return cmd_evaluate(common, out);
        if (*partition_cmd) return cmd_partition(common, plane, grid, out);
        if (*sufficiency_cmd) return cmd_sufficiency(common, out);
        if (*solve_cmd) return cmd_solve(common, enumerate, out);
        if (*simulate_cmd) return cmd_simulate(common, sim, policy, passage_arg, passage, out);
        if (*belief_cmd) return cmd_belief_sim(common, sim, detector_path, thresholds, trace_path, out);
        if (*uniformize_cmd) return cmd_uniformize(common, action, tau, out);
        if (*build_cmd) return cmd_build(common, out);
    } catch (const InvalidInput& e) {
        for (const auto& v : e.violations()) err << "error: " << v << '\n';
        return exit_domain;
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << " (last span " << real(e.last_span()) << ")\n";
        return exit_nonconvergence;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const OutputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_domain;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    }
    return exit_input;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("itmdp");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return run_cli(static_cast<int>(storage.size()), argv.data(), out, err);
}

}  // namespace itmdp
