#include "itmdp/json_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "itmdp/errors.hpp"

namespace itmdp::json_io {

Json parse_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(fmt::format("malformed JSON: {}", e.what()));
    }
}

Json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(fmt::format("cannot read '{}'", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return Json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(fmt::format("{}: malformed JSON: {}", path, e.what()));
    }
}

Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double to_double(const Json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw ParseError(fmt::format("{}: expected a number, got {}", where, j.dump()));
}

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw ParseError(fmt::format("{}: expected an object", where));
    const auto it = j.find(key);
    if (it == j.end()) throw ParseError(fmt::format("{}: missing field '{}'", where, key));
    return *it;
}

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ParseError(fmt::format("{}: unknown field '{}'", where, key));
}

std::size_t to_index(const Json& j, const std::string& where) {
    if (!j.is_number_integer() || j.get<long long>() < 0)
        throw ParseError(fmt::format("{}: expected a nonnegative integer", where));
    return j.get<std::size_t>();
}

std::vector<std::string> labels_from_json(const Json& j, const std::string& where) {
    if (!j.is_array()) throw ParseError(fmt::format("{}: expected an array of strings", where));
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ParseError(fmt::format("{}: expected an array of strings", where));
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::vector<Matrix> matrices_from_json(const Json& j, std::size_t count, const std::string& where) {
    if (!j.is_array() || j.size() != count)
        throw ParseError(fmt::format("{}: expected an array of {} matrices", where, count));
    std::vector<Matrix> out;
    for (std::size_t u = 0; u < count; ++u)
        out.push_back(matrix_from_json(j[u], fmt::format("{}[{}]", where, u)));
    return out;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
    Json out = Json::array();
    for (const auto& m : ms) out.push_back(to_json(m));
    return out;
}

Json candidates_to_json(const std::vector<it::Candidate>& cs) {
    Json out = Json::array();
    for (auto c : cs) out.push_back(std::string(1, it::letter(c)));
    return out;
}

}  // namespace

Json to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

Json to_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(number(m(i, k)));
        out.push_back(std::move(row));
    }
    return out;
}

Matrix matrix_from_json(const Json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j[0].is_array())
        throw ParseError(fmt::format("{}: expected a non-empty array of rows", where));
    const std::size_t cols = j[0].size();
    Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError(fmt::format("{}: row {} has a different length", where, i));
        for (std::size_t k = 0; k < cols; ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
                to_double(j[i][k], fmt::format("{}[{}][{}]", where, i, k));
    }
    return m;
}

it::ItParams params_from_json(const Json& j) {
    const std::string where = "params";
    if (!j.is_object()) throw ParseError("params: expected an object");
    reject_unknown(j, {"p_A", "p_F", "p_D", "p_R", "c_A", "c_D", "c_F", "c_R", "detector", "manifest"},
                   where);
    it::ItParams p;
    p.p_A = to_double(field(j, "p_A", where), "p_A");
    p.p_F = to_double(field(j, "p_F", where), "p_F");
    p.p_D = to_double(field(j, "p_D", where), "p_D");
    if (j.contains("p_R")) p.p_R = to_double(j["p_R"], "p_R");
    p.c_A = to_double(field(j, "c_A", where), "c_A");
    p.c_D = to_double(field(j, "c_D", where), "c_D");
    p.c_F = to_double(field(j, "c_F", where), "c_F");
    p.c_R = to_double(field(j, "c_R", where), "c_R");
    return p;
}

Json to_json(const it::ItParams& p) {
    return Json{{"p_A", number(p.p_A)}, {"p_F", number(p.p_F)}, {"p_D", number(p.p_D)},
                {"p_R", number(p.p_R)}, {"c_A", number(p.c_A)}, {"c_D", number(p.c_D)},
                {"c_F", number(p.c_F)}, {"c_R", number(p.c_R)}};
}

DetectorParams detector_from_json(const Json& j) {
    const std::string where = "detector";
    if (!j.is_object()) throw ParseError("detector: expected an object");
    reject_unknown(j,
                   {"q_A_given_N", "q_N_given_A", "q_A_given_N_defend", "q_N_given_A_defend",
                    "failure_fidelity"},
                   where);
    DetectorParams d;
    d.q_A_given_N = to_double(field(j, "q_A_given_N", where), "q_A_given_N");
    d.q_N_given_A = to_double(field(j, "q_N_given_A", where), "q_N_given_A");
    if (j.contains("q_A_given_N_defend"))
        d.q_A_given_N_defend = to_double(j["q_A_given_N_defend"], "q_A_given_N_defend");
    if (j.contains("q_N_given_A_defend"))
        d.q_N_given_A_defend = to_double(j["q_N_given_A_defend"], "q_N_given_A_defend");
    if (j.contains("failure_fidelity"))
        d.failure_fidelity = to_double(j["failure_fidelity"], "failure_fidelity");
    return d;
}

Json to_json(const DetectorParams& d) {
    Json out{{"q_A_given_N", number(d.q_A_given_N)}, {"q_N_given_A", number(d.q_N_given_A)}};
    if (d.q_A_given_N_defend) out["q_A_given_N_defend"] = number(*d.q_A_given_N_defend);
    if (d.q_N_given_A_defend) out["q_N_given_A_defend"] = number(*d.q_N_given_A_defend);
    out["failure_fidelity"] = number(d.failure_fidelity);
    return out;
}

namespace {

GenericMdp mdp_fields(const Json& j, const std::string& where) {
    GenericMdp m;
    const std::size_t n = to_index(field(j, "n_states", where), "n_states");
    const std::size_t a = to_index(field(j, "n_actions", where), "n_actions");
    if (n == 0 || a == 0) throw ParseError(fmt::format("{}: n_states and n_actions must be positive", where));
    if (j.contains("state_labels")) {
        m.state_labels = labels_from_json(j["state_labels"], "state_labels");
    } else {
        for (std::size_t i = 0; i < n; ++i) m.state_labels.push_back(fmt::format("s{}", i));
    }
    if (j.contains("action_labels")) {
        m.action_labels = labels_from_json(j["action_labels"], "action_labels");
    } else {
        for (std::size_t u = 0; u < a; ++u) m.action_labels.push_back(fmt::format("a{}", u));
    }
    if (m.state_labels.size() != n || m.action_labels.size() != a)
        throw ParseError(fmt::format("{}: label counts disagree with n_states/n_actions", where));
    m.transition = matrices_from_json(field(j, "transition", where), a, "transition");
    m.cost = matrices_from_json(field(j, "cost", where), a, "cost");
    if (j.contains("observation")) m.observation = matrices_from_json(j["observation"], a, "observation");
    if (j.contains("cost_channel")) {
        const Json& ch = j["cost_channel"];
        if (!ch.is_array() || ch.size() != a)
            throw ParseError(fmt::format("cost_channel: expected an array of {} matrices", a));
        std::vector<Matrix> maint;
        for (std::size_t u = 0; u < a; ++u) {
            const Matrix& c = m.cost[u];
            const Json& mj = ch[u];
            if (!mj.is_array() || mj.size() != static_cast<std::size_t>(c.rows()))
                throw ParseError(fmt::format("cost_channel[{}]: shape differs from cost[{}]", u, u));
            Matrix out(c.rows(), c.cols());
            for (Eigen::Index i = 0; i < c.rows(); ++i) {
                const Json& row = mj[static_cast<std::size_t>(i)];
                if (!row.is_array() || row.size() != static_cast<std::size_t>(c.cols()))
                    throw ParseError(fmt::format("cost_channel[{}]: shape differs from cost[{}]", u, u));
                for (Eigen::Index k = 0; k < c.cols(); ++k) {
                    const Json& e = row[static_cast<std::size_t>(k)];
                    const std::string at = fmt::format("cost_channel[{}][{}][{}]", u, i, k);
                    if (e == "M") out(i, k) = c(i, k);
                    else if (e == "F") out(i, k) = 0.0;
                    else if (e.is_number()) out(i, k) = e.get<double>();
                    else throw ParseError(fmt::format("{}: expected \"M\", \"F\" or a number", at));
                }
            }
            maint.push_back(std::move(out));
        }
        m.maintenance = std::move(maint);
    }
    return m;
}

Json mdp_json(const GenericMdp& m) {
    Json out{{"n_states", m.n_states()},
             {"n_actions", m.n_actions()},
             {"state_labels", m.state_labels},
             {"action_labels", m.action_labels},
             {"transition", matrices_to_json(m.transition)},
             {"cost", matrices_to_json(m.cost)}};
    if (m.observation) out["observation"] = matrices_to_json(*m.observation);
    if (m.maintenance) {
        Json ch = Json::array();
        for (std::size_t u = 0; u < m.maintenance->size(); ++u) {
            const Matrix& mm = (*m.maintenance)[u];
            const Matrix& c = m.cost[u];
            Json mat = Json::array();
            for (Eigen::Index i = 0; i < mm.rows(); ++i) {
                Json row = Json::array();
                for (Eigen::Index k = 0; k < mm.cols(); ++k) {
                    if (mm(i, k) == 0.0) row.push_back("F");
                    else if (mm(i, k) == c(i, k)) row.push_back("M");
                    else row.push_back(number(mm(i, k)));
                }
                mat.push_back(std::move(row));
            }
            ch.push_back(std::move(mat));
        }
        out["cost_channel"] = std::move(ch);
    }
    return out;
}

}  // namespace

GenericMdp mdp_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("model: expected an object");
    reject_unknown(j,
                   {"n_states", "n_actions", "state_labels", "action_labels", "transition", "cost",
                    "observation", "cost_channel", "manifest"},
                   "model");
    return mdp_fields(j, "model");
}

Json to_json(const GenericMdp& m) { return mdp_json(m); }

SemiMarkovModel smdp_from_json(const Json& j) {
    if (!j.is_object()) throw ParseError("model: expected an object");
    reject_unknown(j,
                   {"n_states", "n_actions", "state_labels", "action_labels", "transition", "cost",
                    "observation", "cost_channel", "durations", "manifest"},
                   "model");
    SemiMarkovModel s;
    s.embedded = mdp_fields(j, "model");
    s.durations = matrices_from_json(field(j, "durations", "model"), s.embedded.n_actions(), "durations");
    return s;
}

Json to_json(const SemiMarkovModel& m) {
    Json out = mdp_json(m.embedded);
    out["durations"] = matrices_to_json(m.durations);
    return out;
}

StationaryPolicy policy_from_json(const Json& j, const GenericMdp& model) {
    StationaryPolicy p;
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        for (char ch : s) {
            std::size_t found = model.n_actions();
            for (std::size_t u = 0; u < model.n_actions(); ++u)
                if (model.action_labels[u] == std::string(1, ch)) found = u;
            if (found == model.n_actions())
                throw ParseError(fmt::format("policy: no action labelled '{}'", ch));
            p.action_of_state.push_back(found);
        }
    } else if (j.is_array()) {
        for (const auto& e : j) p.action_of_state.push_back(to_index(e, "policy"));
    } else {
        throw ParseError("policy: expected an array of action indices or a string of labels");
    }
    return p;
}

Json to_json(const StationaryPolicy& p) { return Json(p.action_of_state); }

Json to_json(const it::PolicyTriple& t) {
    Json policies = Json::object();
    for (auto c : it::kCandidates) {
        const auto i = static_cast<std::size_t>(c);
        policies[std::string(it::name(c))] = Json{
            {"lambda", number(t.lambda[i])},
            {"lambda_maintenance", number(t.decomposition[i].maintenance)},
            {"lambda_failure", number(t.decomposition[i].failure)},
            {"mttf", number(t.mttf[i])},
        };
    }
    return Json{{"policies", std::move(policies)},
                {"g_wait", number(t.g_wait)},
                {"q_wait", number(t.q_wait)},
                {"optimal", candidates_to_json(t.optimal)},
                {"tie", t.tie()},
                {"recommended", std::string(it::name(t.recommended))},
                {"best_lambda", number(t.best_lambda())}};
}

namespace {

Json inequality_json(const it::Inequality& q) {
    return Json{{"lhs", number(q.lhs)}, {"rhs", number(q.rhs)}, {"margin", number(q.margin)},
                {"holds", q.holds}};
}

}  // namespace

Json to_json(const it::Comparison& c) {
    return Json{{"wait_below_reset", inequality_json(c.wait_below_reset)},
                {"wait_below_defend", inequality_json(c.wait_below_defend)},
                {"defend_below_reset", inequality_json(c.defend_below_reset)}};
}

Json to_json(const it::SufficiencyClass& s) {
    const auto& b = s.bounds;
    return Json{{"class", std::string(it::name(s.cls))},
                {"refined", s.refined},
                {"thresholds",
                 Json{{"basic_weak", number(b.basic_weak)},
                      {"basic_strong", number(b.basic_strong)},
                      {"refined_weak", number(b.refined_weak)},
                      {"refined_strong", number(b.refined_strong)},
                      {"z2_exceeds_one", number(b.z2_exceeds_one)},
                      {"lowly_cutoff", number(b.lowly_cutoff)},
                      {"highly_cutoff", number(b.highly_cutoff)}}},
                {"x1_exceeds_one", s.x1_exceeds_one},
                {"x2_exceeds_one", s.x2_exceeds_one},
                {"z2_exceeds_one", s.z2_exceeds_one},
                {"defend_effectiveness", std::string(it::name(s.defend))}};
}

namespace {

Json point_json(const it::Point3& p) { return Json::array({number(p.x), number(p.y), number(p.z)}); }

}  // namespace

Json to_json(const it::PartitionGeometry& g) {
    return Json{{"y0", number(g.y0)},
                {"y1", number(g.y1)},
                {"y2", number(g.y2)},
                {"y3", number(g.y3)},
                {"x1", number(g.x1)},
                {"x2", number(g.x2)},
                {"z1", number(g.z1)},
                {"z2", number(g.z2)},
                {"m1", number(g.m1)},
                {"meeting_point", Json::array({number(g.meet_ca), number(g.meet_cd)})},
                {"junction_low", point_json(g.junction_low)},
                {"junction_high", point_json(g.junction_high)},
                {"x1_outside_unit", g.x1_outside_unit},
                {"x2_outside_unit", g.x2_outside_unit},
                {"z2_outside_unit", g.z2_outside_unit}};
}

Json to_json(const PolicyEvaluation& e) {
    Json out{{"lambda", number(e.lambda)},
             {"bias", to_json(e.bias)},
             {"stationary_dist", to_json(e.stationary_dist)}};
    if (e.lambda_maintenance) out["lambda_maintenance"] = number(*e.lambda_maintenance);
    if (e.lambda_failure) out["lambda_failure"] = number(*e.lambda_failure);
    return out;
}

Json to_json(const FirstPassageStats& f) {
    return Json{{"source", f.source},          {"target", f.target},
                {"mean_stages", number(f.mean_stages)}, {"std_error", number(f.std_error)},
                {"count", f.count},            {"censored", f.censored},
                {"note", f.note}};
}

Json to_json(const SimResult& r) {
    Json occ = Json::array();
    for (double v : r.occupancy) occ.push_back(number(v));
    Json out{{"mean_cost_per_stage", number(r.mean_cost_per_stage)},
             {"std_error", number(r.std_error)}};
    if (r.maintenance_mean) out["maintenance_mean"] = number(*r.maintenance_mean);
    if (r.failure_mean) out["failure_mean"] = number(*r.failure_mean);
    out["occupancy"] = std::move(occ);
    if (r.first_passage) out["first_passage"] = to_json(*r.first_passage);
    return out;
}

Json to_json(const UniformizedModel& u) {
    return Json{{"d_bar", number(u.d_bar)},
                {"exit_means", to_json(u.exit_means)},
                {"transition_bar", matrices_to_json(u.transition_bar)}};
}

}  // namespace itmdp::json_io
