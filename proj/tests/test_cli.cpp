#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "itmdp/cli.hpp"
#include "itmdp/json_io.hpp"

namespace fs = std::filesystem;
using itmdp::json_io::Json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = itmdp::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("itmdp_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string write(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kExampleA = R"({"p_A":0.5,"p_F":0.5,"p_D":0.6,"p_R":1,"c_A":1,"c_D":0.5,"c_F":10,"c_R":2})";

std::string meeting_point() {
    Json j{{"p_A", 0.5}, {"p_F", 0.3}, {"p_D", 0.6}, {"p_R", 1.0},
           {"c_A", 0.5 * 2.0 / 1.5}, {"c_D", 0.6 * 2.0}, {"c_F", 10.0}, {"c_R", 2.0}};
    return j.dump();
}

}  // namespace

TEST_CASE("validate exit codes") {
    CHECK(run({"validate", "--params", write("a.json", kExampleA)}).code == 0);
    const Run bad = run({"validate", "--params",
                         write("bad.json", R"({"p_A":0.5,"p_F":0.5,"p_D":0.6,"c_A":1,"c_D":3,"c_F":10,"c_R":2})")});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("c_D < c_R") != std::string::npos);
    CHECK(run({"validate", "--params", write("mal.json", "{\"p_A\": ")}).code == 2);
    CHECK(run({"validate", "--params", (scratch() / "missing.json").string()}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("validate a generic model") {
    const std::string model = write("m.json", R"({"n_states":1,"n_actions":1,"transition":[[[0.9]]],"cost":[[[1]]]})");
    const Run r = run({"validate", "--params", model, "--json"});
    CHECK(r.code == 1);
    const Json j = Json::parse(r.out);
    CHECK(j["kind"] == "mdp");
    CHECK(j["valid"] == false);
}

TEST_CASE("evaluate example A") {
    const Run r = run({"evaluate", "--params", write("a.json", kExampleA)});
    CHECK(r.code == 0);
    CHECK(r.out.find("optimal = defend-under-attack") != std::string::npos);
    CHECK(r.out.find("best_lambda = 0.46428571428571") != std::string::npos);
    const Json j = Json::parse(run({"evaluate", "--params", write("a.json", kExampleA), "--json"}).out);
    CHECK(j["triple"]["best_lambda"].get<double>() == doctest::Approx(0.464286).epsilon(1e-6));
}

TEST_CASE("evaluate at the meeting point reports the tie") {
    const Run r = run({"evaluate", "--params", write("meet.json", meeting_point())});
    CHECK(r.out.find("optimal = tie {W,D,R}") != std::string::npos);
    CHECK(r.out.find("recommended = wait-under-attack") != std::string::npos);
}

TEST_CASE("evaluate with an unreliable reset") {
    const Run r = run({"evaluate", "--params",
                       write("weak.json", R"({"p_A":0.5,"p_F":0.5,"p_D":0.2,"p_R":0.2,"c_A":1,"c_D":0.5,"c_F":10,"c_R":2})")});
    CHECK(r.out.find("sufficiency_basic = insufficient") != std::string::npos);
    CHECK(r.out.find("optimal = reset-under-attack") != std::string::npos);
}

TEST_CASE("partition CSV") {
    const std::string out = (scratch() / "part.csv").string();
    const Run r = run({"partition", "--params", write("a.json", kExampleA), "--plane", "cA-cD", "--grid", "101",
                       "--out", out});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(out);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10202);
    CHECK(csv.rfind("x,y,region,lambda_W,lambda_D,lambda_R,margin\n", 0) == 0);
    CHECK(csv.find("\n0.5,0.25,D,") != std::string::npos);
    CHECK(fs::exists(out + ".manifest.json"));
}

TEST_CASE("partition plane mismatch and bad arguments") {
    const std::string p = write("pr.json", R"({"p_A":0.5,"p_F":0.5,"p_D":0.6,"p_R":0.9,"c_A":1,"c_D":0.5,"c_F":10,"c_R":2})");
    CHECK(run({"partition", "--params", p, "--plane", "cA-cD"}).code == 1);
    CHECK(run({"partition", "--params", p, "--plane", "diagonal"}).code == 2);
    CHECK(run({"partition", "--params", p, "--plane", "3d", "--grid", "1"}).code == 2);
}

TEST_CASE("free attack with a refined-insufficient reset labels every valid cell R") {
    const std::string p =
        write("free.json", R"({"p_A":0.5,"p_F":0.5,"p_D":0.6,"p_R":0.25,"c_A":0,"c_D":0.5,"c_F":10,"c_R":2})");
    const Run r = run({"partition", "--params", p, "--plane", "cR-cD", "--grid", "41"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    std::size_t valid = 0;
    while (std::getline(in, line)) {
        const auto a = line.find(','), b = line.find(',', a + 1), c = line.find(',', b + 1);
        const std::string region = line.substr(b + 1, c - b - 1);
        if (region == "invalid") continue;
        ++valid;
        CHECK(region == "R");
    }
    CHECK(valid > 500);
}

TEST_CASE("sufficiency report") {
    const Run r = run({"sufficiency", "--params",
                       write("s.json", R"({"p_A":0.1,"p_F":0.9,"p_D":0.5,"p_R":0.6,"c_A":0,"c_D":0.5,"c_F":10,"c_R":2})"),
                       "--json"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["basic"]["class"] == "weak");
}

TEST_CASE("solve agrees with evaluate") {
    const std::string a = write("a.json", kExampleA);
    const Json j = Json::parse(run({"solve", "--params", a, "--json"}).out);
    CHECK(j["policy_labels"] == Json::array({"W", "D", "R"}));
    const Json e = Json::parse(run({"solve", "--params", a, "--json", "--enumerate"}).out);
    CHECK(e["enumeration"].size() == 27);
}

TEST_CASE("built model JSON re-ingests to the same analysis") {
    const std::string a = write("a.json", kExampleA);
    const std::string model = (scratch() / "model.json").string();
    REQUIRE(run({"build", "--params", a, "--out", model}).code == 0);
    const Json direct = Json::parse(run({"solve", "--params", a, "--json"}).out);
    const Json via = Json::parse(run({"solve", "--params", model, "--json"}).out);
    CHECK(direct["lambda"] == via["lambda"]);
    CHECK(direct["policy"] == via["policy"]);
    CHECK(run({"validate", "--params", model}).code == 0);
}

TEST_CASE("simulate is reproducible and close to the exact value") {
    const std::string a = write("a.json", kExampleA);
    const std::string o1 = (scratch() / "sim1.json").string(), o2 = (scratch() / "sim2.json").string();
    const std::vector<std::string> base{"simulate", "--params", a, "--policy", "W", "--seed", "1",
                                        "--stages", "100000", "--trajectories", "16"};
    auto args1 = base, args2 = base;
    args1.insert(args1.end(), {"--out", o1});
    args2.insert(args2.end(), {"--out", o2});
    REQUIRE(run(args1).code == 0);
    REQUIRE(run(args2).code == 0);
    CHECK(slurp(o1) == slurp(o2));
    const Json j = Json::parse(slurp(o1));
    const double mean = j["result"]["mean_cost_per_stage"].get<double>();
    const double se = j["result"]["std_error"].get<double>();
    CHECK(std::abs(mean - 0.8) <= 3.0 * se);
    CHECK(Json::parse(slurp(o1 + ".manifest.json")).contains("wall_clock_seconds"));
}

TEST_CASE("simulate first passage and policy errors") {
    const std::string a = write("a.json", kExampleA);
    const Run r = run({"simulate", "--params", a, "--policy", "R", "--stages", "100", "--first-passage", "N,F"});
    REQUIRE(r.code == 0);
    CHECK(Json::parse(r.out)["result"]["first_passage"]["count"] == 0);
    CHECK(run({"simulate", "--params", a, "--policy", "WQR"}).code == 2);
    CHECK(run({"simulate", "--params", a, "--stages", "10", "--burn-in", "10"}).code == 1);
}

TEST_CASE("belief simulation with a trace") {
    const std::string p = write(
        "bp.json",
        R"({"p_A":0.5,"p_F":0.5,"p_D":0.6,"p_R":1,"c_A":1,"c_D":0.5,"c_F":10,"c_R":2,"detector":{"q_A_given_N":0.2,"q_N_given_A":0.3}})");
    const std::string trace = (scratch() / "trace.csv").string();
    const Run r = run({"belief-sim", "--params", p, "--stages", "50", "--trace", trace, "--seed", "4"});
    REQUIRE(r.code == 0);
    const std::string csv = slurp(trace);
    CHECK(csv.rfind("stage,b_N,b_A,b_F,action,observation\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 52);
    CHECK(run({"belief-sim", "--params", write("a.json", kExampleA)}).code == 2);
}

TEST_CASE("uniformize CSV and JSON") {
    const std::string m = write("smdp.json", R"({"n_states":2,"n_actions":1,"state_labels":["a","b"],
        "action_labels":["go"],"transition":[[[0,1],[1,0]]],"cost":[[[1,1],[1,1]]],
        "durations":[[[1,1],[2,2]]]})");
    const Run zero = run({"uniformize", "--params", m, "--tau", "0"});
    REQUIRE(zero.code == 0);
    CHECK(zero.out == "from,a,b\na,1,0\nb,0,1\n");
    const Run bar = run({"uniformize", "--params", m});
    CHECK(bar.out == "from,a,b\na,0,1\nb,0.5,0.5\n");
    const Json j = Json::parse(run({"uniformize", "--params", m, "--json", "--tau", "1"}).out);
    CHECK(j["uniformized"]["d_bar"] == 1.0);
    CHECK(j.contains("transition_over_time"));
    CHECK(run({"uniformize", "--params", m, "--tau", "-1"}).code == 1);
}
