#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>

#include "pbrs/envs/eight_rooms.hpp"
#include "pbrs/io.hpp"
#include "pbrs/value_iteration.hpp"

using namespace pbrs;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int status = -1;
    std::string out;
};

Outcome lab(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + "'" + std::string(PBRS_LAB_PATH) + "' " + args + " 2>/dev/null";
    Outcome o;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return o;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) o.out.append(buf.data(), n);
    const int raw = pclose(p);
    o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return o;
}

// Fresh scratch directory per test.
std::string scratch(const std::string& name) {
    const auto dir = fs::path(::testing::TempDir()) / ("pbrs_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string write(const std::string& dir, const std::string& name, const std::string& text) {
    const auto path = (fs::path(dir) / name).string();
    io::write_text(path, text);
    return path;
}

// Start -> middle -> goal chain with a "stay" action.
TabularMdp chain() {
    MdpBuilder b(3, 2, 0.9);
    b.add(0, 0, 1, 1.0, 0.0).add(0, 1, 0, 1.0, 0.0).add(1, 0, 2, 1.0, 1.0).add(1, 1, 0, 1.0, 0.0);
    b.terminal(2).goals({2}).goal_oriented(true).start(0).reward_bound(1.0);
    return b.build();
}

}  // namespace

TEST(Cli, UsageErrorsExitWithTwo) {
    EXPECT_EQ(lab("no-such-command").status, 2);
    EXPECT_EQ(lab("").status, 2);
    EXPECT_EQ(lab("count-states --env mars").status, 2);
    EXPECT_EQ(lab("count-states --bogus-flag").status, 2);
    EXPECT_EQ(lab("run-gridworld --algos vanilla,sarsa").status, 2);
    EXPECT_EQ(lab("--help").status, 0);
}

TEST(Cli, MalformedConfigExitsWithThree) {
    const auto dir = scratch("malformed");
    EXPECT_EQ(lab("run-gridworld --config " + write(dir, "a.json", "{ not json") + " --out " + dir).status, 3);
    EXPECT_EQ(lab("run-gridworld --config " + write(dir, "b.json", R"({"seeds": [1, 1]})") + " --out " + dir).status, 3);
    EXPECT_EQ(lab("run-gridworld --config " + write(dir, "c.json", R"({"seedz": [1]})") + " --out " + dir).status, 3);
    EXPECT_EQ(lab("run-gridworld --config " + write(dir, "d.json", R"({"seeds": []})") + " --out " + dir).status, 3);
    EXPECT_EQ(lab("run-gridworld --config " + write(dir, "e.json", R"({"seeds": [0], "run": {"horizon": "long"}})") +
                  " --out " + dir)
                  .status,
              3);
    const auto mdp = write(dir, "m.json", R"({"num_states": 2})");
    const auto phi = write(dir, "p.json", io::potential_to_json(Potential::zero(2), 0.9).dump());
    EXPECT_EQ(lab("verify-ordering --mdp " + mdp + " --potential " + phi + " --horizon 2 --out " + dir).status, 3);
}

TEST(Cli, MissingFilesExitWithFour) {
    const auto dir = scratch("missing");
    EXPECT_EQ(lab("run-gridworld --config " + dir + "/absent.json --out " + dir).status, 4);
    const auto phi = write(dir, "p.json", io::potential_to_json(Potential::zero(3), 0.9).dump());
    EXPECT_EQ(lab("verify-ordering --mdp " + dir + "/absent.json --potential " + phi + " --horizon 2").status, 4);
    EXPECT_EQ(lab("run-gridworld --seeds 1 --interactions 100 --potential " + dir + "/absent.json --out " + dir).status, 4);
}

TEST(Cli, CountStatesQbert) {
    const auto dir = scratch("count");
    const auto o = lab("count-states --env qbert --out " + dir);
    EXPECT_EQ(o.status, 0);
    EXPECT_NE(o.out.find("1172830"), std::string::npos) << o.out;
    const auto doc = io::read_json(dir + "/state_counts.json");
    EXPECT_EQ(doc.at("counts").at("qbert").at("reachable").get<std::uint64_t>(), 1'172'830u);
    EXPECT_TRUE(doc.at("_header").contains("config_hash"));
}

TEST(Cli, SolveAbstractionIsByteReproducible) {
    const auto a = scratch("solve_a"), b = scratch("solve_b");
    const std::string args = "solve-abstraction --env eight-rooms --gamma 0.9 --eps 1e-7 --out ";
    ASSERT_EQ(lab(args + a).status, 0);
    ASSERT_EQ(lab(args + b).status, 0);
    const auto text = io::read_file(a + "/potential_eight-rooms.json");
    EXPECT_EQ(text, io::read_file(b + "/potential_eight-rooms.json"));

    // The file holds the VI solution of the room abstraction.
    const auto phi = io::potential_from_json(io::json::parse(text));
    const auto ref = value_iteration(build_eight_rooms_abstraction(eight_rooms_world(), 0.9).first, 1e-7, {}).values;
    ASSERT_EQ(phi.size(), ref.size());
    for (StateId s = 0; s < ref.size(); ++s) EXPECT_NEAR(phi[s], ref[s], 1e-14);
    EXPECT_EQ(io::json::parse(text).at("gamma").get<double>(), 0.9);
}

TEST(Cli, OutputDirectoryFlagOverridesEnvironment) {
    const auto env_dir = scratch("env_dir"), flag_dir = scratch("flag_dir");
    ASSERT_EQ(lab("solve-abstraction --env eight-rooms", "PBRS_OUT_DIR='" + env_dir + "' ").status, 0);
    EXPECT_TRUE(fs::exists(env_dir + "/potential_eight-rooms.json"));
    ASSERT_EQ(lab("solve-abstraction --env eight-rooms --out " + flag_dir, "PBRS_OUT_DIR='" + env_dir + "/x' ").status, 0);
    EXPECT_TRUE(fs::exists(flag_dir + "/potential_eight-rooms.json"));
    EXPECT_FALSE(fs::exists(env_dir + "/x"));
}

TEST(Cli, RunGridworldWritesCurveFiles) {
    const auto dir = scratch("grid");
    const std::string args = "run-gridworld --algos vanilla,apbrs,opa --seeds 2 --interactions 10000 --jobs 2 --out ";
    ASSERT_EQ(lab(args + dir).status, 0);
    for (const std::string algo : {"vanilla", "apbrs", "opa"}) {
        const auto per_seed = io::read_file(dir + "/curves_" + algo + ".csv");
        const auto agg = io::read_file(dir + "/aggregate_" + algo + ".csv");
        EXPECT_EQ(per_seed.rfind("# config_hash=", 0), 0u);
        EXPECT_NE(per_seed.find(" seeds=0,1\ninteractions,seed,metric\n0,0,70\n"), std::string::npos) << per_seed;
        EXPECT_NE(agg.find("\ninteractions,mean,std\n0,70,0\n"), std::string::npos) << agg;
        EXPECT_NE(agg.find("\n10000,"), std::string::npos);
    }
    // Same config, same bytes.
    const auto again = scratch("grid_again");
    ASSERT_EQ(lab(args + again).status, 0);
    EXPECT_EQ(io::read_file(dir + "/curves_apbrs.csv"), io::read_file(again + "/curves_apbrs.csv"));
    EXPECT_EQ(io::read_file(dir + "/gridworld_summary.json"), io::read_file(again + "/gridworld_summary.json"));
}

TEST(Cli, RunGridworldFromConfigAndPotentialFile) {
    const auto dir = scratch("grid_cfg");
    ASSERT_EQ(lab("solve-abstraction --env eight-rooms --out " + dir).status, 0);
    const auto cfg = write(dir, "cfg.json",
                           R"({"algos": ["opa"], "seeds": [3, 7], "potential": ")" + dir +
                               R"(/potential_eight-rooms.json", "run": {"total_interactions": 5000, "eval_every": 2500}})");
    ASSERT_EQ(lab("run-gridworld --config " + cfg + " --out " + dir).status, 0);
    const auto csv = io::read_file(dir + "/curves_opa.csv");
    EXPECT_NE(csv.find(" seeds=3,7\n"), std::string::npos);
    EXPECT_NE(csv.find("\n2500,7,"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir + "/curves_vanilla.csv"));
}

TEST(Cli, VerifyOrderingReportsInversions) {
    const auto dir = scratch("ordering");
    const auto mdp = write(dir, "chain.json", io::mdp_to_json(chain()).dump());
    const auto good = write(dir, "good.json", io::potential_to_json(Potential({0.2, 0.5, 1.0}, 1.0), 0.9).dump());
    const auto bad = write(dir, "bad.json", io::potential_to_json(Potential({5.0, 0.0, 0.0}, 5.0), 0.9).dump());

    ASSERT_EQ(lab("verify-ordering --mdp " + mdp + " --potential " + good + " --horizon 3 --scope goal-reaching --out " + dir).status, 0);
    auto rep = io::read_json(dir + "/ordering_report.json");
    EXPECT_EQ(rep.at("policy_count").get<int>(), 4);
    EXPECT_TRUE(rep.at("preserved").get<bool>());

    EXPECT_EQ(lab("verify-ordering --mdp " + mdp + " --potential " + bad + " --horizon 3 --scope all --out " + dir).status, 1);
    rep = io::read_json(dir + "/ordering_report.json");
    EXPECT_FALSE(rep.at("preserved").get<bool>());
    EXPECT_EQ(rep.at("inversion_count").get<int>(), 2);
    EXPECT_EQ(rep.at("inversions").at(0).at("policy_a").get<int>(), 0);

    const auto small = write(dir, "small.json", io::potential_to_json(Potential::zero(2), 0.9).dump());
    EXPECT_EQ(lab("verify-ordering --mdp " + mdp + " --potential " + small + " --horizon 3 --out " + dir).status, 3);
}

TEST(Cli, PropertySubcommandsPassOnSmallRuns) {
    const auto dir = scratch("props");
    const auto pg = lab("pg-check --fixtures 4 --reps 2 --out " + dir);
    EXPECT_EQ(pg.status, 0) << pg.out;
    EXPECT_NE(pg.out.find("seed,prop2_deviation,stationary_deviation,finite_difference_error\n"), std::string::npos);
    EXPECT_NE(pg.out.find("rep,raw_trace,baseline_trace\n"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir + "/pg_deviation.csv"));

    EXPECT_EQ(lab("wiewiora-check --cases 3 --steps 2000 --out " + dir).status, 0);
    EXPECT_NE(io::read_file(dir + "/wiewiora.csv").find("seed,max_deviation,equal\n0,"), std::string::npos);

    EXPECT_EQ(lab("prop1 --cases 5 --out " + dir).status, 0);
    EXPECT_NE(io::read_file(dir + "/prop1.csv").find("\n4,"), std::string::npos);
}
