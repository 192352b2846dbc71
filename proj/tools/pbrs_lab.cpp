// pbrs_lab: file-driven experiment runner.
//
// Exit status: 0 success, 1 a checked property was violated, 2 usage error
// (unknown subcommand or bad flag), 3 malformed config or input document,
// 4 missing or unreadable file.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pbrs/envs/eight_rooms.hpp"
#include "pbrs/envs/freeway.hpp"
#include "pbrs/envs/qbert.hpp"
#include "pbrs/envs/venture.hpp"
#include "pbrs/experiments.hpp"
#include "pbrs/io.hpp"
#include "pbrs/ordering.hpp"
#include "pbrs/reachability.hpp"

namespace {

using namespace pbrs;
using io::json;
namespace ex = pbrs::experiments;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;
constexpr int kMalformed = 3;
constexpr int kMissingFile = 4;

struct Common {
    std::string out_dir;
    std::size_t jobs = 1;
};

std::string output_path(const Common& c, const std::string& name) {
    std::filesystem::create_directories(c.out_dir);
    return (std::filesystem::path(c.out_dir) / name).string();
}

void write_json(const Common& c, const std::string& name, const json& j) {
    io::write_text(output_path(c, name), j.dump(2) + "\n");
}

// ---------------------------------------------------------------- count-states

const std::vector<std::string> kEnvNames = {"freeway", "venture", "qbert", "eight-rooms"};

std::uint64_t expected_count(const std::string& env) {
    if (env == "freeway") return 177;
    if (env == "venture") return 106'929;
    if (env == "qbert") return 1'172'830;
    return 141;  // 8-rooms cells reachable before absorption
}

std::uint64_t count_env(const std::string& env) {
    if (env == "freeway") return count_reachable_states(FreewayModel{});
    if (env == "venture") return count_reachable_states(venture::Model{});
    if (env == "qbert") return count_reachable_states(qbert::Model{});
    return count_reachable_states(build_eight_rooms_env(), eight_rooms_world().start());
}

int count_states(const Common& c, const std::string& env) {
    const std::vector<std::string> envs = env == "all" ? kEnvNames : std::vector<std::string>{env};
    std::vector<std::uint64_t> counts(envs.size());
    ex::parallel_for(envs.size(), c.jobs, [&](std::size_t i) { counts[i] = count_env(envs[i]); });

    const auto header = io::ArtifactHeader::of(json{{"subcommand", "count-states"}, {"env", env}}, {});
    json doc{{"_header", header.to_json()}, {"counts", json::object()}};
    bool ok = true;
    std::ostringstream line;
    for (std::size_t i = 0; i < envs.size(); ++i) {
        const bool match = counts[i] == expected_count(envs[i]);
        ok = ok && match;
        doc["counts"][envs[i]] = {{"reachable", counts[i]}, {"expected", expected_count(envs[i])}, {"match", match}};
        line << (i ? " " : "") << envs[i] << "=" << counts[i];
        if (!match) line << "(expected " << expected_count(envs[i]) << ")";
    }
    write_json(c, "state_counts.json", doc);
    std::cout << line.str() << (ok ? " ok" : " MISMATCH") << "\n";
    return ok ? kOk : kViolation;
}

// ---------------------------------------------------------------- solve-abstraction

double default_abstraction_gamma(const std::string& env) {
    if (env == "eight-rooms") return ex::kEightRoomsAbstractionGamma;
    if (env == "qbert") return 0.99;
    return 0.98;
}

TabularMdp abstraction_mdp(const std::string& env, double gamma) {
    if (env == "eight-rooms") return build_eight_rooms_abstraction(eight_rooms_world(), gamma).first;
    if (env == "freeway") return build_freeway_abstraction(gamma).mdp();
    if (env == "qbert") return build_qbert_abstraction(gamma).mdp();
    return build_venture_abstraction(gamma).mdp();
}

int solve_abstraction(const Common& c, const std::string& env, std::optional<double> gamma_flag, double eps,
                      bool export_mdp) {
    const double gamma = gamma_flag.value_or(default_abstraction_gamma(env));
    if (!(eps > 0.0)) throw UsageError("--eps must be positive");
    const auto mdp = abstraction_mdp(env, gamma);
    const auto vi = value_iteration(mdp, eps, {});
    const Potential phi = Potential::from_values(vi.values);
    const json config{{"subcommand", "solve-abstraction"}, {"env", env}, {"gamma", gamma}, {"eps", eps}};
    const auto header = io::ArtifactHeader::of(config, {});
    const std::string file = "potential_" + env + ".json";
    io::write_text(output_path(c, file), io::potential_to_json(phi, gamma, &header).dump(2) + "\n");
    if (export_mdp) {
        json doc = io::mdp_to_json(mdp);
        doc["_header"] = header.to_json();
        write_json(c, "abstraction_" + env + ".json", doc);
    }
    std::cout << env << ": " << mdp.num_states() << " abstract states, " << vi.iterations << " sweeps, residual "
              << vi.final_residual << ", max phi " << phi.bound_phi() << " -> " << output_path(c, file) << "\n";
    return kOk;
}

// ---------------------------------------------------------------- run-gridworld

struct GridworldConfig {
    std::vector<ex::Algo> algos{ex::Algo::Vanilla, ex::Algo::Apbrs, ex::Algo::Opa};
    std::vector<std::uint64_t> seeds;
    std::string potential = "solve";
    double abstraction_gamma = ex::kEightRoomsAbstractionGamma;
    double vi_eps = ex::kAbstractionViEps;
    double phi_max = 1.0;
    RunConfig run;
    std::map<ex::Algo, double> lr_start{{ex::Algo::Vanilla, 0.85}, {ex::Algo::Apbrs, 0.7}, {ex::Algo::Opa, 1.0}};

    json canonical() const {
        json algos_j = json::array(), lr = json::object();
        for (auto a : algos) algos_j.push_back(ex::algo_name(a));
        for (auto [a, v] : lr_start) lr[ex::algo_name(a)] = v;
        return {{"subcommand", "run-gridworld"},
                {"algos", algos_j},
                {"seeds", seeds},
                {"potential", potential},
                {"abstraction_gamma", abstraction_gamma},
                {"vi_eps", vi_eps},
                {"phi_max", phi_max},
                {"run",
                 {{"total_interactions", run.total_interactions},
                  {"horizon", run.horizon},
                  {"gamma", run.gamma},
                  {"lr_start", lr},
                  {"lr_end", run.lr.end},
                  {"lr_steps", run.lr.steps},
                  {"epsilon_start", run.epsilon.start},
                  {"epsilon_end", run.epsilon.end},
                  {"epsilon_steps", run.epsilon.steps},
                  {"eval_every", run.eval_every},
                  {"eval_episodes", run.eval_episodes}}}};
    }
};

std::vector<ex::Algo> parse_algo_list(const std::vector<std::string>& names) {
    std::vector<ex::Algo> out;
    for (const auto& n : names) {
        const auto a = ex::parse_algo(n);
        if (!a) throw UsageError("unknown algorithm '" + n + "' (expected vanilla, apbrs or opa)");
        if (std::find(out.begin(), out.end(), *a) != out.end()) throw UsageError("algorithm listed twice: " + n);
        out.push_back(*a);
    }
    if (out.empty()) throw UsageError("no algorithm selected");
    return out;
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw io::FormatError(where + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw io::FormatError("unknown key '" + k + "' in " + where);
}

void apply_config_file(GridworldConfig& g, const json& j) {
    try {
        reject_unknown_keys(j, {"algos", "seeds", "potential", "abstraction_gamma", "vi_eps", "phi_max", "run"}, "config");
        if (j.contains("algos")) g.algos = parse_algo_list(j.at("algos").get<std::vector<std::string>>());
        if (j.contains("seeds")) g.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        g.potential = j.value("potential", g.potential);
        g.abstraction_gamma = j.value("abstraction_gamma", g.abstraction_gamma);
        g.vi_eps = j.value("vi_eps", g.vi_eps);
        g.phi_max = j.value("phi_max", g.phi_max);
        if (!j.contains("run")) return;
        const auto& r = j.at("run");
        reject_unknown_keys(r,
                            {"total_interactions", "horizon", "gamma", "lr_start", "lr_end", "lr_steps", "epsilon_start",
                             "epsilon_end", "epsilon_steps", "eval_every", "eval_episodes"},
                            "run");
        auto& rc = g.run;
        rc.total_interactions = r.value("total_interactions", rc.total_interactions);
        rc.horizon = r.value("horizon", rc.horizon);
        rc.gamma = r.value("gamma", rc.gamma);
        rc.lr.end = r.value("lr_end", rc.lr.end);
        rc.lr.steps = r.value("lr_steps", rc.lr.steps);
        rc.epsilon.start = r.value("epsilon_start", rc.epsilon.start);
        rc.epsilon.end = r.value("epsilon_end", rc.epsilon.end);
        rc.epsilon.steps = r.value("epsilon_steps", rc.epsilon.steps);
        rc.eval_every = r.value("eval_every", rc.eval_every);
        rc.eval_episodes = r.value("eval_episodes", rc.eval_episodes);
        if (r.contains("lr_start")) {
            const auto& lr = r.at("lr_start");
            reject_unknown_keys(lr, {"vanilla", "apbrs", "opa"}, "run.lr_start");
            for (const auto& [k, v] : lr.items()) g.lr_start[*ex::parse_algo(k)] = v.get<double>();
        }
    } catch (const json::exception& e) {
        throw io::FormatError(std::string("malformed config: ") + e.what());
    } catch (const UsageError& e) {
        throw io::FormatError(std::string("malformed config: ") + e.what());
    }
}

void validate(const GridworldConfig& g) {
    if (g.seeds.empty()) throw io::FormatError("seed list is empty");
    if (std::set<std::uint64_t>(g.seeds.begin(), g.seeds.end()).size() != g.seeds.size())
        throw io::FormatError("seeds must be distinct");
    if (!(g.phi_max >= 0.0)) throw io::FormatError("phi_max must be >= 0");
    try {
        g.run.validate();
    } catch (const UsageError& e) {
        throw io::FormatError(std::string("malformed config: ") + e.what());
    }
}

int run_gridworld(const Common& c, GridworldConfig g) {
    validate(g);
    const auto world = eight_rooms_world();
    const auto env = build_gridworld_env(world, 0.04, g.run.gamma);
    const auto [abs, alpha] = build_eight_rooms_abstraction(world, g.abstraction_gamma);
    Potential abs_phi;
    if (g.potential == "solve") {
        abs_phi = abstract_potential(abs, g.vi_eps);
    } else {
        abs_phi = io::potential_from_json(io::read_json(g.potential));
        if (abs_phi.size() != abs.num_states())
            throw io::FormatError("potential file has " + std::to_string(abs_phi.size()) + " values, expected " +
                                  std::to_string(abs.num_states()));
    }
    const Potential phi = ex::lift_potential(abs_phi, alpha).rescaled_to(g.phi_max);

    struct Job {
        ex::Algo algo;
        std::size_t seed_index;
    };
    std::vector<Job> jobs;
    for (auto a : g.algos)
        for (std::size_t i = 0; i < g.seeds.size(); ++i) jobs.push_back({a, i});
    std::vector<LearningCurve> curves(jobs.size());
    ex::parallel_for(jobs.size(), c.jobs, [&](std::size_t k) {
        RunConfig rc = g.run;
        rc.seed = g.seeds[jobs[k].seed_index];
        rc.lr.start = g.lr_start.at(jobs[k].algo);
        curves[k] = ex::run_algo(env, phi, jobs[k].algo, rc);
    });

    const auto header = io::ArtifactHeader::of(g.canonical(), g.seeds);
    json summary{{"_header", header.to_json()}, {"algorithms", json::object()}};
    std::ostringstream line;
    line << "run-gridworld: " << g.seeds.size() << " seeds;";
    for (std::size_t ai = 0; ai < g.algos.size(); ++ai) {
        const std::vector<LearningCurve> mine(curves.begin() + ai * g.seeds.size(),
                                              curves.begin() + (ai + 1) * g.seeds.size());
        const auto name = ex::algo_name(g.algos[ai]);
        io::write_text(output_path(c, "curves_" + name + ".csv"), io::curves_csv(mine, header));
        io::write_text(output_path(c, "aggregate_" + name + ".csv"), io::aggregate_csv(mine, header));
        const auto agg = io::aggregate(mine);
        summary["algorithms"][name] = {{"final_interactions", agg.back().interactions},
                                       {"final_mean_episode_length", agg.back().mean},
                                       {"area_under_mean_curve", ex::mean_curve_area(mine)}};
        line << " " << name << " final mean length " << io::format_double(agg.back().mean) << ";";
    }
    write_json(c, "gridworld_summary.json", summary);
    std::cout << line.str() << " artifacts in " << c.out_dir << "\n";
    return kOk;
}

// ---------------------------------------------------------------- verify-ordering

int verify_ordering_cmd(const Common& c, const std::string& mdp_file, const std::string& phi_file, std::size_t H,
                        const std::string& scope_name, std::uint64_t cap) {
    const auto mdp = io::mdp_from_json(io::read_json(mdp_file));
    const auto phi = io::potential_from_json(io::read_json(phi_file));
    if (phi.size() != mdp.num_states())
        throw io::FormatError("potential has " + std::to_string(phi.size()) + " values, MDP has " +
                              std::to_string(mdp.num_states()) + " states");
    const OrderingScope scope = scope_name == "all"    ? OrderingScope::All
                                : scope_name == "pi-h" ? OrderingScope::PiH
                                                       : OrderingScope::GoalReaching;
    const auto rep = verify_ordering(mdp, phi, H, scope, cap);
    const json config{{"subcommand", "verify-ordering"}, {"mdp", io::fnv1a(io::read_file(mdp_file))},
                      {"potential", io::fnv1a(io::read_file(phi_file))}, {"horizon", H}, {"scope", scope_name}};
    json inv = json::array();
    for (const auto& x : rep.inversions)
        inv.push_back({{"policy_a", x.policy_a}, {"policy_b", x.policy_b}, {"J_a", x.J_a}, {"J_b", x.J_b},
                       {"J_reshaped_a", x.J_reshaped_a}, {"J_reshaped_b", x.J_reshaped_b}});
    write_json(c, "ordering_report.json",
               {{"_header", io::ArtifactHeader::of(config, {}).to_json()},
                {"horizon", H},
                {"scope", scope_name},
                {"policy_count", rep.policy_count},
                {"pairs_checked", rep.pairs_checked},
                {"inversion_count", rep.inversion_count},
                {"preserved", rep.preserved},
                {"inversions", inv}});
    std::cout << "verify-ordering: " << rep.policy_count << " policies, " << rep.pairs_checked << " pairs, "
              << rep.inversion_count << " inversions (" << (rep.preserved ? "preserved" : "NOT preserved") << ")\n";
    return rep.preserved ? kOk : kViolation;
}

// ---------------------------------------------------------------- pg-check

int pg_check(const Common& c, std::size_t fixtures, std::size_t reps) {
    std::vector<ex::PgRow> rows(fixtures);
    std::vector<ex::VarianceRow> var(reps);
    ex::parallel_for(fixtures + reps, c.jobs, [&](std::size_t i) {
        if (i < fixtures)
            rows[i] = ex::pg_row(i);
        else
            var[i - fixtures] = ex::variance_row(i - fixtures);
    });
    std::vector<std::uint64_t> seeds(fixtures);
    for (std::size_t i = 0; i < fixtures; ++i) seeds[i] = i;
    const auto header = io::ArtifactHeader::of(
        json{{"subcommand", "pg-check"}, {"fixtures", fixtures}, {"variance_reps", reps},
             {"variance_horizon", ex::kVarianceHorizon}, {"variance_samples", ex::kVarianceSamples}},
        seeds);

    std::ostringstream dev, vt;
    dev << header.comment_line() << "\nseed,prop2_deviation,stationary_deviation,finite_difference_error\n";
    std::size_t prop2_ok = 0, stationary_biased = 0, fd_ok = 0, lower = 0;
    for (std::size_t i = 0; i < fixtures; ++i) {
        dev << i << "," << io::format_double(rows[i].prop2) << "," << io::format_double(rows[i].stationary) << ","
            << io::format_double(rows[i].finite_difference) << "\n";
        prop2_ok += rows[i].prop2 <= 1e-10;
        stationary_biased += rows[i].stationary > 1e-6;
        fd_ok += rows[i].finite_difference <= 1e-5;
    }
    vt << header.comment_line() << "\nrep,raw_trace,baseline_trace\n";
    for (std::size_t r = 0; r < reps; ++r) {
        vt << r << "," << io::format_double(var[r].raw_trace) << "," << io::format_double(var[r].baseline_trace) << "\n";
        lower += var[r].baseline_trace < var[r].raw_trace;
    }
    io::write_text(output_path(c, "pg_deviation.csv"), dev.str());
    io::write_text(output_path(c, "pg_variance.csv"), vt.str());
    std::cout << dev.str() << vt.str();
    const bool ok = prop2_ok == fixtures && fd_ok == fixtures && lower == reps && 10 * stationary_biased >= 9 * fixtures;
    std::cout << "pg-check: prop2 " << prop2_ok << "/" << fixtures << " within 1e-10, stationary control biased "
              << stationary_biased << "/" << fixtures << ", finite differences " << fd_ok << "/" << fixtures
              << ", baseline variance lower " << lower << "/" << reps << (ok ? " ok" : " VIOLATION") << "\n";
    return ok ? kOk : kViolation;
}

// ---------------------------------------------------------------- wiewiora-check

int wiewiora_check(const Common& c, std::size_t cases, std::size_t steps) {
    std::vector<EquivalenceResult> res(cases);
    ex::parallel_for(cases, c.jobs, [&](std::size_t i) { res[i] = ex::wiewiora_case(i, steps); });
    std::vector<std::uint64_t> seeds(cases);
    for (std::size_t i = 0; i < cases; ++i) seeds[i] = i;
    const auto header =
        io::ArtifactHeader::of(json{{"subcommand", "wiewiora-check"}, {"cases", cases}, {"steps", steps}}, seeds);
    std::ostringstream os;
    os << header.comment_line() << "\nseed,max_deviation,equal\n";
    std::size_t equal = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
        os << i << "," << io::format_double(res[i].max_deviation) << "," << (res[i].equal ? 1 : 0) << "\n";
        equal += res[i].equal;
        worst = std::max(worst, res[i].max_deviation);
    }
    io::write_text(output_path(c, "wiewiora.csv"), os.str());
    std::cout << "wiewiora-check: " << equal << "/" << cases << " streams equivalent within 1e-10, max deviation "
              << worst << (equal == cases ? " ok" : " VIOLATION") << "\n";
    return equal == cases ? kOk : kViolation;
}

// ---------------------------------------------------------------- prop1

int prop1_cmd(const Common& c, std::size_t cases, double eps) {
    if (!(eps > 0.0)) throw UsageError("--eps must be positive");
    std::vector<Prop1Result> res(cases);
    ex::parallel_for(cases, c.jobs, [&](std::size_t i) { res[i] = ex::prop1_case(i, eps); });
    std::vector<std::uint64_t> seeds(cases);
    for (std::size_t i = 0; i < cases; ++i) seeds[i] = i;
    const auto header = io::ArtifactHeader::of(json{{"subcommand", "prop1"}, {"cases", cases}, {"eps", eps}}, seeds);
    std::ostringstream os;
    os << header.comment_line() << "\nseed,dist_src,dist_dst,bound_src,bound_dst,iterations_src,iterations_dst\n";
    std::size_t bound_ok = 0, measured_ok = 0;
    for (std::size_t i = 0; i < cases; ++i) {
        const auto& r = res[i];
        os << i << "," << io::format_double(r.dist_src) << "," << io::format_double(r.dist_dst) << "," << r.bound_src
           << "," << r.bound_dst << "," << r.n_src << "," << r.n_dst << "\n";
        bound_ok += r.hypothesis_holds && r.bound_dst <= r.bound_src;
        measured_ok += r.n_dst <= r.n_src;
    }
    io::write_text(output_path(c, "prop1.csv"), os.str());
    const bool ok = bound_ok == cases && 100 * measured_ok >= 95 * cases;
    std::cout << "prop1: analytic bound no larger on the shaped problem in " << bound_ok << "/" << cases
              << ", measured sweeps no larger in " << measured_ok << "/" << cases << (ok ? " ok" : " VIOLATION") << "\n";
    return ok ? kOk : kViolation;
}

int run(int argc, char** argv) {
    CLI::App app{"Potential-based reward shaping laboratory"};
    app.require_subcommand(1);
    app.fallthrough();

    Common common;
    if (const char* env_out = std::getenv("PBRS_OUT_DIR")) common.out_dir = env_out;
    if (common.out_dir.empty()) common.out_dir = ".";
    app.add_option("--out", common.out_dir, "Output directory (overrides PBRS_OUT_DIR)");
    app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::Range(std::size_t{1}, std::size_t{1024}));

    auto* cs = app.add_subcommand("count-states", "Count reachable abstract states");
    std::string cs_env = "all";
    cs->add_option("--env", cs_env)->check(CLI::IsMember({"all", "freeway", "venture", "qbert", "eight-rooms"}));

    auto* sa = app.add_subcommand("solve-abstraction", "Solve an abstract MDP and write its potential file");
    std::string sa_env;
    std::optional<double> sa_gamma;
    double sa_eps = ex::kAbstractionViEps;
    bool sa_export = false;
    sa->add_option("--env", sa_env)->required()->check(CLI::IsMember({"eight-rooms", "freeway", "qbert", "venture"}));
    sa->add_option("--gamma", sa_gamma, "Discount (default per environment)");
    sa->add_option("--eps", sa_eps, "Value-iteration accuracy");
    sa->add_flag("--export-mdp", sa_export, "Also write the abstract MDP as JSON");

    auto* rg = app.add_subcommand("run-gridworld", "Q-learning variants on the 8-rooms grid");
    std::string rg_config, rg_algos, rg_potential;
    std::size_t rg_seeds = 0, rg_interactions = 0;
    rg->add_option("--config", rg_config, "Experiment config (JSON)");
    rg->add_option("--algos", rg_algos, "Comma-separated subset of vanilla,apbrs,opa");
    rg->add_option("--seeds", rg_seeds, "Use seeds 0..N-1")->check(CLI::PositiveNumber);
    rg->add_option("--interactions", rg_interactions, "Training interactions per run")->check(CLI::PositiveNumber);
    rg->add_option("--potential", rg_potential, "Abstract potential file (default: solve)");

    auto* vo = app.add_subcommand("verify-ordering", "Check policy ordering under a potential");
    std::string vo_mdp, vo_phi, vo_scope = "pi-h";
    std::size_t vo_h = 0;
    std::uint64_t vo_cap = 10'000'000;
    vo->add_option("--mdp", vo_mdp)->required();
    vo->add_option("--potential", vo_phi)->required();
    vo->add_option("--horizon", vo_h)->required();
    vo->add_option("--scope", vo_scope)->check(CLI::IsMember({"all", "pi-h", "goal-reaching"}));
    vo->add_option("--cap", vo_cap, "Deterministic-policy enumeration cap");

    auto* pg = app.add_subcommand("pg-check", "Exact gradient, shaping-as-baseline and variance tables");
    std::size_t pg_fixtures = 50, pg_reps = 10;
    pg->add_option("--fixtures", pg_fixtures)->check(CLI::PositiveNumber);
    pg->add_option("--reps", pg_reps)->check(CLI::PositiveNumber);

    auto* ww = app.add_subcommand("wiewiora-check", "Shaped learner vs. potential-initialised learner");
    std::size_t ww_cases = 50, ww_steps = 10'000;
    ww->add_option("--cases", ww_cases)->check(CLI::PositiveNumber);
    ww->add_option("--steps", ww_steps)->check(CLI::PositiveNumber);

    auto* p1 = app.add_subcommand("prop1", "Value-iteration sweeps with a near-optimal potential");
    std::size_t p1_cases = 100;
    double p1_eps = 1e-6;
    p1->add_option("--cases", p1_cases)->check(CLI::PositiveNumber);
    p1->add_option("--eps", p1_eps);

    if (argc > 1 && argv[1][0] != '-') {
        const auto subs = app.get_subcommands([](const CLI::App*) { return true; });
        const bool known = std::any_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == argv[1]; });
        if (!known) {
            std::cerr << "unknown subcommand '" << argv[1] << "'\n" << app.help();
            return kUsage;
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (*cs) return count_states(common, cs_env);
    if (*sa) return solve_abstraction(common, sa_env, sa_gamma, sa_eps, sa_export);
    if (*rg) {
        GridworldConfig g;
        if (!rg_config.empty()) apply_config_file(g, io::read_json(rg_config));
        if (!rg_algos.empty()) {
            std::vector<std::string> names;
            std::stringstream ss(rg_algos);
            for (std::string item; std::getline(ss, item, ',');) names.push_back(item);
            try {
                g.algos = parse_algo_list(names);
            } catch (const UsageError& e) {
                std::cerr << "--algos: " << e.what() << "\n";
                return kUsage;
            }
        }
        if (rg_seeds) {
            g.seeds.clear();
            for (std::size_t i = 0; i < rg_seeds; ++i) g.seeds.push_back(i);
        }
        if (g.seeds.empty() && rg_config.empty())
            for (std::uint64_t i = 0; i < 10; ++i) g.seeds.push_back(i);
        if (rg_interactions) g.run.total_interactions = rg_interactions;
        if (!rg_potential.empty()) g.potential = rg_potential;
        return run_gridworld(common, g);
    }
    if (*vo) return verify_ordering_cmd(common, vo_mdp, vo_phi, vo_h, vo_scope, vo_cap);
    if (*pg) return pg_check(common, pg_fixtures, pg_reps);
    if (*ww) return wiewiora_check(common, ww_cases, ww_steps);
    if (*p1) return prop1_cmd(common, p1_cases, p1_eps);
    return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::ios_base::failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMissingFile;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMissingFile;
    } catch (const io::FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    } catch (const ConstructionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    } catch (const CapacityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kMalformed;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kViolation;
    }
}
