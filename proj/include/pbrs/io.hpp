#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "pbrs/learners.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/shaping.hpp"

namespace pbrs::io {

using json = nlohmann::json;

// Input could not be parsed into the expected structure.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

// Provenance stamped on every artifact: hash of the canonical config and the seeds.
struct ArtifactHeader {
    std::string config_hash;
    std::vector<std::uint64_t> seeds;

    static ArtifactHeader of(const json& config, std::vector<std::uint64_t> seeds) {
        return {hex64(fnv1a(config.dump())), std::move(seeds)};
    }
    json to_json() const { return {{"config_hash", config_hash}, {"seeds", seeds}}; }
    std::string comment_line() const {
        std::ostringstream os;
        os << "# config_hash=" << config_hash << " seeds=";
        for (std::size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
        return os.str();
    }
};

inline json mdp_to_json(const TabularMdp& mdp) {
    json j;
    j["num_states"] = mdp.num_states();
    j["num_actions"] = mdp.num_actions();
    j["gamma"] = mdp.gamma();
    j["rho"] = mdp.rho();
    j["goal_states"] = mdp.goal_states();
    j["terminal_states"] = mdp.terminal_states();
    j["goal_oriented"] = mdp.goal_oriented();
    if (mdp.has_reward_bound()) j["reward_bound"] = mdp.reward_bound();
    json tr = json::array();
    for (StateId s = 0; s < mdp.num_states(); ++s)
        for (ActionId a = 0; a < mdp.num_actions(); ++a)
            for (const auto& t : mdp.outcomes(s, a))
                tr.push_back({{"s", s}, {"a", a}, {"next", t.next}, {"p", t.prob}, {"r", t.reward}});
    j["transitions"] = std::move(tr);
    return j;
}

inline TabularMdp mdp_from_json(const json& j) {
    try {
        const std::size_t S = j.at("num_states").get<std::size_t>();
        const std::size_t A = j.at("num_actions").get<std::size_t>();
        MdpBuilder b(S, A, j.at("gamma").get<double>());
        for (const auto& t : j.at("transitions"))
            b.add(t.at("s").get<StateId>(), t.at("a").get<ActionId>(), t.at("next").get<StateId>(),
                  t.at("p").get<double>(), t.at("r").get<double>());
        b.rho(j.at("rho").get<std::vector<double>>());
        for (StateId s : j.value("terminal_states", std::vector<StateId>{})) b.terminal(s);
        if (j.contains("goal_states") && !j.at("goal_states").empty())
            b.goals(j.at("goal_states").get<std::vector<StateId>>());
        b.goal_oriented(j.value("goal_oriented", false));
        if (j.contains("reward_bound")) b.reward_bound(j.at("reward_bound").get<double>());
        return b.build();
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed MDP document: ") + e.what());
    } catch (const UsageError& e) {
        throw FormatError(std::string("malformed MDP document: ") + e.what());
    } catch (const ConstructionError& e) {
        throw FormatError(std::string("malformed MDP document: ") + e.what());
    }
}

// Rounds to 15 significant digits so the written decimal is short and stable.
inline double round15(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::strtod(buf, nullptr);
}

inline json potential_to_json(const Potential& phi, double gamma, const ArtifactHeader* header = nullptr) {
    json j;
    if (header) j["_header"] = header->to_json();
    j["gamma"] = gamma;
    j["bound_phi"] = round15(phi.bound_phi());
    json vals = json::array();
    for (StateId s = 0; s < phi.size(); ++s) vals.push_back({{"abstract_state", s}, {"value", round15(phi[s])}});
    j["values"] = std::move(vals);
    return j;
}

inline Potential potential_from_json(const json& j) {
    try {
        const auto& vals = j.at("values");
        std::vector<double> v(vals.size(), 0.0);
        std::vector<char> seen(vals.size(), 0);
        for (const auto& e : vals) {
            const auto s = e.at("abstract_state").get<std::size_t>();
            if (s >= v.size() || seen[s]) throw FormatError("abstract_state ids must be a permutation of 0..n-1");
            seen[s] = 1;
            v[s] = e.at("value").get<double>();
        }
        return Potential(std::move(v), j.at("bound_phi").get<double>());
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed potential document: ") + e.what());
    } catch (const UsageError& e) {
        throw FormatError(std::string("malformed potential document: ") + e.what());
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline json read_json(const std::string& path) {
    const std::string text = read_file(path);
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot write " + path);
    out << text;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// Per-seed curve CSV: interactions,seed,metric.
inline std::string curves_csv(const std::vector<LearningCurve>& curves, const ArtifactHeader& header) {
    std::ostringstream os;
    os << header.comment_line() << "\n" << "interactions,seed,metric\n";
    for (const auto& c : curves)
        for (const auto& p : c.points) os << p.interactions << "," << c.seed << "," << format_double(p.metric) << "\n";
    return os.str();
}

struct AggregatePoint {
    std::size_t interactions;
    double mean;
    double std;
};

// Mean and population standard deviation across seeds at each evaluation point.
inline std::vector<AggregatePoint> aggregate(const std::vector<LearningCurve>& curves) {
    std::vector<AggregatePoint> out;
    if (curves.empty()) return out;
    for (std::size_t i = 0; i < curves.front().points.size(); ++i) {
        double m = 0.0;
        for (const auto& c : curves) m += c.points.at(i).metric;
        m /= static_cast<double>(curves.size());
        double v = 0.0;
        for (const auto& c : curves) v += (c.points.at(i).metric - m) * (c.points.at(i).metric - m);
        v /= static_cast<double>(curves.size());
        out.push_back({curves.front().points[i].interactions, m, std::sqrt(v)});
    }
    return out;
}

inline std::string aggregate_csv(const std::vector<LearningCurve>& curves, const ArtifactHeader& header) {
    std::ostringstream os;
    os << header.comment_line() << "\n" << "interactions,mean,std\n";
    for (const auto& p : aggregate(curves))
        os << p.interactions << "," << format_double(p.mean) << "," << format_double(p.std) << "\n";
    return os.str();
}

}  // namespace pbrs::io
