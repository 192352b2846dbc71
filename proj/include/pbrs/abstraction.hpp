#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pbrs/common.hpp"
#include "pbrs/mdp.hpp"
#include "pbrs/ram.hpp"
#include "pbrs/shaping.hpp"
#include "pbrs/value_iteration.hpp"

namespace pbrs {

// Map alpha from original states (cells of a tabular model, or RAM snapshots)
// to abstract-state ids. An empty optional means "not covered".
class AggregationFn {
public:
    enum class Mode { ByCell, ByRamIndices, ByCoordinateRule };

    using RamRule = std::function<std::optional<StateId>(const RamVector&)>;

    static AggregationFn by_cell(std::vector<std::optional<StateId>> table, std::size_t num_abstract) {
        AggregationFn f;
        f.mode_ = Mode::ByCell;
        f.num_abstract_ = num_abstract;
        for (const auto& v : table)
            if (v && *v >= num_abstract) throw ConstructionError("aggregation maps to an out-of-range abstract state");
        f.table_ = std::move(table);
        return f;
    }

    // The rule receives the whole snapshot but is expected to read only `indices`.
    static AggregationFn by_ram_indices(std::vector<std::size_t> indices, RamRule rule, std::size_t num_abstract) {
        AggregationFn f;
        f.mode_ = Mode::ByRamIndices;
        f.indices_ = std::move(indices);
        f.rule_ = std::move(rule);
        f.num_abstract_ = num_abstract;
        return f;
    }

    static AggregationFn by_coordinate_rule(RamRule rule, std::size_t num_abstract) {
        AggregationFn f;
        f.mode_ = Mode::ByCoordinateRule;
        f.rule_ = std::move(rule);
        f.num_abstract_ = num_abstract;
        return f;
    }

    Mode mode() const { return mode_; }
    std::size_t num_abstract() const { return num_abstract_; }
    std::size_t domain_size() const { return table_.size(); }
    const std::vector<std::size_t>& ram_indices() const { return indices_; }

    std::optional<StateId> operator()(StateId s) const {
        if (mode_ != Mode::ByCell) throw UsageError("state-indexed lookup on a RAM aggregation");
        if (s >= table_.size()) throw UsageError("state outside the aggregation domain");
        return table_[s];
    }

    std::optional<StateId> operator()(const RamVector& ram) const {
        if (mode_ == Mode::ByCell) throw UsageError("RAM lookup on a cell aggregation");
        auto r = rule_(ram);
        if (r && *r >= num_abstract_) throw ConstructionError("aggregation maps to an out-of-range abstract state");
        return r;
    }

private:
    Mode mode_ = Mode::ByCell;
    std::vector<std::optional<StateId>> table_;
    std::vector<std::size_t> indices_;
    RamRule rule_;
    std::size_t num_abstract_ = 0;
};

// Potential over abstract states: the VI solution, bound = its maximum.
inline Potential abstract_potential(const TabularMdp& abs_mdp, double vi_eps) {
    auto vi = value_iteration(abs_mdp, vi_eps, {});
    return Potential::from_values(std::move(vi.values));
}

// phi(s) = V*_abs(alpha(s)) over the cells of the original model.
inline Potential potential_from_abstraction(const TabularMdp& abs_mdp, const AggregationFn& alpha, double vi_eps) {
    if (alpha.mode() != AggregationFn::Mode::ByCell)
        throw UsageError("potential_from_abstraction needs a cell aggregation; RAM aggregations use abstract_potential");
    if (alpha.num_abstract() != abs_mdp.num_states())
        throw ConstructionError("aggregation image size does not match the abstraction");
    const Potential abs_phi = abstract_potential(abs_mdp, vi_eps);
    std::vector<double> values(alpha.domain_size(), 0.0);
    for (StateId s = 0; s < values.size(); ++s) {
        auto a = alpha(s);
        if (!a) throw ConstructionError("aggregation is not total: state " + std::to_string(s) + " unmapped");
        values[s] = abs_phi[*a];
    }
    return Potential(std::move(values), abs_phi.bound_phi());
}

}  // namespace pbrs
