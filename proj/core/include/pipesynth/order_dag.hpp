#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace pipesynth {

struct MetaCorpus;

/// Name of the sink node standing for the model component.
inline constexpr std::string_view kModelNode = "MODEL";

struct DagEdge {
    std::string from;
    std::string to;
    std::size_t support = 0;

    bool operator==(const DagEdge&) const = default;
};

/// Relative ordering of components. Nodes are FE labels plus MODEL; edges
/// read "from must precede to".
class OrderDag {
  public:
    void add_node(const std::string& node);
    /// Adds both endpoints if needed; re-adding keeps the larger support.
    void add_edge(const std::string& from, const std::string& to, std::size_t support = 1);
    void remove_edge(const std::string& from, const std::string& to);
    /// Removes the node and connects each predecessor to each successor.
    void remove_node_bridged(const std::string& node);

    bool has_node(std::string_view node) const { return nodes_.count(std::string(node)) > 0; }
    bool has_edge(const std::string& from, const std::string& to) const;
    std::size_t support(const std::string& from, const std::string& to) const;

    const std::set<std::string>& nodes() const { return nodes_; }
    std::vector<DagEdge> edges() const;
    std::vector<std::string> successors(const std::string& node) const;
    std::vector<std::string> predecessors(const std::string& node) const;

    /// True when `to` is reachable from `from` by a path of length >= 1.
    bool reachable(const std::string& from, const std::string& to) const;
    bool is_acyclic() const;
    /// Some cycle as a node sequence (first node repeated implicitly), or empty.
    std::vector<std::string> find_cycle() const;

    /// Drops every edge implied by a longer path. Requires acyclicity.
    void transitive_reduce();

    /// Longest-path depth from the sources; nodes with no relation share level 0.
    std::map<std::string, std::size_t> levels() const;

    nlohmann::ordered_json to_json() const;
    static OrderDag from_json(const nlohmann::json& j);
    /// The in-repo default ordering asset.
    static const OrderDag& builtin_default();

    bool operator==(const OrderDag&) const = default;

  private:
    std::set<std::string> nodes_;
    std::map<std::pair<std::string, std::string>, std::size_t> edges_;
};

/// Pairwise-majority precedence mining over FE sequences. An edge a->b is
/// added when a precedes b in at least `min_support` of the records holding
/// both (strict majority). Every FE label in the taxonomy gets an edge to
/// MODEL. Cycles are broken by dropping their weakest edge (lowest support,
/// then lexicographic), then the result is transitively reduced.
OrderDag mine_order_dag(const MetaCorpus& corpus, double min_support = 0.8);

}  // namespace pipesynth
