#include "pipesynth/order_dag.hpp"

#include <algorithm>
#include <functional>

#include <spdlog/spdlog.h>

#include "pipesynth/assets.hpp"
#include "pipesynth/corpus.hpp"
#include "pipesynth/error.hpp"

namespace pipesynth {

void OrderDag::add_node(const std::string& node) { nodes_.insert(node); }

void OrderDag::add_edge(const std::string& from, const std::string& to, std::size_t support) {
    if (from == to) throw Error(ErrorCode::CycleDetected, "self edge on " + from);
    nodes_.insert(from);
    nodes_.insert(to);
    auto [it, inserted] = edges_.try_emplace({from, to}, support);
    if (!inserted) it->second = std::max(it->second, support);
}

void OrderDag::remove_edge(const std::string& from, const std::string& to) { edges_.erase({from, to}); }

void OrderDag::remove_node_bridged(const std::string& node) {
    auto preds = predecessors(node);
    auto succs = successors(node);
    for (const auto& p : preds) {
        const std::size_t sp = support(p, node);
        for (const auto& s : succs) add_edge(p, s, std::min(sp, support(node, s)));
    }
    std::erase_if(edges_, [&](const auto& e) { return e.first.first == node || e.first.second == node; });
    nodes_.erase(node);
}

bool OrderDag::has_edge(const std::string& from, const std::string& to) const {
    return edges_.count({from, to}) > 0;
}

std::size_t OrderDag::support(const std::string& from, const std::string& to) const {
    auto it = edges_.find({from, to});
    return it == edges_.end() ? 0 : it->second;
}

std::vector<DagEdge> OrderDag::edges() const {
    std::vector<DagEdge> out;
    out.reserve(edges_.size());
    for (const auto& [key, s] : edges_) out.push_back({key.first, key.second, s});
    return out;
}

std::vector<std::string> OrderDag::successors(const std::string& node) const {
    std::vector<std::string> out;
    for (auto it = edges_.lower_bound({node, std::string()}); it != edges_.end() && it->first.first == node; ++it)
        out.push_back(it->first.second);
    return out;
}

std::vector<std::string> OrderDag::predecessors(const std::string& node) const {
    std::vector<std::string> out;
    for (const auto& [key, s] : edges_)
        if (key.second == node) out.push_back(key.first);
    return out;
}

bool OrderDag::reachable(const std::string& from, const std::string& to) const {
    std::set<std::string> seen;
    std::vector<std::string> stack = successors(from);
    while (!stack.empty()) {
        auto n = stack.back();
        stack.pop_back();
        if (n == to) return true;
        if (!seen.insert(n).second) continue;
        for (auto& s : successors(n)) stack.push_back(std::move(s));
    }
    return false;
}

std::vector<std::string> OrderDag::find_cycle() const {
    enum class Mark { White, Grey, Black };
    std::map<std::string, Mark> mark;
    for (const auto& n : nodes_) mark[n] = Mark::White;
    std::vector<std::string> path;
    std::vector<std::string> cycle;

    std::function<bool(const std::string&)> visit = [&](const std::string& n) {
        mark[n] = Mark::Grey;
        path.push_back(n);
        for (const auto& s : successors(n)) {
            if (mark[s] == Mark::Grey) {
                auto it = std::find(path.begin(), path.end(), s);
                cycle.assign(it, path.end());
                return true;
            }
            if (mark[s] == Mark::White && visit(s)) return true;
        }
        path.pop_back();
        mark[n] = Mark::Black;
        return false;
    };
    for (const auto& n : nodes_)
        if (mark[n] == Mark::White && visit(n)) return cycle;
    return {};
}

bool OrderDag::is_acyclic() const { return find_cycle().empty(); }

void OrderDag::transitive_reduce() {
    if (!is_acyclic()) throw Error(ErrorCode::CycleDetected, "transitive reduction of a cyclic graph");
    std::vector<std::pair<std::string, std::string>> redundant;
    for (const auto& [key, s] : edges_) {
        for (const auto& mid : successors(key.first)) {
            if (mid != key.second && reachable(mid, key.second)) {
                redundant.push_back(key);
                break;
            }
        }
    }
    for (const auto& key : redundant) edges_.erase(key);
}

std::map<std::string, std::size_t> OrderDag::levels() const {
    if (!is_acyclic()) throw Error(ErrorCode::CycleDetected, "levels of a cyclic graph");
    std::map<std::string, std::size_t> level;
    std::map<std::string, std::size_t> indegree;
    for (const auto& n : nodes_) indegree[n] = 0;
    for (const auto& [key, s] : edges_) ++indegree[key.second];
    std::vector<std::string> ready;
    for (const auto& [n, d] : indegree)
        if (d == 0) {
            ready.push_back(n);
            level[n] = 0;
        }
    while (!ready.empty()) {
        auto n = ready.back();
        ready.pop_back();
        for (const auto& s : successors(n)) {
            level[s] = std::max(level[s], level[n] + 1);
            if (--indegree[s] == 0) ready.push_back(s);
        }
    }
    return level;
}

nlohmann::ordered_json OrderDag::to_json() const {
    nlohmann::ordered_json j;
    j["nodes"] = nodes_;
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : edges()) j["edges"].push_back({{"from", e.from}, {"to", e.to}, {"support", e.support}});
    return j;
}

OrderDag OrderDag::from_json(const nlohmann::json& j) {
    OrderDag g;
    try {
        for (const auto& n : j.at("nodes")) g.add_node(n.get<std::string>());
        for (const auto& e : j.at("edges"))
            g.add_edge(e.at("from").get<std::string>(), e.at("to").get<std::string>(),
                       e.value("support", std::size_t{1}));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("order dag: ") + e.what());
    }
    if (!g.is_acyclic()) throw Error(ErrorCode::CycleDetected, "order dag contains a cycle");
    return g;
}

const OrderDag& OrderDag::builtin_default() {
    static const OrderDag g = from_json(nlohmann::json::parse(*assets::find("default_dag.json")));
    return g;
}

OrderDag mine_order_dag(const MetaCorpus& corpus, double min_support) {
    if (corpus.records.empty()) throw Error(ErrorCode::InvalidArgument, "cannot mine an order from an empty corpus");
    if (!(min_support > 0.0 && min_support <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "min_support must lie in (0, 1]");

    // before[{a,b}] = number of records where a precedes b.
    std::map<std::pair<std::string, std::string>, std::size_t> before;
    for (const auto& r : corpus.records)
        for (std::size_t i = 0; i < r.fe_sequence.size(); ++i)
            for (std::size_t j = i + 1; j < r.fe_sequence.size(); ++j) ++before[{r.fe_sequence[i], r.fe_sequence[j]}];

    OrderDag g;
    const std::string model(kModelNode);
    g.add_node(model);
    auto counts = corpus.fe_counts();
    for (const auto& f : corpus.taxonomy->fe_components()) g.add_edge(f.name, model, counts[f.name]);

    for (const auto& [pair, ab] : before) {
        const auto& [a, b] = pair;
        if (a > b && before.count({b, a})) continue;  // handled from the other side
        auto rev = before.find({b, a});
        const std::size_t ba = rev == before.end() ? 0 : rev->second;
        const double total = static_cast<double>(ab + ba);
        if (ab > ba && static_cast<double>(ab) >= min_support * total) g.add_edge(a, b, ab);
        else if (ba > ab && static_cast<double>(ba) >= min_support * total) g.add_edge(b, a, ba);
    }

    for (auto cycle = g.find_cycle(); !cycle.empty(); cycle = g.find_cycle()) {
        DagEdge weakest;
        bool first = true;
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            DagEdge e{cycle[i], cycle[(i + 1) % cycle.size()], 0};
            e.support = g.support(e.from, e.to);
            if (first || std::tie(e.support, e.from, e.to) < std::tie(weakest.support, weakest.from, weakest.to)) {
                weakest = e;
                first = false;
            }
        }
        spdlog::info("order mining: dropping {}->{} (support {}) to break a cycle", weakest.from, weakest.to,
                     weakest.support);
        g.remove_edge(weakest.from, weakest.to);
    }
    g.transitive_reduce();
    return g;
}

}  // namespace pipesynth
