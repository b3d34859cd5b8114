#include "medtest/dag.hpp"

#include "medtest/error.hpp"

#include <bit>
#include <sstream>

namespace medtest {

namespace {

constexpr std::array<std::pair<int, int>, 6> kLatentPairs{{{kY, kD}, {kY, kM}, {kY, kX}, {kD, kM}, {kD, kX}, {kM, kX}}};
constexpr std::array<const char*, 4> kObservedNames{"Y", "D", "M", "X"};

// Nodes reachable from `from` along directed edges, excluding paths that
// pass through `blocked` (the start itself is never blocked).
NodeSet directed_reach(const Dag& g, int from, NodeSet blocked) {
    NodeSet seen = 0;
    NodeSet frontier = g.children(from);
    while (frontier) {
        const int v = std::countr_zero(static_cast<unsigned>(frontier));
        frontier &= static_cast<NodeSet>(frontier - 1);
        if (seen & node_bit(v)) continue;
        seen |= node_bit(v);
        if (!(blocked & node_bit(v))) frontier |= static_cast<NodeSet>(g.children(v) & ~seen);
    }
    return seen;
}

bool has_directed_path(const Dag& g, int from, int to, NodeSet blocked = 0) {
    return (directed_reach(g, from, blocked) & node_bit(to)) != 0;
}

}  // namespace

int Dag::latent_index(int a, int b) {
    for (std::size_t k = 0; k < kLatentPairs.size(); ++k) {
        const auto [p, q] = kLatentPairs[k];
        if ((p == a && q == b) || (p == b && q == a)) return static_cast<int>(k);
    }
    throw ArgumentError("latent confounders join two distinct observed nodes");
}

std::pair<int, int> Dag::latent_pair(int latent_node) {
    if (latent_node < kObservedNodes || latent_node >= kDagNodes) throw ArgumentError("not a latent node");
    return kLatentPairs[static_cast<std::size_t>(latent_node - kObservedNodes)];
}

std::string Dag::node_name(int v) {
    if (v >= 0 && v < kObservedNodes) return kObservedNames[static_cast<std::size_t>(v)];
    const auto [a, b] = latent_pair(v);
    return std::string("U_") + kObservedNames[static_cast<std::size_t>(a)] + kObservedNames[static_cast<std::size_t>(b)];
}

int Dag::node_from_name(const std::string& name) {
    for (int v = 0; v < kDagNodes; ++v) {
        if (node_name(v) == name) return v;
    }
    // Latent pairs may be written in either order.
    if (name.size() == 4 && name.rfind("U_", 0) == 0) {
        const int a = node_from_name(name.substr(2, 1));
        const int b = node_from_name(name.substr(3, 1));
        return latent_node(a, b);
    }
    throw ArgumentError("unknown node '" + name + "'");
}

void Dag::add_edge(int from, int to) {
    if (from < 0 || from >= kObservedNodes || to < 0 || to >= kObservedNodes || from == to)
        throw ArgumentError("directed edges join two distinct observed nodes");
    children_[static_cast<std::size_t>(from)] |= node_bit(to);
}

void Dag::remove_edge(int from, int to) {
    children_[static_cast<std::size_t>(from)] &= static_cast<NodeSet>(~node_bit(to));
}

void Dag::add_latent(int a, int b) {
    children_[static_cast<std::size_t>(latent_node(a, b))] = static_cast<NodeSet>(node_bit(a) | node_bit(b));
}

bool Dag::has_latent(int a, int b) const {
    return children_[static_cast<std::size_t>(latent_node(a, b))] != 0;
}

NodeSet Dag::parents(int v) const {
    NodeSet out = 0;
    for (int u = 0; u < kDagNodes; ++u)
        if (children_[static_cast<std::size_t>(u)] & node_bit(v)) out |= node_bit(u);
    return out;
}

NodeSet Dag::descendants(int v) const {
    return directed_reach(*this, v, 0);
}

bool Dag::is_acyclic() const {
    for (int v = 0; v < kDagNodes; ++v)
        if (descendants(v) & node_bit(v)) return false;
    return true;
}

bool Dag::valid() const {
    for (int v = kObservedNodes; v < kDagNodes; ++v) {
        const NodeSet ch = children_[static_cast<std::size_t>(v)];
        if (ch == 0) continue;
        const auto [a, b] = latent_pair(v);
        if (ch != (node_bit(a) | node_bit(b)) || parents(v) != 0) return false;
    }
    return is_acyclic();
}

bool d_separated(const Dag& g, NodeSet a, NodeSet b, NodeSet c) {
    if ((a & b) || (a & c) || (b & c)) throw ArgumentError("d-separation sets must be disjoint");
    for (NodeSet s : {a, b, c})
        for (int v = 0; v < kDagNodes; ++v)
            if ((s & node_bit(v)) && !g.present(v)) throw ArgumentError("unknown node " + Dag::node_name(v));

    // Ancestors of the conditioning set (colliders there are open).
    NodeSet anc = c;
    for (bool grown = true; grown;) {
        grown = false;
        for (int v = 0; v < kDagNodes; ++v) {
            if (!(anc & node_bit(v))) continue;
            const NodeSet pa = g.parents(v);
            if (pa & ~anc) {
                anc |= pa;
                grown = true;
            }
        }
    }

    // Ball passing over (node, direction): up = arrived from a child.
    NodeSet visited_up = 0, visited_down = 0;
    std::vector<std::pair<int, bool>> stack;
    for (int v = 0; v < kDagNodes; ++v)
        if (a & node_bit(v)) stack.emplace_back(v, true);
    while (!stack.empty()) {
        const auto [v, up] = stack.back();
        stack.pop_back();
        NodeSet& visited = up ? visited_up : visited_down;
        if (visited & node_bit(v)) continue;
        visited |= node_bit(v);
        const bool observed = (c & node_bit(v)) != 0;
        if (!observed && (b & node_bit(v))) return false;
        auto push = [&](NodeSet set, bool dir) {
            for (int u = 0; u < kDagNodes; ++u)
                if (set & node_bit(u)) stack.emplace_back(u, dir);
        };
        if (up) {
            if (!observed) {
                push(g.parents(v), true);
                push(g.children(v), false);
            }
        } else {
            if (!observed) push(g.children(v), false);
            if (anc & node_bit(v)) push(g.parents(v), true);
        }
    }
    return true;
}

Dag intervene(const Dag& g, NodeSet remove_outgoing_of) {
    Dag out = g;
    for (int v = 0; v < kObservedNodes; ++v) {
        if (!(remove_outgoing_of & node_bit(v))) continue;
        for (int w = 0; w < kObservedNodes; ++w) out.remove_edge(v, w);
    }
    return out;
}

AssumptionProfile assumption_profile(const Dag& g) {
    AssumptionProfile p;
    p.a1_structure = !has_directed_path(g, kY, kM) && !has_directed_path(g, kY, kD) && !has_directed_path(g, kM, kD) &&
                     !has_directed_path(g, kD, kX) && !has_directed_path(g, kM, kX) && !has_directed_path(g, kY, kX);
    // A single edge is a directed path with no intermediate node to condition on.
    p.a3_first_stage = g.has_edge(kD, kM);
    const Dag g_dm = intervene(g, node_bit(kD) | node_bit(kM));
    const Dag g_d = intervene(g, node_bit(kD));
    const Dag g_m = intervene(g, node_bit(kM));
    p.a4a = d_separated(g_dm, node_bit(kY), node_bit(kD), node_bit(kX));
    p.a4b = d_separated(g_d, node_bit(kM), node_bit(kD), node_bit(kX));
    // Directed paths through X are blocked by conditioning on it.
    p.a5_full_mediation = !has_directed_path(g_m, kD, kY, node_bit(kX));
    p.a6_mediator_exogeneity = d_separated(g_dm, node_bit(kY), node_bit(kM), node_bit(kX));
    return p;
}

bool ti_holds(const Dag& g) {
    return d_separated(g, node_bit(kD), node_bit(kY), node_bit(kM) | node_bit(kX));
}

Dag dag_from_masks(unsigned observed_mask, unsigned latent_mask) {
    Dag g;
    for (std::size_t k = 0; k < kAllowedEdges.size(); ++k)
        if (observed_mask & (1u << k)) g.add_edge(kAllowedEdges[k].first, kAllowedEdges[k].second);
    for (std::size_t k = 0; k < kLatentPairs.size(); ++k)
        if (latent_mask & (1u << k)) g.add_latent(kLatentPairs[k].first, kLatentPairs[k].second);
    return g;
}

std::vector<Dag> enumerate_dags() {
    std::vector<Dag> out;
    out.reserve(4096);
    for (unsigned obs = 0; obs < 64; ++obs)
        for (unsigned lat = 0; lat < 64; ++lat) out.push_back(dag_from_masks(obs, lat));
    return out;
}

std::string to_string(Predicate p) {
    switch (p) {
        case Predicate::a1: return "a1";
        case Predicate::a3: return "a3";
        case Predicate::a4a: return "a4a";
        case Predicate::a4b: return "a4b";
        case Predicate::a5: return "a5";
        case Predicate::a6: return "a6";
        case Predicate::ti: return "TI";
    }
    return "?";
}

bool evaluate(Predicate p, const Dag& g) {
    if (p == Predicate::ti) return ti_holds(g);
    const AssumptionProfile a = assumption_profile(g);
    switch (p) {
        case Predicate::a1: return a.a1_structure;
        case Predicate::a3: return a.a3_first_stage;
        case Predicate::a4a: return a.a4a;
        case Predicate::a4b: return a.a4b;
        case Predicate::a5: return a.a5_full_mediation;
        case Predicate::a6: return a.a6_mediator_exogeneity;
        case Predicate::ti: break;
    }
    return false;
}

TheoremSpec theorem1() {
    return {"Theorem 1",
            {Predicate::a1, Predicate::a3, Predicate::a4a, Predicate::a4b},
            {Predicate::a5, Predicate::a6},
            Predicate::ti,
            Direction::equivalent};
}

TheoremSpec theorem2() {
    return {"Theorem 2",
            {Predicate::a1, Predicate::a3},
            {Predicate::a4a, Predicate::a5, Predicate::a6},
            Predicate::ti,
            Direction::equivalent};
}

TheoremSpec sanity_negative() {
    return {"negative control (Theorem 1 without a6)",
            {Predicate::a1, Predicate::a3, Predicate::a4a, Predicate::a4b},
            {Predicate::a5},
            Predicate::ti,
            Direction::equivalent};
}

VerificationReport verify_theorem(const TheoremSpec& spec, bool collect_all) {
    VerificationReport report;
    for (unsigned obs = 0; obs < 64; ++obs)
        for (unsigned lat = 0; lat < 64; ++lat) {
            const Dag g = dag_from_masks(obs, lat);
            ++report.graphs_checked;
            bool premises = true;
            for (Predicate p : spec.premises) premises = premises && evaluate(p, g);
            if (!premises) continue;
            ++report.premises_held;
            bool lhs = true;
            for (Predicate p : spec.lhs) lhs = lhs && evaluate(p, g);
            const bool rhs = evaluate(spec.rhs, g);
            bool ok = true;
            switch (spec.direction) {
                case Direction::implies: ok = !lhs || rhs; break;
                case Direction::implied_by: ok = !rhs || lhs; break;
                case Direction::equivalent: ok = lhs == rhs; break;
            }
            if (!ok) {
                ++report.counterexample_count;
                if (collect_all || report.counterexamples.empty()) report.counterexamples.push_back(g);
            }
        }
    return report;
}

std::string to_edge_list(const Dag& g) {
    std::ostringstream out;
    for (int v = 0; v < kDagNodes; ++v)
        for (int w = 0; w < kObservedNodes; ++w)
            if (g.children(v) & node_bit(w)) out << Dag::node_name(v) << " -> " << Dag::node_name(w) << '\n';
    return out.str();
}

Dag parse_edge_list(const std::string& text) {
    Dag g;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string from, arrow, to, extra;
        if (!(fields >> from)) continue;
        if (!(fields >> arrow >> to) || arrow != "->" || (fields >> extra))
            throw ArgumentError("edge list line " + std::to_string(line_no) + ": expected 'A -> B'");
        const int a = Dag::node_from_name(from);
        const int b = Dag::node_from_name(to);
        if (b >= kObservedNodes) throw ArgumentError("edge list line " + std::to_string(line_no) + ": latent as head");
        if (a >= kObservedNodes) {
            const auto [p, q] = Dag::latent_pair(a);
            if (b != p && b != q)
                throw ArgumentError("edge list line " + std::to_string(line_no) + ": " + from +
                                    " only confounds its own pair");
            g.add_latent(p, q);
        } else {
            g.add_edge(a, b);
        }
    }
    if (!g.is_acyclic()) throw ArgumentError("edge list describes a cyclic graph");
    return g;
}

Dag figure1() {
    Dag g;
    g.add_edge(kD, kM);
    g.add_edge(kM, kY);
    g.add_edge(kX, kD);
    g.add_edge(kX, kM);
    g.add_edge(kX, kY);
    return g;
}

Dag figure2() {
    Dag g = figure1();
    g.add_latent(kD, kM);
    return g;
}

}  // namespace medtest
