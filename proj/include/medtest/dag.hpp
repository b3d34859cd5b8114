#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace medtest {

// Observed nodes Y, D, M, X are 0..3. Nodes 4..9 are the pairwise latent
// confounders U_YD, U_YM, U_YX, U_DM, U_DX, U_MX, which exist only when
// switched on. Node sets are bitmasks over these ten nodes.
using NodeSet = std::uint16_t;

enum Node : int { kY = 0, kD = 1, kM = 2, kX = 3 };
inline constexpr int kObservedNodes = 4;
inline constexpr int kDagNodes = 10;

constexpr NodeSet node_bit(int v) { return static_cast<NodeSet>(1u << v); }

class Dag {
public:
    Dag() { children_.fill(0); }

    // Latent index 0..5 and node id 4..9 of the pair {a, b} of observed nodes.
    static int latent_index(int a, int b);
    static int latent_node(int a, int b) { return kObservedNodes + latent_index(a, b); }
    static std::pair<int, int> latent_pair(int latent_node);
    static std::string node_name(int v);
    static int node_from_name(const std::string& name);

    void add_edge(int from, int to);
    void remove_edge(int from, int to);
    bool has_edge(int from, int to) const { return (children_[static_cast<std::size_t>(from)] & node_bit(to)) != 0; }
    void add_latent(int a, int b);
    bool has_latent(int a, int b) const;
    bool present(int v) const { return v < kObservedNodes || children_[static_cast<std::size_t>(v)] != 0; }

    NodeSet children(int v) const { return children_[static_cast<std::size_t>(v)]; }
    NodeSet parents(int v) const;
    NodeSet descendants(int v) const;

    bool is_acyclic() const;
    // Latents have no parents and exactly their two children.
    bool valid() const;

    bool operator==(const Dag& other) const { return children_ == other.children_; }

private:
    std::array<NodeSet, kDagNodes> children_;
};

// Whether every path between a and b is blocked given c. The sets must be
// disjoint and contain only present nodes.
bool d_separated(const Dag& g, NodeSet a, NodeSet b, NodeSet c);

// Copy of g without the edges leaving the given nodes.
Dag intervene(const Dag& g, NodeSet remove_outgoing_of);

struct AssumptionProfile {
    bool a1_structure = false;
    bool a3_first_stage = false;
    bool a4a = false;
    bool a4b = false;
    bool a5_full_mediation = false;
    bool a6_mediator_exogeneity = false;
};

AssumptionProfile assumption_profile(const Dag& g);

// D and Y d-separated given {M, X}.
bool ti_holds(const Dag& g);

// Observed edges X->D, X->M, X->Y, D->M, D->Y, M->Y crossed with the six
// pairwise latents: 4096 graphs, in the order (observed mask)*64 + latent mask.
inline constexpr std::array<std::pair<int, int>, 6> kAllowedEdges{
    {{kX, kD}, {kX, kM}, {kX, kY}, {kD, kM}, {kD, kY}, {kM, kY}}};
Dag dag_from_masks(unsigned observed_mask, unsigned latent_mask);
std::vector<Dag> enumerate_dags();

enum class Predicate { a1, a3, a4a, a4b, a5, a6, ti };
std::string to_string(Predicate p);
bool evaluate(Predicate p, const Dag& g);

enum class Direction { implies, implied_by, equivalent };

// premises => (AND lhs  <direction>  rhs)
struct TheoremSpec {
    std::string name;
    std::vector<Predicate> premises;
    std::vector<Predicate> lhs;
    Predicate rhs = Predicate::ti;
    Direction direction = Direction::equivalent;
};

TheoremSpec theorem1();
TheoremSpec theorem2();
// Theorem 1 without a6: mediator-outcome confounding breaks it.
TheoremSpec sanity_negative();

struct VerificationReport {
    std::size_t graphs_checked = 0;
    std::size_t premises_held = 0;
    std::size_t counterexample_count = 0;
    // Every counterexample with collect_all, otherwise the first one only.
    std::vector<Dag> counterexamples;

    std::optional<Dag> first() const {
        return counterexamples.empty() ? std::nullopt : std::optional<Dag>(counterexamples.front());
    }
};

// Scans the whole enumerated space.
VerificationReport verify_theorem(const TheoremSpec& spec, bool collect_all = false);

// One "A -> B" line per edge; latents appear as U_AB -> A and U_AB -> B.
std::string to_edge_list(const Dag& g);
Dag parse_edge_list(const std::string& text);

// D -> M -> Y with X -> {D, M, Y}.
Dag figure1();
// Figure 1 plus a latent confounding D and M.
Dag figure2();

}  // namespace medtest
