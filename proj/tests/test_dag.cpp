#include "medtest/dag.hpp"
#include "medtest/error.hpp"

#include <doctest.h>

#include <set>

using namespace medtest;

namespace {

constexpr NodeSet bits(std::initializer_list<int> nodes) {
    NodeSet s = 0;
    for (int v : nodes) s = static_cast<NodeSet>(s | node_bit(v));
    return s;
}

// Moralised ancestral graph criterion, written without Bayes-ball.
bool d_separated_moral(const Dag& g, NodeSet a, NodeSet b, NodeSet c) {
    NodeSet anc = a | b | c;
    for (bool grew = true; grew;) {
        grew = false;
        for (int v = 0; v < kDagNodes; ++v)
            if ((anc & node_bit(v)) && (g.parents(v) & ~anc)) {
                anc |= g.parents(v);
                grew = true;
            }
    }
    bool adj[kDagNodes][kDagNodes] = {};
    for (int v = 0; v < kDagNodes; ++v) {
        if (!(anc & node_bit(v))) continue;
        std::vector<int> pa;
        for (int u = 0; u < kDagNodes; ++u)
            if (g.parents(v) & node_bit(u)) pa.push_back(u);
        for (int u : pa) adj[u][v] = adj[v][u] = true;
        for (int u : pa)
            for (int w : pa)
                if (u != w) adj[u][w] = true;
    }
    NodeSet seen = a, frontier = a;
    while (frontier) {
        NodeSet next = 0;
        for (int v = 0; v < kDagNodes; ++v) {
            if (!(frontier & node_bit(v))) continue;
            for (int w = 0; w < kDagNodes; ++w)
                if (adj[v][w] && (anc & node_bit(w)) && !(c & node_bit(w)) && !(seen & node_bit(w))) next |= node_bit(w);
        }
        seen |= next;
        frontier = next;
    }
    return !(seen & b);
}

}  // namespace

TEST_SUITE("dag_verifier") {

TEST_CASE("figure graphs") {
    const Dag f1 = figure1();
    CHECK(d_separated(f1, bits({kD}), bits({kY}), bits({kM, kX})));
    CHECK_FALSE(d_separated(f1, bits({kD}), bits({kY}), bits({kX})));
    CHECK(ti_holds(f1));
    const AssumptionProfile p1 = assumption_profile(f1);
    CHECK(p1.a1_structure);
    CHECK(p1.a3_first_stage);
    CHECK(p1.a4a);
    CHECK(p1.a4b);
    CHECK(p1.a5_full_mediation);
    CHECK(p1.a6_mediator_exogeneity);

    const Dag f2 = figure2();
    CHECK(d_separated(f2, bits({kD}), bits({kY}), bits({kM, kX})));
    const AssumptionProfile p2 = assumption_profile(f2);
    CHECK(p2.a1_structure);
    CHECK(p2.a3_first_stage);
    CHECK(p2.a4a);
    CHECK_FALSE(p2.a4b);
    CHECK(p2.a5_full_mediation);
    CHECK(p2.a6_mediator_exogeneity);

    Dag direct = f1;
    direct.add_edge(kD, kY);
    CHECK_FALSE(assumption_profile(direct).a5_full_mediation);
    CHECK_FALSE(ti_holds(direct));
}

TEST_CASE("blocking rules") {
    Dag chain;
    chain.add_edge(kD, kM);
    chain.add_edge(kM, kY);
    CHECK(d_separated(chain, bits({kD}), bits({kY}), bits({kM})));
    CHECK_FALSE(d_separated(chain, bits({kD}), bits({kY}), 0));

    Dag collider;
    collider.add_edge(kD, kM);
    collider.add_edge(kY, kM);
    collider.add_edge(kM, kX);
    CHECK(d_separated(collider, bits({kD}), bits({kY}), 0));
    CHECK_FALSE(d_separated(collider, bits({kD}), bits({kY}), bits({kM})));
    // Conditioning on a descendant of the collider opens it too.
    CHECK_FALSE(d_separated(collider, bits({kD}), bits({kY}), bits({kX})));

    Dag confounded;
    confounded.add_latent(kM, kY);
    confounded.add_edge(kD, kM);
    CHECK_FALSE(d_separated(confounded, bits({kD}), bits({kY}), bits({kM})));
    CHECK(d_separated(confounded, bits({kD}), bits({kY}), 0));

    CHECK_THROWS_AS((void)d_separated(chain, bits({kD}), bits({kD}), 0), ArgumentError);
    CHECK_THROWS_AS((void)d_separated(chain, bits({kD}), bits({Dag::latent_node(kD, kY)}), 0), ArgumentError);
}

TEST_CASE("bayes-ball agrees with the moral-graph criterion") {
    const std::vector<Dag> all = enumerate_dags();
    long comparisons = 0;
    for (const Dag& g : all)
        for (NodeSet a = 1; a < 16; ++a)
            for (NodeSet b = 1; b < 16; ++b) {
                if (a & b) continue;
                const NodeSet rest = static_cast<NodeSet>(15 & ~(a | b));
                // Every subset of the remaining observed nodes.
                for (NodeSet c = rest;; c = static_cast<NodeSet>((c - 1) & rest)) {
                    REQUIRE(d_separated(g, a, b, c) == d_separated_moral(g, a, b, c));
                    ++comparisons;
                    if (c == 0) break;
                }
            }
    CHECK(comparisons > 100000);
}

TEST_CASE("interventions") {
    const Dag f1 = figure1();
    CHECK(intervene(f1, 0) == f1);
    const Dag cut = intervene(f1, bits({kD}));
    CHECK_FALSE(cut.has_edge(kD, kM));
    CHECK(cut.has_edge(kM, kY));
    CHECK(cut.has_edge(kX, kD));
    CHECK(cut.has_edge(kX, kM));
    CHECK(cut.has_edge(kX, kY));
    CHECK(intervene(cut, bits({kD})) == cut);

    // Latent edges survive surgery on observed nodes.
    CHECK(intervene(figure2(), bits({kD, kM})).has_latent(kD, kM));
}

TEST_CASE("enumeration") {
    const std::vector<Dag> all = enumerate_dags();
    CHECK(all.size() == 4096);
    std::set<std::pair<std::array<bool, 6>, std::array<bool, 6>>> distinct;
    for (const Dag& g : all) {
        CHECK(g.valid());
        CHECK(g.is_acyclic());
        std::array<bool, 6> obs{}, lat{};
        for (std::size_t k = 0; k < 6; ++k) obs[k] = g.has_edge(kAllowedEdges[k].first, kAllowedEdges[k].second);
        lat = {g.has_latent(kY, kD), g.has_latent(kY, kM), g.has_latent(kY, kX),
               g.has_latent(kD, kM), g.has_latent(kD, kX), g.has_latent(kM, kX)};
        distinct.insert({obs, lat});
    }
    CHECK(distinct.size() == 4096);
    CHECK(std::find(all.begin(), all.end(), figure1()) != all.end());
    CHECK(std::find(all.begin(), all.end(), figure2()) != all.end());
}

TEST_CASE("theorem verification") {
    const VerificationReport t1 = verify_theorem(theorem1());
    CHECK(t1.graphs_checked == 4096);
    CHECK(t1.counterexample_count == 0);
    const VerificationReport t2 = verify_theorem(theorem2());
    CHECK(t2.counterexample_count == 0);

    const VerificationReport neg = verify_theorem(sanity_negative(), true);
    REQUIRE(neg.counterexample_count > 0);
    CHECK(neg.counterexamples.size() == neg.counterexample_count);
    // The first witness: mediator-outcome confounding with a5 intact.
    const Dag w = *neg.first();
    CHECK(w.has_latent(kM, kY));
    CHECK(assumption_profile(w).a5_full_mediation);
    CHECK_FALSE(assumption_profile(w).a6_mediator_exogeneity);
    CHECK_FALSE(ti_holds(w));
}

TEST_CASE("edge lists") {
    const Dag f2 = figure2();
    const std::string text = to_edge_list(f2);
    CHECK(text.find("U_DM -> D") != std::string::npos);
    CHECK(parse_edge_list(text) == f2);
    CHECK(parse_edge_list("# comment\nX -> D\n\nU_MD -> M\nU_MD -> D\n") ==
          [] {
              Dag g;
              g.add_edge(kX, kD);
              g.add_latent(kD, kM);
              return g;
          }());
    CHECK_THROWS_AS((void)parse_edge_list("D -> Q\n"), ArgumentError);
    CHECK_THROWS_AS((void)parse_edge_list("D M\n"), ArgumentError);
    CHECK_THROWS_AS((void)parse_edge_list("U_DM -> Y\n"), ArgumentError);
}

}
