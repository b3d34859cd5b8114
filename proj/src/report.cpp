#include "medtest/report.hpp"

#include <cstdio>

namespace medtest {

namespace {

const char* sidedness_name(Sidedness s) { return s == Sidedness::upper ? "upper" : "two-sided"; }

}  // namespace

Json to_json(const TestResult& result) {
    Json j;
    j["theta"] = result.theta_hat;
    j["se"] = result.se;
    j["t"] = result.t_stat;
    j["p"] = result.p_value;
    j["n"] = result.n;
    j["n_effective"] = result.n_effective;
    j["sidedness"] = sidedness_name(result.sidedness);
    j["aggregation"] = result.aggregation == Aggregation::median_of_splits ? "median-of-splits" : "single";
    Json splits = Json::array();
    for (const SplitResult& s : result.per_split)
        splits.push_back({{"theta", s.theta_hat}, {"se", s.se}, {"n_effective", s.n_effective}});
    j["per_split"] = std::move(splits);
    return j;
}

Json to_json(const BdFdResult& result) {
    Json j = to_json(result.result);
    j["q_mean"] = result.q_mean;
    j["zeta_mean"] = result.zeta_mean;
    j["zeta_fd_mean"] = result.zeta_fd_mean;
    return j;
}

Json to_json(const McReport& report) {
    Json j;
    j["mean_theta"] = report.mean_theta;
    j["sd_theta"] = report.sd_theta;
    j["mean_se"] = report.mean_se;
    j["rejection_rate"] = report.rejection_rate;
    j["reps_completed"] = report.reps_completed;
    j["reps_failed"] = report.reps_failed;
    j["mean_n_effective"] = report.mean_n_effective;
    return j;
}

Json to_json(const EffectReport& report) {
    Json j;
    j["ate"] = report.ate;
    j["cde"] = report.cde;
    j["nde"] = report.nde;
    j["nie"] = report.nie;
    return j;
}

Json to_json(const OracleCheck& check) { return {{"holds", check.holds}, {"deviation", check.deviation}}; }

Json to_json(const VerificationReport& report, const TheoremSpec& spec, bool list_counterexamples) {
    Json j;
    j["theorem"] = spec.name;
    j["graphs_checked"] = report.graphs_checked;
    j["premises_held"] = report.premises_held;
    j["counterexample_found"] = report.counterexample_count > 0;
    j["counterexample_count"] = report.counterexample_count;
    Json cex = Json::array();
    if (list_counterexamples) {
        for (const Dag& g : report.counterexamples) cex.push_back(to_edge_list(g));
    } else if (auto first = report.first()) {
        cex.push_back(to_edge_list(*first));
    }
    j["counterexamples"] = std::move(cex);
    return j;
}

std::string markdown_header() {
    return "| n | θ̂ | std θ̂ | mean SE | rej. rate |\n|---|---|---|---|---|";
}

std::string markdown_row(Eigen::Index n, const McReport& report) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "| %lld | %.3f | %.3f | %.3f | %.3f |", static_cast<long long>(n),
                  report.mean_theta, report.sd_theta, report.mean_se, report.rejection_rate);
    return buf;
}

}  // namespace medtest
