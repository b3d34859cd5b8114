#pragma once

#include "medtest/bdfd_test.hpp"
#include "medtest/ci_test.hpp"
#include "medtest/dag.hpp"
#include "medtest/population.hpp"
#include "medtest/simulation.hpp"

#include <json.hpp>

#include <string>

namespace medtest {

using Json = nlohmann::ordered_json;

Json to_json(const TestResult& result);
Json to_json(const BdFdResult& result);
// Per-replication results are omitted.
Json to_json(const McReport& report);
Json to_json(const EffectReport& report);
Json to_json(const OracleCheck& check);
Json to_json(const VerificationReport& report, const TheoremSpec& spec, bool list_counterexamples);

// Header and one row in the layout: n | theta | std theta | mean SE | rej. rate.
std::string markdown_header();
std::string markdown_row(Eigen::Index n, const McReport& report);

}  // namespace medtest
