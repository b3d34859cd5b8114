#include "medtest/cli.hpp"

#include "medtest/bdfd_test.hpp"
#include "medtest/ci_test.hpp"
#include "medtest/dag.hpp"
#include "medtest/error.hpp"
#include "medtest/population.hpp"
#include "medtest/report.hpp"
#include "medtest/simulation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace medtest::cli {

namespace {

// Every flag of every subcommand; each subcommand binds the ones it uses.
struct Args {
    std::string data;
    std::string outcome;
    std::string treatment;
    std::string mediators;
    std::string covariates;

    int folds = 5;
    int splits = 1;
    double trim_lower = 0.05;
    double trim_upper = 0.95;
    double alpha = 0.05;
    std::string sidedness = "two-sided";
    std::string partition = "discrete";
    double partition_c = 0.0;
    int partition_cells = 2;

    std::string learner_family = "lasso";
    int learner_cv_folds = 10;
    std::string learner_lambda = "auto";
    bool learner_standardize = true;

    int dgp = 1;
    long long n = 1000;
    long long p = 200;
    double delta = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    std::string test = "ci";
    long long reps = 1000;

    std::string population;
    int m_size = 2;
    int x_size = 1;
    long budget = 1000000;
    bool separable_only = false;

    std::string theorem = "all";
    bool list_counterexamples = false;
    bool negative_control = false;

    std::uint64_t seed = 1;
    int threads = 0;
    std::string out;
    std::string config;
};

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = CLI::detail::trim_copy(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

std::string trim(std::string s) { return CLI::detail::trim_copy(s); }

void add_io(CLI::App* sub, Args& a) {
    sub->add_option("--out", a.out, "Write the JSON report to this path ('-' for standard output)");
    sub->add_option("--config", a.config, "Flat key = value file supplying defaults");
}

void add_schema(CLI::App* sub, Args& a) {
    sub->add_option("--data", a.data, "Input CSV with a header row")->required();
    sub->add_option("--outcome", a.outcome, "Outcome column")->required();
    sub->add_option("--treatment", a.treatment, "Treatment column")->required();
    sub->add_option("--mediators", a.mediators, "Comma-separated mediator columns")->required();
    sub->add_option("--covariates", a.covariates, "Comma-separated covariate columns, or all-remaining");
}

void add_engine(CLI::App* sub, Args& a) {
    sub->add_option("--folds", a.folds, "Cross-fitting folds K")->check(CLI::Range(2, 1000));
    sub->add_option("--splits", a.splits, "Independent fold splits S")->check(CLI::Range(1, 1000));
    sub->add_option("--trim-lower", a.trim_lower, "Lower propensity trim bound");
    sub->add_option("--trim-upper", a.trim_upper, "Upper propensity trim bound");
    sub->add_option("--alpha", a.alpha, "Test level")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--sidedness", a.sidedness, "two-sided or upper")
        ->check(CLI::IsMember({"two-sided", "upper"}));
}

void add_learner(CLI::App* sub, Args& a) {
    sub->add_option("--learner-family", a.learner_family, "Nuisance learner family")->check(CLI::IsMember({"lasso"}));
    sub->add_option("--learner-cv-folds", a.learner_cv_folds, "Folds for penalty selection")
        ->check(CLI::Range(2, 1000));
    sub->add_option("--learner-lambda", a.learner_lambda, "auto, or a comma-separated penalty grid");
    sub->add_option("--learner-standardize", a.learner_standardize, "Standardise features (true/false)");
}

void add_run(CLI::App* sub, Args& a) {
    sub->add_option("--seed", a.seed, "Master seed");
    sub->add_option("--threads", a.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

LearnerSpec learner_spec(const Args& a) {
    LearnerSpec spec;
    spec.cv_folds = a.learner_cv_folds;
    spec.standardize = a.learner_standardize;
    if (trim(a.learner_lambda) != "auto") {
        for (const std::string& item : split_list(a.learner_lambda)) {
            std::size_t used = 0;
            double value = 0.0;
            try {
                value = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != item.size() || !(value > 0.0))
                throw ArgumentError("--learner-lambda: '" + item + "' is not a positive number");
            spec.lambda_grid.push_back(value);
        }
        if (spec.lambda_grid.empty()) throw ArgumentError("--learner-lambda: empty grid");
        std::sort(spec.lambda_grid.rbegin(), spec.lambda_grid.rend());
    }
    spec.validate();
    return spec;
}

CrossfitOptions crossfit_options(const Args& a) {
    CrossfitOptions options;
    options.folds = a.folds;
    options.splits = a.splits;
    options.seed = a.seed;
    options.trim = TrimRule{a.trim_lower, a.trim_upper};
    options.trim.validate();
    options.sidedness = a.sidedness == "upper" ? Sidedness::upper : Sidedness::two_sided;
    return options;
}

Dataset load_data(const Args& a) {
    CsvSchema schema;
    schema.outcome = a.outcome;
    schema.treatment = a.treatment;
    schema.mediators = split_list(a.mediators);
    if (trim(a.covariates) == "all-remaining")
        schema.covariates_all_remaining = true;
    else
        schema.covariates = split_list(a.covariates);
    return load_csv(a.data, schema);
}

Json schema_json(const Args& a) {
    Json j;
    j["data"] = a.data;
    j["outcome"] = a.outcome;
    j["treatment"] = a.treatment;
    j["mediators"] = split_list(a.mediators);
    if (trim(a.covariates) == "all-remaining")
        j["covariates"] = "all-remaining";
    else
        j["covariates"] = split_list(a.covariates);
    return j;
}

Json engine_json(const Args& a) {
    Json j;
    j["folds"] = a.folds;
    j["splits"] = a.splits;
    j["trim_lower"] = a.trim_lower;
    j["trim_upper"] = a.trim_upper;
    j["alpha"] = a.alpha;
    j["sidedness"] = a.sidedness;
    j["seed"] = a.seed;
    return j;
}

Json learner_json(const Args& a) {
    Json j;
    j["family"] = a.learner_family;
    j["cv_folds"] = a.learner_cv_folds;
    j["lambda"] = trim(a.learner_lambda);
    j["standardize"] = a.learner_standardize;
    return j;
}

void emit_json(const Args& a, const Json& doc, std::ostream& out) {
    if (a.out.empty()) return;
    const std::string text = doc.dump(2) + "\n";
    if (a.out == "-") {
        out << text;
        return;
    }
    std::ofstream file(a.out, std::ios::binary);
    if (!file) throw ArgumentError("cannot write " + a.out);
    file << text;
    if (!file) throw ArgumentError("failed writing " + a.out);
}

std::string format_double(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

void print_result(const TestResult& r, double alpha, std::ostream& out) {
    out << "  theta      " << format_double(r.theta_hat) << '\n'
        << "  se         " << format_double(r.se) << '\n'
        << "  t          " << format_double(r.t_stat) << '\n'
        << "  p-value    " << format_double(r.p_value) << (r.sidedness == Sidedness::upper ? " (upper)" : "")
        << '\n'
        << "  n          " << r.n << " (effective " << r.n_effective << ")\n"
        << "  splits     " << std::max<std::size_t>(1, r.per_split.size()) << '\n'
        << "  decision   " << (r.p_value < alpha ? "reject" : "do not reject") << " at alpha = "
        << format_double(alpha) << '\n';
}

Json partition_json(const Dataset& data, const TreatmentPartition& part) {
    Json cells = Json::array();
    for (const auto& cell : part.cells) {
        Json labels = Json::array();
        for (int level : cell) labels.push_back(data.labels()[static_cast<std::size_t>(level)]);
        cells.push_back(std::move(labels));
    }
    return cells;
}

int cmd_test_ci(const Args& a, std::ostream& out) {
    const Dataset data = load_data(a);
    PartitionSpec ps;
    ps.method = parse_partition_method(a.partition);
    ps.c = a.partition_c;
    ps.cells = a.partition_cells;
    const TreatmentPartition part = partition_treatment(data, ps);
    const LearnerPair learners = LearnerPair::lasso(learner_spec(a));
    const TestResult r = test_ci(data, part, learners, crossfit_options(a));

    out << "Conditional independence test of " << a.outcome << " and " << a.treatment << " given mediators and "
        << "covariates\n"
        << "  partition  " << to_string(part.method) << ", " << part.size() << " cells\n";
    print_result(r, a.alpha, out);

    Json config;
    config["schema"] = schema_json(a);
    config["engine"] = engine_json(a);
    config["partition"] = {{"method", a.partition}, {"c", a.partition_c}, {"cells", a.partition_cells}};
    config["learner"] = learner_json(a);
    Json doc;
    doc["command"] = "test-ci";
    doc["config"] = std::move(config);
    doc["partition"] = partition_json(data, part);
    doc["result"] = to_json(r);
    doc["reject"] = r.p_value < a.alpha;
    emit_json(a, doc, out);
    return 0;
}

int cmd_test_bdfd(const Args& a, std::ostream& out) {
    const Dataset data = load_data(a);
    const LearnerPair learners = LearnerPair::lasso(learner_spec(a));
    const BdFdResult r = test_bdfd(data, learners, crossfit_options(a));

    out << "Back-door vs front-door test for " << a.outcome << " on " << a.treatment << '\n';
    print_result(r.result, a.alpha, out);
    out << "  level      q mean      zeta mean   zeta_fd mean\n";
    for (std::size_t d = 0; d < r.q_mean.size(); ++d) {
        char line[128];
        std::snprintf(line, sizeof line, "  %-10s %-11.5g %-11.5g %.5g\n", format_double(data.labels()[d]).c_str(),
                      r.q_mean[d], r.zeta_mean[d], r.zeta_fd_mean[d]);
        out << line;
    }

    Json config;
    config["schema"] = schema_json(a);
    config["engine"] = engine_json(a);
    config["learner"] = learner_json(a);
    Json doc;
    doc["command"] = "test-bdfd";
    doc["config"] = std::move(config);
    doc["levels"] = data.labels();
    doc["result"] = to_json(r);
    doc["reject"] = r.result.p_value < a.alpha;
    emit_json(a, doc, out);
    return 0;
}

int cmd_simulate(const Args& a, bool lambda_given, std::ostream& out) {
    DgpConfig dgp;
    dgp.n = a.n;
    dgp.p = a.p;
    dgp.delta = a.delta;
    dgp.gamma = a.gamma;
    dgp.seed = a.seed;
    if (a.dgp == 1) {
        if (lambda_given && a.lambda != 0.0) throw ArgumentError("--lambda applies to --dgp 2 only");
        dgp.lambda = 0.0;
    } else {
        dgp.lambda = lambda_given ? a.lambda : 0.25;
    }
    dgp.validate();
    if (a.reps < 1) throw ArgumentError("--reps must be positive");

    EngineParams engine;
    engine.learner = learner_spec(a);
    engine.crossfit = crossfit_options(a);
    engine.threads = a.threads;
    const TestKind kind = a.test == "bdfd" ? TestKind::bdfd : TestKind::ci;
    const McReport report = run_monte_carlo(dgp, a.reps, a.alpha, kind, engine);
    if (report.reps_completed == 0) throw InfeasibleError("every replication failed");

    out << "DGP" << a.dgp << " (delta " << format_double(dgp.delta) << ", gamma " << format_double(dgp.gamma)
        << ", lambda " << format_double(dgp.lambda) << "), p = " << dgp.p << ", " << a.test << " test, "
        << report.reps_completed << " of " << a.reps << " replications completed\n"
        << markdown_header() << '\n'
        << markdown_row(dgp.n, report) << '\n'
        << "mean effective n: " << format_double(report.mean_n_effective) << '\n';

    Json config;
    config["dgp"] = a.dgp;
    config["n"] = dgp.n;
    config["p"] = dgp.p;
    config["delta"] = dgp.delta;
    config["gamma"] = dgp.gamma;
    config["lambda"] = dgp.lambda;
    config["reps"] = a.reps;
    config["test"] = a.test;
    config["engine"] = engine_json(a);
    config["learner"] = learner_json(a);
    Json doc;
    doc["command"] = "simulate";
    doc["config"] = std::move(config);
    doc["report"] = to_json(report);
    doc["markdown"] = markdown_row(dgp.n, report);
    emit_json(a, doc, out);
    return 0;
}

int cmd_oracle_check(const Args& a, bool bdfd, std::ostream& out) {
    const JointTable joint = marginalize(load_population(a.population));
    const OracleCheck check = bdfd ? check_bdfd(joint) : check_ti(joint);
    const char* name = bdfd ? "BD=FD" : "TI";
    out << name << (check.holds ? " holds" : " fails") << " (max deviation " << format_double(check.deviation)
        << ")\n";
    Json doc;
    doc["command"] = bdfd ? "oracle check-bdfd" : "oracle check-ti";
    doc["config"] = {{"population", a.population}};
    doc["result"] = to_json(check);
    emit_json(a, doc, out);
    return 0;
}

int cmd_oracle_effects(const Args& a, std::ostream& out) {
    const DiscretePopulation pop = load_population(a.population);
    const EffectReport e = effects(pop);
    out << "ATE  " << format_double(e.ate) << '\n';
    for (std::size_t m = 0; m < e.cde.size(); ++m) out << "CDE(m=" << m << ")  " << format_double(e.cde[m]) << '\n';
    for (std::size_t d = 0; d < e.nde.size(); ++d)
        out << "NDE(M(" << d << "))  " << format_double(e.nde[d]) << "   NIE(d=" << d << ")  "
            << format_double(e.nie[d]) << '\n';
    Json doc;
    doc["command"] = "oracle effects";
    doc["config"] = {{"population", a.population}};
    doc["result"] = to_json(e);
    emit_json(a, doc, out);
    return 0;
}

int cmd_oracle_search(const Args& a, std::ostream& out) {
    CounterexampleSearch search;
    search.m_size = a.m_size;
    search.x_size = a.x_size;
    search.budget = a.budget;
    search.separable_only = a.separable_only;
    const CounterexampleResult r = find_bdfd_not_ti(search, a.seed);

    Json result;
    result["found"] = r.population.has_value();
    result["trials"] = r.trials;
    if (r.population) {
        out << "Found a population where BD=FD holds and TI fails after " << r.trials << " trials\n"
            << "  TI deviation     " << format_double(r.ti_deviation) << '\n'
            << "  BD=FD deviation  " << format_double(r.bdfd_deviation) << '\n';
        result["ti_deviation"] = r.ti_deviation;
        result["bdfd_deviation"] = r.bdfd_deviation;
        result["population"] = Json::parse(population_to_json(*r.population));
    } else {
        out << "No population with BD=FD but not TI found in " << r.trials << " trials (inconclusive)\n";
    }
    Json doc;
    doc["command"] = "oracle find-counterexample";
    doc["config"] = {{"m_size", a.m_size},
                     {"x_size", a.x_size},
                     {"budget", a.budget},
                     {"separable_only", a.separable_only},
                     {"seed", a.seed}};
    doc["result"] = std::move(result);
    emit_json(a, doc, out);
    return 0;
}

int cmd_verify_dags(const Args& a, std::ostream& out) {
    std::vector<TheoremSpec> specs;
    if (a.theorem == "1" || a.theorem == "all") specs.push_back(theorem1());
    if (a.theorem == "2" || a.theorem == "all") specs.push_back(theorem2());
    if (a.negative_control) specs.push_back(sanity_negative());

    Json results = Json::array();
    for (const TheoremSpec& spec : specs) {
        const VerificationReport report = verify_theorem(spec, a.list_counterexamples);
        out << spec.name << ": ";
        if (report.counterexample_count == 0)
            out << "no counterexample";
        else
            out << report.counterexample_count << " counterexample" << (report.counterexample_count > 1 ? "s" : "");
        out << " (" << report.premises_held << " of " << report.graphs_checked << " graphs satisfy the premises)\n";
        std::vector<Dag> shown;
        if (a.list_counterexamples)
            shown = report.counterexamples;
        else if (auto first = report.first())
            shown.push_back(*first);
        for (std::size_t k = 0; k < shown.size(); ++k) {
            out << "# counterexample " << k + 1 << '\n' << to_edge_list(shown[k]);
        }
        results.push_back(to_json(report, spec, a.list_counterexamples));
    }
    Json doc;
    doc["command"] = "verify-dags";
    doc["config"] = {{"theorem", a.theorem},
                     {"list_counterexamples", a.list_counterexamples},
                     {"negative_control", a.negative_control}};
    doc["results"] = std::move(results);
    emit_json(a, doc, out);
    return 0;
}

bool parse_bool(const std::string& key, const std::string& value) {
    std::string v = value;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ArgumentError("config key '" + key + "': expected a boolean, got '" + value + "'");
}

// Splices the config file's entries into the token list right after the
// subcommand path so that later (command-line) values win.
std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args) {
    CLI::App* sub = nullptr;
    std::size_t insert_at = 0;
    for (std::size_t k = 0; k < args.size(); ++k) {
        CLI::App* parent = sub ? sub : &app;
        CLI::App* next = nullptr;
        try {
            next = parent->get_subcommand(args[k]);
        } catch (const CLI::OptionNotFound&) {
            next = nullptr;
        }
        if (!next) {
            if (sub) break;
            continue;
        }
        sub = next;
        insert_at = k + 1;
    }

    std::string path;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) path = args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) path = args[k].substr(9);
    }
    if (path.empty() || !sub) return args;

    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot read config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    std::vector<std::string> injected;
    for (const auto& [key, value] : parse_config(buffer.str())) {
        CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
        if (!opt) throw ArgumentError("unknown config key '" + key + "' for " + sub->get_name());
        if (opt->get_items_expected_max() == 0) {
            if (parse_bool(key, value)) injected.push_back("--" + key);
        } else {
            injected.push_back("--" + key);
            injected.push_back(value);
        }
    }
    std::vector<std::string> merged(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(insert_at));
    merged.insert(merged.end(), injected.begin(), injected.end());
    merged.insert(merged.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_at), args.end());
    return merged;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config(const std::string& text) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ArgumentError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ArgumentError("config line " + std::to_string(line_no) + ": empty key");
        std::replace(key.begin(), key.end(), '.', '-');
        std::replace(key.begin(), key.end(), '_', '-');
        entries.emplace_back(std::move(key), std::move(value));
    }
    return entries;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Args a;
    CLI::App app{"Tests of full mediation and mediator exogeneity", "medtest"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    CLI::App* ci = app.add_subcommand("test-ci", "Conditional mean independence of outcome and treatment");
    add_schema(ci, a);
    add_engine(ci, a);
    ci->add_option("--partition", a.partition, "Treatment partition: discrete or quantile")
        ->check(CLI::IsMember({"discrete", "quantile"}));
    ci->add_option("--partition-c", a.partition_c, "Minimum cell probability (discrete)")->check(CLI::Range(0.0, 1.0));
    ci->add_option("--partition-cells", a.partition_cells, "Number of cells (quantile)")->check(CLI::Range(2, 1000));
    add_learner(ci, a);
    add_run(ci, a);
    add_io(ci, a);

    CLI::App* bdfd = app.add_subcommand("test-bdfd", "Back-door vs front-door overidentification test");
    add_schema(bdfd, a);
    add_engine(bdfd, a);
    add_learner(bdfd, a);
    add_run(bdfd, a);
    add_io(bdfd, a);

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo study on the simulation designs");
    sim->add_option("--dgp", a.dgp, "Design 1 or 2")->check(CLI::IsMember({1, 2}));
    sim->add_option("--n", a.n, "Sample size")->check(CLI::Range(10LL, 100000000LL));
    sim->add_option("--p", a.p, "Number of covariates")->check(CLI::Range(1LL, 100000LL));
    sim->add_option("--delta", a.delta, "Mediator endogeneity");
    sim->add_option("--gamma", a.gamma, "Direct effect");
    CLI::Option* lambda_opt = sim->add_option("--lambda", a.lambda, "Treatment-mediator confounding (design 2)");
    sim->add_option("--reps", a.reps, "Replications")->check(CLI::Range(1LL, 100000000LL));
    sim->add_option("--test", a.test, "ci or bdfd")->check(CLI::IsMember({"ci", "bdfd"}));
    add_engine(sim, a);
    add_learner(sim, a);
    add_run(sim, a);
    add_io(sim, a);

    CLI::App* oracle = app.add_subcommand("oracle", "Exact computations on discrete populations");
    oracle->require_subcommand(1);
    CLI::App* check_ti_cmd = oracle->add_subcommand("check-ti", "Does (TI) hold in the population?");
    CLI::App* check_bdfd_cmd = oracle->add_subcommand("check-bdfd", "Does (BD=FD) hold in the population?");
    CLI::App* effects_cmd = oracle->add_subcommand("effects", "Total, controlled, natural direct and indirect effects");
    for (CLI::App* cmd : {check_ti_cmd, check_bdfd_cmd, effects_cmd}) {
        cmd->add_option("--population", a.population, "Population definition (JSON)")->required();
        add_io(cmd, a);
    }
    CLI::App* search_cmd =
        oracle->add_subcommand("find-counterexample", "Search for a population where BD=FD holds but TI fails");
    search_cmd->add_option("--m-size", a.m_size, "Mediator support size")->check(CLI::Range(2, 4));
    search_cmd->add_option("--x-size", a.x_size, "Covariate support size")->check(CLI::Range(1, 4));
    search_cmd->add_option("--budget", a.budget, "Maximum trials")->check(CLI::Range(1L, 1000000000L));
    search_cmd->add_option("--seed", a.seed, "Search seed");
    search_cmd->add_flag("--separable-only", a.separable_only, "Restrict to separable outcome kernels");
    add_io(search_cmd, a);

    CLI::App* dags = app.add_subcommand("verify-dags", "Exhaustive check of the graphical theorems");
    dags->add_option("--theorem", a.theorem, "1, 2 or all")->check(CLI::IsMember({"1", "2", "all"}));
    dags->add_flag("--list-counterexamples", a.list_counterexamples, "Print every counterexample");
    dags->add_flag("--negative-control", a.negative_control,
                   "Also check Theorem 1 without mediator exogeneity, which must fail");
    add_io(dags, a);

    try {
        std::vector<std::string> tokens = apply_config(app, args);
        std::vector<const char*> argv{"medtest"};
        for (const std::string& t : tokens) argv.push_back(t.c_str());
        try {
            app.parse(static_cast<int>(argv.size()), argv.data());
        } catch (const CLI::ParseError& e) {
            return app.exit(e, out, err) == 0 ? 0 : 1;
        }

        if (ci->parsed()) return cmd_test_ci(a, out);
        if (bdfd->parsed()) return cmd_test_bdfd(a, out);
        if (sim->parsed()) return cmd_simulate(a, lambda_opt->count() > 0, out);
        if (check_ti_cmd->parsed()) return cmd_oracle_check(a, false, out);
        if (check_bdfd_cmd->parsed()) return cmd_oracle_check(a, true, out);
        if (effects_cmd->parsed()) return cmd_oracle_effects(a, out);
        if (search_cmd->parsed()) return cmd_oracle_search(a, out);
        if (dags->parsed()) return cmd_verify_dags(a, out);
        return 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 1;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(args, std::cout, std::cerr);
}

}  // namespace medtest::cli
