#include "bidsim/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bidsim {

namespace {

using nlohmann::json;

json generator_to_json(const GeneratorSpec& spec) {
    json doc;
    if (const auto* iid = std::get_if<IidSpec>(&spec.process)) {
        doc["variant"] = "iid";
        doc["p"] = iid->p_c_win;
    } else if (const auto* logi = std::get_if<LogisticTruthSpec>(&spec.process)) {
        doc["variant"] = "logistic";
        doc["theta"] = json::parse(theta_to_json(logi->theta_star));
    } else {
        const auto& mk = std::get<MarkovPersistenceSpec>(spec.process);
        doc["variant"] = "markov";
        doc["p_repeat_after_c_win"] = mk.p_repeat_after_c_win;
        doc["p_c_win_after_d_win"] = mk.p_c_win_after_d_win;
    }
    return doc;
}

GeneratorSpec generator_from_json(const json& doc, std::uint64_t seed) {
    if (!doc.is_object() || !doc.contains("variant")) {
        throw std::invalid_argument("generator: missing variant");
    }
    GeneratorSpec spec;
    spec.seed = seed;
    const std::string variant = doc.at("variant").get<std::string>();
    if (variant == "iid") {
        spec.process = IidSpec{doc.at("p").get<double>()};
    } else if (variant == "logistic") {
        spec.process = LogisticTruthSpec{theta_from_json(doc.at("theta").dump())};
    } else if (variant == "markov") {
        spec.process = MarkovPersistenceSpec{doc.at("p_repeat_after_c_win").get<double>(),
                                             doc.at("p_c_win_after_d_win").get<double>()};
    } else {
        throw std::invalid_argument("generator: unknown variant '" + variant + "'");
    }
    return spec;
}

json summary_to_json_doc(const RunSummary& s) {
    json doc;
    doc["config"] = json::parse(config_to_json(s.config_echo));
    doc["theta"] = json::parse(theta_to_json(s.theta));
    doc["train_report"] = {{"iterations", s.train_report.iterations},
                           {"final_cost", s.train_report.final_cost},
                           {"final_grad_norm", s.train_report.final_grad_norm},
                           {"converged", s.train_report.converged}};
    doc["accuracy"] = {{"correct", s.accuracy.correct},
                       {"total", s.accuracy.total},
                       {"accuracy_pct", s.accuracy.accuracy}};
    doc["utilization"] = {{"count_c", s.utilization.count_c},
                          {"count_d", s.utilization.count_d},
                          {"n_requests", s.utilization.n_requests},
                          {"share_c_pct", s.utilization.share_c},
                          {"share_d_pct", s.utilization.share_d},
                          {"overall_pct", s.utilization.overall}};
    doc["delay"] = {{"n_requests", s.delay.n_requests},
                    {"total_us", s.delay.total_us},
                    {"avg_per_request_us", s.delay.mean_us},
                    {"samples_us", s.delay.samples_us}};
    doc["delay_bound"] = json::parse(bound_to_json(s.bound));
    doc["nondeterministic_fields"] = summary_timing_fields();
    return doc;
}

}  // namespace

const std::vector<std::string>& summary_timing_fields() {
    static const std::vector<std::string> fields = {"delay", "delay_bound"};
    return fields;
}

void validate(const RunConfig& config) {
    if (config.window < 1) {
        throw std::invalid_argument("window must be >= 1");
    }
    if (config.train_samples < config.window + 1) {
        throw std::invalid_argument("train_samples must be >= window + 1");
    }
    if (config.test_samples < 1) {
        throw std::invalid_argument("test_samples must be >= 1");
    }
    if (!(config.d_max_us > 0.0)) {
        throw std::invalid_argument("d_max_us must be > 0");
    }
    if (!(config.train.grad_tolerance > 0.0)) {
        throw std::invalid_argument("grad_tolerance must be > 0");
    }
    if (config.train.max_iterations < 1) {
        throw std::invalid_argument("max_iterations must be >= 1");
    }
    if (config.train.l2_penalty < 0.0) {
        throw std::invalid_argument("l2_penalty must be >= 0");
    }
    if (const auto* logi = std::get_if<LogisticTruthSpec>(&config.generator.process)) {
        if (logi->theta_star.size() != config.window) {
            throw std::invalid_argument("logistic generator theta length must equal the window");
        }
    }
    if (config.output_dir.empty()) {
        throw std::invalid_argument("output_dir must not be empty");
    }
}

RunSummary simulate(const RunConfig& config) {
    validate(config);

    const std::size_t total_outcomes = config.window + config.train_samples + config.test_samples;
    const OutcomeHistory history = generate(config.generator, total_outcomes);
    const TrainingSet all = featurize(history, config.window);

    // chronological cut: the first train_samples windows train, the rest test
    TrainingSet train_set;
    train_set.samples.assign(all.samples.begin(),
                             all.samples.begin() + static_cast<std::ptrdiff_t>(config.train_samples));
    TrainingSet test_set;
    test_set.samples.assign(all.samples.begin() + static_cast<std::ptrdiff_t>(config.train_samples),
                            all.samples.end());

    auto [theta, train_report] = train(train_set, config.train);

    // closed loop over the test stream; the window advances on the actual
    // outcome, never on the prediction
    std::vector<AllocationDecision> decisions;
    decisions.reserve(test_set.size());
    FeatureVector window = test_set.samples.front().x;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        AllocationDecision decision = resolve_bid(theta, window);
        decision.request_index = i;
        decision.actual_winner = test_set.samples[i].y;
        decisions.push_back(decision);
        window = advance_window(window, test_set.samples[i].y);
    }

    std::vector<FeatureVector> test_windows;
    test_windows.reserve(test_set.size());
    for (const Sample& s : test_set.samples) {
        test_windows.push_back(s.x);
    }

    RunSummary summary;
    summary.config_echo = config;
    summary.theta = theta;
    summary.train_report = train_report;
    summary.utilization = utilization(decisions);
    summary.accuracy = accuracy(decisions);
    summary.delay = time_predictions(theta, test_windows);
    summary.bound = verify_bound(summary.delay, config.d_max_us);

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "summary.json");
        if (!out) {
            throw std::runtime_error("cannot open " + (dir / "summary.json").string() + " for writing");
        }
        out << summary_to_json(summary) << '\n';
    }
    write_utilization_csv((dir / "utilization.csv").string(), summary.utilization);
    write_decisions_csv((dir / "decisions.csv").string(), decisions);
    write_delay_csv((dir / "delays.csv").string(),
                    {{summary.delay.n_requests, summary.delay.total_us, summary.delay.mean_us}});
    return summary;
}

std::vector<DelayTableRow> bench(const RunConfig& config, const std::vector<std::size_t>& sweep) {
    validate(config);
    if (sweep.empty()) {
        throw std::invalid_argument("sweep must not be empty");
    }
    for (std::size_t n : sweep) {
        if (n < 1) {
            throw std::invalid_argument("sweep counts must be >= 1");
        }
    }

    const std::size_t max_n = *std::max_element(sweep.begin(), sweep.end());
    const std::size_t total_outcomes = config.window + config.train_samples + max_n;
    const OutcomeHistory history = generate(config.generator, total_outcomes);
    const TrainingSet all = featurize(history, config.window);

    TrainingSet train_set;
    train_set.samples.assign(all.samples.begin(),
                             all.samples.begin() + static_cast<std::ptrdiff_t>(config.train_samples));
    auto [theta, train_report] = train(train_set, config.train);
    (void)train_report;

    std::vector<FeatureVector> pool;
    pool.reserve(max_n);
    for (std::size_t i = config.train_samples; i < all.size(); ++i) {
        pool.push_back(all.samples[i].x);
    }

    std::vector<DelayTableRow> rows;
    rows.reserve(sweep.size());
    for (std::size_t n : sweep) {
        // untimed warm-up so cold caches do not inflate the small rows
        volatile int sink = 0;
        for (std::size_t i = 0; i < std::min<std::size_t>(n, 256); ++i) {
            sink = sink + predict(theta, pool[i % pool.size()]);
        }
        std::vector<FeatureVector> windows(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
        const DelayStats stats = time_predictions(theta, windows);
        rows.push_back({n, stats.total_us, stats.mean_us});
    }

    const std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    write_delay_csv((dir / "delays.csv").string(), rows);
    return rows;
}

std::string config_to_json(const RunConfig& config) {
    json doc;
    doc["seed"] = config.generator.seed;
    doc["generator"] = generator_to_json(config.generator);
    doc["window"] = config.window;
    doc["train_samples"] = config.train_samples;
    doc["test_samples"] = config.test_samples;
    doc["d_max_us"] = config.d_max_us;
    doc["train"] = {{"grad_tolerance", config.train.grad_tolerance},
                    {"max_iterations", config.train.max_iterations},
                    {"l2_penalty", config.train.l2_penalty}};
    doc["output_dir"] = config.output_dir;
    return doc.dump(2);
}

RunConfig config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    RunConfig config;
    try {
        const auto seed = doc.value("seed", config.generator.seed);
        if (doc.contains("window")) {
            config.window = doc.at("window").get<std::size_t>();
        }
        if (doc.contains("generator")) {
            config.generator = generator_from_json(doc.at("generator"), seed);
        } else {
            config.generator = calibrated_default_generator(seed, config.window);
        }
        if (doc.contains("train_samples")) {
            config.train_samples = doc.at("train_samples").get<std::size_t>();
        }
        if (doc.contains("test_samples")) {
            config.test_samples = doc.at("test_samples").get<std::size_t>();
        }
        if (doc.contains("d_max_us")) {
            config.d_max_us = doc.at("d_max_us").get<double>();
        }
        if (doc.contains("train")) {
            const json& t = doc.at("train");
            config.train.grad_tolerance = t.value("grad_tolerance", config.train.grad_tolerance);
            config.train.max_iterations = t.value("max_iterations", config.train.max_iterations);
            config.train.l2_penalty = t.value("l2_penalty", config.train.l2_penalty);
        }
        if (doc.contains("output_dir")) {
            config.output_dir = doc.at("output_dir").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config field has the wrong type: ") + e.what());
    }
    return config;
}

std::string summary_to_json(const RunSummary& summary) {
    return summary_to_json_doc(summary).dump(2);
}

RunSummary summary_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("summary is not valid JSON: ") + e.what());
    }
    RunSummary s;
    try {
        s.config_echo = config_from_json(doc.at("config").dump());
        s.theta = theta_from_json(doc.at("theta").dump());
        const json& tr = doc.at("train_report");
        s.train_report.iterations = tr.at("iterations").get<std::size_t>();
        s.train_report.final_cost = tr.at("final_cost").get<double>();
        s.train_report.final_grad_norm = tr.at("final_grad_norm").get<double>();
        s.train_report.converged = tr.at("converged").get<bool>();
        const json& acc = doc.at("accuracy");
        s.accuracy.correct = acc.at("correct").get<std::size_t>();
        s.accuracy.total = acc.at("total").get<std::size_t>();
        s.accuracy.accuracy = acc.at("accuracy_pct").get<double>();
        const json& util = doc.at("utilization");
        s.utilization.count_c = util.at("count_c").get<std::size_t>();
        s.utilization.count_d = util.at("count_d").get<std::size_t>();
        s.utilization.n_requests = util.at("n_requests").get<std::size_t>();
        s.utilization.share_c = util.at("share_c_pct").get<double>();
        s.utilization.share_d = util.at("share_d_pct").get<double>();
        s.utilization.overall = util.at("overall_pct").get<double>();
        const json& delay = doc.at("delay");
        s.delay.n_requests = delay.at("n_requests").get<std::size_t>();
        s.delay.total_us = delay.at("total_us").get<double>();
        s.delay.mean_us = delay.at("avg_per_request_us").get<double>();
        s.delay.samples_us = delay.at("samples_us").get<std::vector<double>>();
        const json& bound = doc.at("delay_bound");
        s.bound.d_max_us = bound.at("d_max_us").get<double>();
        s.bound.mean_us = bound.at("mean_us").get<double>();
        s.bound.bound = bound.at("bound").get<double>();
        s.bound.bound_clipped = bound.at("bound_clipped").get<double>();
        s.bound.empirical_tail = bound.at("empirical_tail").get<double>();
        s.bound.holds = bound.at("holds").get<bool>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("summary field missing or mistyped: ") + e.what());
    }
    return s;
}

}  // namespace bidsim
