#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bidsim/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitWarning = 1;  // property failure or non-convergent training
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t window = 0;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
    double d_max_us = 0.0;
    std::string generator;
    std::string out_dir;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* window_opt = nullptr;
    CLI::Option* train_opt = nullptr;
    CLI::Option* test_opt = nullptr;
    CLI::Option* dmax_opt = nullptr;
    CLI::Option* gen_opt = nullptr;
    CLI::Option* out_opt = nullptr;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON config file; flags override its fields");
    f.seed_opt = cmd->add_option("--seed", f.seed, "generator seed");
    f.window_opt = cmd->add_option("--window", f.window, "encounter window length n");
    f.train_opt = cmd->add_option("--train-samples", f.train_samples, "training sample count");
    f.test_opt = cmd->add_option("--test-samples", f.test_samples, "test request count");
    f.dmax_opt = cmd->add_option("--dmax-us", f.d_max_us, "delay threshold D_max in microseconds");
    f.gen_opt = cmd->add_option("--generator", f.generator,
                                "iid:p | logistic:path-to-theta.json | markov:p1,p2");
    f.out_opt = cmd->add_option("--out", f.out_dir, "output directory");
}

bidsim::GeneratorSpec parse_generator(const std::string& text, std::uint64_t seed, std::size_t window) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    bidsim::GeneratorSpec spec;
    spec.seed = seed;
    if (kind == "iid") {
        spec.process = bidsim::IidSpec{std::stod(arg)};
    } else if (kind == "logistic") {
        if (arg.empty()) {
            // bare "logistic" selects the calibrated default parameters
            spec.process = bidsim::LogisticTruthSpec{bidsim::calibrated_default_theta(window)};
        } else {
            std::ifstream in(arg);
            if (!in) {
                throw std::invalid_argument("cannot open theta file " + arg);
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            spec.process = bidsim::LogisticTruthSpec{bidsim::theta_from_json(buf.str())};
        }
    } else if (kind == "markov") {
        const auto comma = arg.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("markov generator needs two probabilities: markov:p1,p2");
        }
        spec.process = bidsim::MarkovPersistenceSpec{std::stod(arg.substr(0, comma)),
                                                     std::stod(arg.substr(comma + 1))};
    } else {
        throw std::invalid_argument("unknown generator '" + kind +
                                    "' (expected iid:p, logistic:path or markov:p1,p2)");
    }
    return spec;
}

bidsim::RunConfig build_config(const CommonFlags& f) {
    bidsim::RunConfig config;
    bool have_config_file = false;
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        if (!in) {
            throw std::invalid_argument("cannot open config file " + f.config_path);
        }
        std::ostringstream buf;
        buf << in.rdbuf();
        config = bidsim::config_from_json(buf.str());
        have_config_file = true;
    }
    if (f.window_opt->count() > 0) {
        config.window = f.window;
        // the default generator's parameter count follows the window
        if (!have_config_file && f.gen_opt->count() == 0) {
            config.generator = bidsim::calibrated_default_generator(config.generator.seed, config.window);
        }
    }
    if (f.seed_opt->count() > 0) {
        config.generator.seed = f.seed;
    }
    if (f.gen_opt->count() > 0) {
        config.generator = parse_generator(f.generator, config.generator.seed, config.window);
    }
    if (f.train_opt->count() > 0) {
        config.train_samples = f.train_samples;
    }
    if (f.test_opt->count() > 0) {
        config.test_samples = f.test_samples;
    }
    if (f.dmax_opt->count() > 0) {
        config.d_max_us = f.d_max_us;
    }
    if (f.out_opt->count() > 0) {
        config.output_dir = f.out_dir;
    }
    return config;
}

int run_simulate(const CommonFlags& flags) {
    bidsim::RunConfig config;
    try {
        config = build_config(flags);
        bidsim::validate(config);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    const bidsim::RunSummary summary = bidsim::simulate(config);
    std::printf("requests        %zu\n", summary.utilization.n_requests);
    std::printf("accuracy        %.2f %%\n", summary.accuracy.accuracy);
    std::printf("utilization C/D %.2f / %.2f %% (overall %.2f %%)\n", summary.utilization.share_c,
                summary.utilization.share_d, summary.utilization.overall);
    std::printf("mean delay      %.4f us  (bound at D_max=%.0f us: %.3e, tail %.3e, holds: %s)\n",
                summary.delay.mean_us, summary.bound.d_max_us, summary.bound.bound,
                summary.bound.empirical_tail, summary.bound.holds ? "yes" : "no");
    std::printf("reports written to %s\n", config.output_dir.c_str());
    if (!summary.train_report.converged) {
        std::cerr << "warning: training stopped at max_iterations without reaching the gradient tolerance\n";
        return kExitWarning;
    }
    return kExitOk;
}

int run_bench(const CommonFlags& flags, const std::vector<std::size_t>& sweep) {
    bidsim::RunConfig config;
    std::vector<bidsim::DelayTableRow> rows;
    try {
        config = build_config(flags);
        bidsim::validate(config);
        if (sweep.empty()) {
            throw std::invalid_argument("sweep must not be empty");
        }
        rows = bidsim::bench(config, sweep);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    std::printf("%10s  %14s  %22s\n", "n", "total_us", "avg_per_request_us");
    for (const auto& row : rows) {
        std::printf("%10zu  %14.4f  %22.4f\n", row.n_requests, row.total_us, row.avg_per_request_us);
    }
    std::printf("table written to %s/delays.csv\n", config.output_dir.c_str());
    return kExitOk;
}

int run_verify(std::uint64_t seed) {
    const auto results = bidsim::run_property_suite(seed);
    std::size_t passed = 0;
    for (const auto& r : results) {
        std::printf("[%s] %s (%s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        if (r.passed) {
            ++passed;
        }
    }
    std::printf("%zu/%zu properties passed (seed %llu)\n", passed, results.size(),
                static_cast<unsigned long long>(seed));
    return passed == results.size() ? kExitOk : kExitWarning;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bidsim - two-player resource bidding simulator with a learned winner predictor"};
    app.require_subcommand(1);

    CommonFlags sim_flags;
    CLI::App* sim = app.add_subcommand("simulate", "run the full pipeline and write reports");
    add_common_flags(sim, sim_flags);

    CommonFlags bench_flags;
    std::vector<std::size_t> sweep = {10, 50, 100, 500, 1000, 5000, 10000};
    CLI::App* bench_cmd = app.add_subcommand("bench", "measure the per-request delay table");
    add_common_flags(bench_cmd, bench_flags);
    bench_cmd->add_option("--sweep", sweep, "request counts to measure")->delimiter(',');

    std::uint64_t verify_seed = 1;
    CLI::App* verify_cmd = app.add_subcommand("verify", "run the self-check property suite");
    verify_cmd->add_option("--seed", verify_seed, "seed for the randomized properties");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (sim->parsed()) {
            return run_simulate(sim_flags);
        }
        if (bench_cmd->parsed()) {
            return run_bench(bench_flags, sweep);
        }
        return run_verify(verify_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitWarning;
    }
}
