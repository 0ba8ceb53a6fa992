// Acceptance suite: every release criterion checked at its stated tolerance,
// one pass/fail line each. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "bidsim/pipeline.hpp"
#include "bidsim/rng.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace bidsim;
using test::random_dataset;
using test::random_theta;
using test::TempDir;

namespace {

int g_failures = 0;

void report(int id, bool passed, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", passed ? "PASS" : "FAIL", id, detail.c_str());
    if (!passed) {
        ++g_failures;
    }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, args);
    va_end(args);
    return buf;
}

// the acceptance seed: picked once so the statistical criteria run on a
// fixed, reproducible stream
constexpr std::uint64_t kSeed = 60;

// independent finite-difference oracle, evaluated in long double so the
// difference quotient's rounding noise (~1e-13) stays far below the 1e-6 gate
long double fd_cost(const Theta& theta, const TrainingSet& data) {
    long double sum = 0.0L;
    for (const Sample& s : data.samples) {
        long double z = theta.bias;
        for (std::size_t j = 0; j < s.x.slots.size(); ++j) {
            if (s.x.slots[j]) {
                z += theta.weights[j];
            }
        }
        const long double y = s.y;
        sum += z > 0.0L ? (1.0L - y) * z + std::log1p(std::exp(-z))
                        : -y * z + std::log1p(std::exp(z));
    }
    return sum / static_cast<long double>(data.size());
}

void criterion_gradient() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(101);
    const double h = 1e-6;
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const TrainingSet data = random_dataset(rng, 50, 15);
        Theta theta = random_theta(rng, 15, 2.0);
        const std::vector<double> g = gradient(theta, data, 0.0);
        for (std::size_t k = 0; k <= 15; ++k) {
            double* coord = k == 0 ? &theta.bias : &theta.weights[k - 1];
            const double saved = *coord;
            *coord = saved + h;
            const long double up = fd_cost(theta, data);
            *coord = saved - h;
            const long double down = fd_cost(theta, data);
            *coord = saved;
            const double fd = static_cast<double>((up - down) / (2.0L * h));
            // coordinates below 1e-6 are held to 1e-12 absolute agreement
            worst = std::max(worst, std::fabs(g[k] - fd) / std::max(std::fabs(fd), 1e-6));
        }
    }
    const double elapsed = seconds_since(start);
    report(1, worst <= 1e-6 && elapsed < 1.0,
           fmt("gradient matches central finite differences on 20 instances "
               "(max rel err %.2e, %.3f s)", worst, elapsed));
}

void criterion_cost_identity() {
    Rng rng(102);
    double worst = 0.0;
    for (int i = 0; i < 10; ++i) {
        const std::size_t n = 1 + rng.index(20);
        const std::size_t m = 1 + rng.index(200);
        const TrainingSet data = random_dataset(rng, m, n);
        const Theta zero{0.0, std::vector<double>(n, 0.0)};
        worst = std::max(worst, std::fabs(cost(zero, data, 0.0) - std::log(2.0)));
    }
    report(2, worst <= 1e-12,
           fmt("cost at the zero vector equals ln 2 on 10 datasets (max abs err %.2e)", worst));
}

void criterion_decision_rule() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(103);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Theta theta = random_theta(rng, 4, 4.0);
        for (std::uint32_t bits = 0; bits < 16u; ++bits) {
            FeatureVector x;
            x.slots.resize(4);
            double z = theta.bias;
            for (std::size_t k = 0; k < 4; ++k) {
                x.slots[k] = (bits >> k) & 1u;
                if (x.slots[k]) {
                    z += theta.weights[k];
                }
            }
            if (predict(theta, x) != (z >= 0.0 ? 1 : 0)) {
                ++mismatches;
            }
        }
    }
    const double elapsed = seconds_since(start);
    report(3, mismatches == 0 && elapsed < 1.0,
           fmt("predict equals the sign test on all 16 windows x 100 thetas "
               "(%zu mismatches, %.3f s)", mismatches, elapsed));
}

void criterion_markov_bound() {
    const auto start = std::chrono::steady_clock::now();
    const DelayStats reference =
        delay_stats_from_samples({2.5810, 0.5226, 0.2664, 0.2391, 0.1329, 0.0354, 0.0230});
    const MarkovBound bound = verify_bound(reference, 1000.0);
    const bool mean_ok = std::fabs(reference.mean_us - 0.5429) <= 1e-4;
    const bool bound_ok = std::fabs(bound.bound - 5.429e-4) <= 1e-7;

    Rng rng(104);
    std::size_t violations = 0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> samples(1 + rng.index(200));
        const int family = i % 3;
        for (auto& s : samples) {
            const double u = rng.uniform();
            if (family == 0) {
                s = -std::log(1.0 - u) * rng.uniform(0.1, 40.0);
            } else if (family == 1) {
                s = rng.uniform(0.0, 80.0);
            } else {
                s = 0.5 * std::pow(1.0 - u, -1.0 / rng.uniform(1.1, 3.0));
            }
        }
        const DelayStats stats = delay_stats_from_samples(samples);
        const double d_max = rng.uniform(1e-6, 3.0 * stats.mean_us + 1.0);
        if (!verify_bound(stats, d_max).holds) {
            ++violations;
        }
    }
    const double elapsed = seconds_since(start);
    report(4, mean_ok && bound_ok && violations == 0 && elapsed < 5.0,
           fmt("markov bound: mean %.6f us, bound %.4e at D_max 1 ms, "
               "%zu/1000 sweep violations (%.3f s)", reference.mean_us, bound.bound,
               violations, elapsed));
}

void criterion_utilization_band() {
    bool ok = true;
    std::string shares;
    for (std::size_t tests : {1000u, 5000u, 10000u}) {
        TempDir dir("acc_util");
        RunConfig config;
        config.generator = calibrated_default_generator(kSeed);
        config.test_samples = tests;
        config.output_dir = dir.str();
        const RunSummary summary = simulate(config);
        const UtilizationReport& u = summary.utilization;
        ok = ok && u.share_c + u.share_d == 100.0;  // exact complement in raw arithmetic
        ok = ok && u.overall == 100.0;
        ok = ok && u.share_c >= 55.0 && u.share_c <= 65.0;
        ok = ok && u.count_c + u.count_d == tests;
        shares += fmt(" %zu:%.2f%%", tests, u.share_c);
    }
    report(5, ok, "utilization: shares sum to 100.00 exactly and share_C stays in [55, 65] at" + shares);
}

void criterion_oracle_accuracy() {
    const auto start = std::chrono::steady_clock::now();
    const GeneratorSpec spec = calibrated_default_generator(kSeed);
    const std::size_t window = 15;
    const std::size_t train_n = 1000;
    const std::size_t test_n = 10000;
    const OutcomeHistory history = generate(spec, window + train_n + test_n);
    const TrainingSet all = featurize(history, window);
    TrainingSet train_set;
    train_set.samples.assign(all.samples.begin(),
                             all.samples.begin() + static_cast<std::ptrdiff_t>(train_n));
    const auto [theta, train_report] = train(train_set, {});
    std::size_t oracle_hits = 0;
    std::size_t model_hits = 0;
    std::size_t total = 0;
    for (std::size_t k = train_n; k < all.size(); ++k) {
        oracle_hits += bayes_predict(spec, all.samples[k].x) == all.samples[k].y;
        model_hits += predict(theta, all.samples[k].x) == all.samples[k].y;
        ++total;
    }
    const double oracle_acc = 100.0 * static_cast<double>(oracle_hits) / static_cast<double>(total);
    const double model_acc = 100.0 * static_cast<double>(model_hits) / static_cast<double>(total);
    const double elapsed = seconds_since(start);
    const bool ok = train_report.converged && oracle_acc >= 90.0 && oracle_acc <= 92.0 &&
                    std::fabs(model_acc - oracle_acc) <= 2.0 && elapsed < 10.0;
    report(6, ok,
           fmt("oracle accuracy %.2f%% in [90, 92], trained model %.2f%% within 2 points "
               "(m=1000, test 10000, %.3f s)", oracle_acc, model_acc, elapsed));
}

void criterion_determinism() {
    TempDir dir_a("acc_det_a");
    TempDir dir_b("acc_det_b");
    RunConfig config;
    config.generator = calibrated_default_generator(kSeed);
    config.output_dir = dir_a.str();
    simulate(config);
    config.output_dir = dir_b.str();
    simulate(config);

    std::ifstream in_a(dir_a.path() / "summary.json");
    std::ifstream in_b(dir_b.path() / "summary.json");
    nlohmann::json doc_a = nlohmann::json::parse(in_a);
    nlohmann::json doc_b = nlohmann::json::parse(in_b);
    // output_dir differs by construction; determinism is about the rest
    doc_a.at("config").erase("output_dir");
    doc_b.at("config").erase("output_dir");
    for (const std::string& key : summary_timing_fields()) {
        doc_a.erase(key);
        doc_b.erase(key);
    }
    report(7, doc_a.dump() == doc_b.dump(),
           "two simulate runs agree on summary.json outside the timing fields");
}

void criterion_delay_trend() {
    const std::vector<std::size_t> sweep = {10, 50, 100, 500, 1000, 5000, 10000};
    const int repeats = 7;
    TempDir dir("acc_bench");
    RunConfig config;
    config.generator = calibrated_default_generator(kSeed);
    config.test_samples = 1;
    config.output_dir = dir.str();

    std::vector<std::vector<double>> avgs(sweep.size());
    for (int r = 0; r < repeats; ++r) {
        const auto rows = bench(config, sweep);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            avgs[i].push_back(rows[i].avg_per_request_us);
        }
    }
    std::vector<double> median(sweep.size());
    std::vector<double> noise(sweep.size());
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        std::vector<double> v = avgs[i];
        std::sort(v.begin(), v.end());
        median[i] = v[v.size() / 2];
        double mean = 0.0;
        for (double x : v) {
            mean += x;
        }
        mean /= static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) {
            var += (x - mean) * (x - mean);
        }
        var /= static_cast<double>(v.size() - 1);
        noise[i] = std::max(std::sqrt(var), 1e-4);  // floor at 0.1 ns
    }
    bool ok = true;
    for (std::size_t i = 0; i + 1 < sweep.size(); ++i) {
        if (median[i + 1] > median[i] + 2.0 * (noise[i] + noise[i + 1])) {
            ok = false;
        }
    }
    std::string curve;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        curve += fmt(" %.4f", median[i]);
    }
    report(8, ok, "per-request delay is non-increasing within 2x noise across the sweep"
           " (medians us:" + curve + ")");
}

}  // namespace

int main() {
    criterion_gradient();
    criterion_cost_identity();
    criterion_decision_rule();
    criterion_markov_bound();
    criterion_utilization_band();
    criterion_oracle_accuracy();
    criterion_determinism();
    criterion_delay_trend();
    std::printf("ACCEPTANCE: %d/8 criteria passed\n", 8 - g_failures);
    return g_failures == 0 ? 0 : 1;
}
