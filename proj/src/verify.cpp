#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "bidsim/pipeline.hpp"
#include "bidsim/rng.hpp"

namespace bidsim {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

FeatureVector random_window(Rng& rng, std::size_t n) {
    FeatureVector x;
    x.slots.resize(n);
    for (auto& s : x.slots) {
        s = rng.bernoulli(0.5) ? 1 : 0;
    }
    return x;
}

Theta random_theta(Rng& rng, std::size_t n, double scale) {
    Theta theta;
    theta.bias = rng.uniform(-scale, scale);
    theta.weights.resize(n);
    for (auto& w : theta.weights) {
        w = rng.uniform(-scale, scale);
    }
    return theta;
}

TrainingSet random_dataset(Rng& rng, std::size_t m, std::size_t n) {
    TrainingSet set;
    set.samples.resize(m);
    for (auto& s : set.samples) {
        s.x = random_window(rng, n);
        s.y = rng.bernoulli(0.5) ? 1 : 0;
    }
    return set;
}

PropertyResult sigmoid_shape(std::uint64_t) {
    double worst = 0.0;
    double prev = -1.0;
    bool increasing = true;
    for (double z = -30.0; z <= 30.0; z += 0.25) {
        worst = std::max(worst, std::fabs(sigmoid(z) + sigmoid(-z) - 1.0));
        const double v = sigmoid(z);
        if (v <= prev) {
            increasing = false;
        }
        prev = v;
    }
    const bool saturates = sigmoid(1000.0) == 1.0 && sigmoid(-1000.0) == 0.0 && sigmoid(0.0) == 0.5;
    const bool ok = worst <= 1e-15 && increasing && saturates;
    return {"sigmoid symmetry, monotonicity and saturation", ok,
            "max |s(z)+s(-z)-1| = " + fmt(worst)};
}

PropertyResult cost_at_zero(std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
        const std::size_t n = 1 + rng.index(20);
        const std::size_t m = 1 + rng.index(80);
        const TrainingSet data = random_dataset(rng, m, n);
        const Theta zero{0.0, std::vector<double>(n, 0.0)};
        worst = std::max(worst, std::fabs(cost(zero, data, 0.0) - std::log(2.0)));
    }
    return {"cost at the zero parameter vector equals ln 2", worst <= 1e-12,
            "max |cost - ln2| = " + fmt(worst)};
}

// Extended-precision transcription of the cost, used only as the
// finite-difference oracle. At step 1e-6 a double evaluation carries ~2e-10
// of rounding noise in the difference quotient, which would swamp the 1e-6
// gate on small gradient coordinates; long double keeps the noise near 1e-13.
static long double cost_oracle(const Theta& theta, const TrainingSet& data, double l2) {
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
    const auto m = static_cast<long double>(data.size());
    long double w2 = 0.0L;
    for (double w : theta.weights) {
        w2 += static_cast<long double>(w) * w;
    }
    return sum / m + l2 / (2.0L * m) * w2;
}

PropertyResult gradient_matches_fd(std::uint64_t seed) {
    Rng rng(seed);
    const double h = 1e-6;
    double worst = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t n = 15;
        const TrainingSet data = random_dataset(rng, 50, n);
        Theta theta = random_theta(rng, n, 2.0);
        const double l2 = inst % 3 == 0 ? 0.5 : 0.0;
        const std::vector<double> g = gradient(theta, data, l2);
        for (std::size_t k = 0; k <= n; ++k) {
            double* coord = k == 0 ? &theta.bias : &theta.weights[k - 1];
            const double saved = *coord;
            *coord = saved + h;
            const long double up = cost_oracle(theta, data, l2);
            *coord = saved - h;
            const long double down = cost_oracle(theta, data, l2);
            *coord = saved;
            const double fd = static_cast<double>((up - down) / (2.0L * h));
            // below 1e-6 the comparison degrades to |a - fd| <= 1e-12 absolute
            const double rel = std::fabs(g[k] - fd) / std::max(std::fabs(fd), 1e-6);
            worst = std::max(worst, rel);
        }
    }
    return {"analytic gradient matches central finite differences", worst <= 1e-6,
            "max rel err " + fmt(worst) + " over 20 instances"};
}

PropertyResult cost_convex(std::uint64_t seed) {
    Rng rng(seed);
    double worst = -1.0;
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 1 + rng.index(12);
        const TrainingSet data = random_dataset(rng, 1 + rng.index(60), n);
        const Theta a = random_theta(rng, n, 3.0);
        const Theta b = random_theta(rng, n, 3.0);
        const double t = rng.uniform(0.05, 0.95);
        Theta mix;
        mix.bias = t * a.bias + (1.0 - t) * b.bias;
        mix.weights.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            mix.weights[k] = t * a.weights[k] + (1.0 - t) * b.weights[k];
        }
        const double gap = cost(mix, data, 0.0) - (t * cost(a, data, 0.0) + (1.0 - t) * cost(b, data, 0.0));
        worst = std::max(worst, gap);
    }
    return {"cost is convex along random chords", worst <= 1e-9,
            "max chord violation " + fmt(worst)};
}

PropertyResult predict_sign_rule(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t n = 4;
    std::size_t checked = 0;
    bool ok = true;
    for (int trial = 0; trial < 100 && ok; ++trial) {
        const Theta theta = random_theta(rng, n, 4.0);
        for (std::uint32_t bits = 0; bits < 16u && ok; ++bits) {
            FeatureVector x;
            x.slots.resize(n);
            for (std::size_t k = 0; k < n; ++k) {
                x.slots[k] = (bits >> k) & 1u;
            }
            double z = theta.bias;
            for (std::size_t k = 0; k < n; ++k) {
                if (x.slots[k]) {
                    z += theta.weights[k];
                }
            }
            ok = predict(theta, x) == (z >= 0.0 ? 1 : 0);
            ++checked;
        }
    }
    return {"predict equals the sign test over all 16 windows (n=4)", ok,
            std::to_string(checked) + " (theta, window) pairs"};
}

PropertyResult predict_scaling(std::uint64_t seed) {
    Rng rng(seed);
    bool ok = true;
    for (int i = 0; i < 200 && ok; ++i) {
        const std::size_t n = 1 + rng.index(16);
        const Theta theta = random_theta(rng, n, 3.0);
        const FeatureVector x = random_window(rng, n);
        const Label base = predict(theta, x);
        for (double c : {1e-3, 0.5, 3.0, 1e3}) {
            Theta scaled = theta;
            scaled.bias *= c;
            for (double& w : scaled.weights) {
                w *= c;
            }
            ok = ok && predict(scaled, x) == base;
        }
    }
    return {"predict is invariant under positive scaling of theta", ok, "200 thetas x 4 scales"};
}

PropertyResult train_deterministic(std::uint64_t seed) {
    Rng rng(seed);
    TrainingSet data = random_dataset(rng, 120, 8);
    // labels correlated with the last slot so the fit is non-trivial
    for (auto& s : data.samples) {
        if (rng.bernoulli(0.8)) {
            s.y = s.x.slots.back();
        }
    }
    const TrainConfig config;
    const auto [t1, r1] = train(data, config);
    const auto [t2, r2] = train(data, config);
    const bool ok = t1 == t2 && r1 == r2;
    return {"train is deterministic (bitwise identical theta)", ok,
            "iterations = " + std::to_string(r1.iterations)};
}

PropertyResult generate_reproducible(std::uint64_t seed) {
    bool ok = true;
    GeneratorSpec specs[3];
    specs[0] = {IidSpec{0.6}, seed};
    specs[1] = calibrated_default_generator(seed);
    specs[2] = {MarkovPersistenceSpec{0.9, 0.2}, seed};
    for (const auto& spec : specs) {
        ok = ok && generate(spec, 512) == generate(spec, 512);
        GeneratorSpec other = spec;
        other.seed = seed + 1;
        ok = ok && !(generate(other, 512) == generate(spec, 512));
    }
    return {"generate is reproducible per seed and varies across seeds", ok, "3 variants x 512 outcomes"};
}

PropertyResult featurize_slices(std::uint64_t seed) {
    Rng rng(seed);
    bool ok = true;
    std::size_t checked = 0;
    for (int trial = 0; trial < 20 && ok; ++trial) {
        const std::size_t window = 1 + rng.index(10);
        const std::size_t len = window + 1 + rng.index(100 - window);
        const OutcomeHistory history = generate({IidSpec{0.5}, seed + static_cast<std::uint64_t>(trial)}, len);
        const TrainingSet set = featurize(history, window);
        ok = set.size() == len - window;
        for (std::size_t t = 0; t < set.size() && ok; ++t) {
            for (std::size_t j = 0; j < window; ++j) {
                ok = ok && set.samples[t].x.slots[j] == history.outcomes[t + j];
            }
            ok = ok && set.samples[t].y == history.outcomes[t + window];
            ++checked;
        }
    }
    return {"featurize rows are contiguous history slices", ok,
            std::to_string(checked) + " rows checked"};
}

PropertyResult bayes_logistic_equiv(std::uint64_t seed) {
    Rng rng(seed);
    bool ok = true;
    for (int i = 0; i < 300 && ok; ++i) {
        const std::size_t n = 1 + rng.index(16);
        const Theta star = random_theta(rng, n, 3.0);
        const GeneratorSpec spec{LogisticTruthSpec{star}, 0};
        const FeatureVector x = random_window(rng, n);
        ok = bayes_predict(spec, x) == predict(star, x);
    }
    return {"bayes oracle equals classifier predict under logistic truth", ok, "300 windows"};
}

PropertyResult bayes_markov_rule(std::uint64_t seed) {
    Rng rng(seed);
    bool ok = true;
    for (int i = 0; i < 300 && ok; ++i) {
        const MarkovPersistenceSpec mk{rng.uniform(), rng.uniform()};
        const GeneratorSpec spec{mk, 0};
        const FeatureVector x = random_window(rng, 1 + rng.index(16));
        const double p = x.slots.back() ? mk.p_repeat_after_c_win : mk.p_c_win_after_d_win;
        ok = bayes_predict(spec, x) == (p >= 0.5 ? 1 : 0);
    }
    return {"markov oracle depends only on the newest slot", ok, "300 windows"};
}

PropertyResult window_walk(std::uint64_t seed) {
    const std::size_t window = 7;
    const OutcomeHistory history = generate({IidSpec{0.5}, seed}, 60);
    const TrainingSet set = featurize(history, window);
    FeatureVector w = set.samples.front().x;
    bool ok = true;
    for (std::size_t t = 0; t + 1 < set.size() && ok; ++t) {
        w = advance_window(w, set.samples[t].y);
        ok = w == set.samples[t + 1].x;
    }
    return {"advance_window reproduces the featurize rows", ok,
            std::to_string(set.size()) + " steps"};
}

PropertyResult markov_sweep(std::uint64_t seed) {
    Rng rng(seed);
    std::size_t failures = 0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t count = 1 + rng.index(200);
        std::vector<double> samples(count);
        const int family = i % 3;
        for (double& s : samples) {
            const double u = rng.uniform();
            if (family == 0) {
                s = -std::log(1.0 - u) * rng.uniform(0.1, 50.0);  // exponential
            } else if (family == 1) {
                s = rng.uniform(0.0, 100.0);  // uniform
            } else {
                s = 0.5 * std::pow(1.0 - u, -1.0 / rng.uniform(1.1, 3.0));  // heavy tail
            }
        }
        const DelayStats stats = delay_stats_from_samples(samples);
        const double d_max = rng.uniform(1e-6, 3.0 * stats.mean_us + 1.0);
        if (!verify_bound(stats, d_max).holds) {
            ++failures;
        }
    }
    return {"empirical tail never exceeds the markov bound", failures == 0,
            std::to_string(1000 - failures) + "/1000 random sample sets"};
}

PropertyResult accuracy_complement(std::uint64_t seed) {
    Rng rng(seed);
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
        const std::size_t m = 1 + rng.index(300);
        std::vector<AllocationDecision> decisions(m);
        for (std::size_t k = 0; k < m; ++k) {
            decisions[k].request_index = k;
            decisions[k].predicted_winner = rng.bernoulli(0.5) ? 1 : 0;
            decisions[k].actual_winner = rng.bernoulli(0.5) ? 1 : 0;
        }
        const AccuracyReport base = accuracy(decisions);
        for (auto& d : decisions) {
            d.actual_winner = 1 - *d.actual_winner;
        }
        const AccuracyReport flipped = accuracy(decisions);
        ok = base.correct + flipped.correct == m &&
             std::fabs(base.accuracy + flipped.accuracy - 100.0) <= 1e-9;
    }
    return {"accuracy of label-flipped decisions is the exact complement", ok, "50 decision sets"};
}

PropertyResult utilization_accounts(std::uint64_t seed) {
    Rng rng(seed);
    bool ok = true;
    for (int i = 0; i < 50 && ok; ++i) {
        const std::size_t m = 1 + rng.index(300);
        std::vector<AllocationDecision> decisions(m);
        for (std::size_t k = 0; k < m; ++k) {
            decisions[k].request_index = k;
            decisions[k].predicted_winner = rng.bernoulli(0.3) ? 1 : 0;
        }
        const UtilizationReport report = utilization(decisions);
        ok = report.count_c + report.count_d == m && report.n_requests == m &&
             report.share_c + report.share_d == 100.0 && report.overall == 100.0;
        // order must not matter
        std::reverse(decisions.begin(), decisions.end());
        ok = ok && utilization(decisions) == report;
    }
    return {"utilization accounts for every request and ignores order", ok, "50 decision sets"};
}

}  // namespace

std::vector<PropertyResult> run_property_suite(std::uint64_t seed) {
    std::vector<PropertyResult> results;
    results.push_back(sigmoid_shape(seed));
    results.push_back(cost_at_zero(seed + 1));
    results.push_back(gradient_matches_fd(seed + 2));
    results.push_back(cost_convex(seed + 3));
    results.push_back(predict_sign_rule(seed + 4));
    results.push_back(predict_scaling(seed + 5));
    results.push_back(train_deterministic(seed + 6));
    results.push_back(generate_reproducible(seed + 7));
    results.push_back(featurize_slices(seed + 8));
    results.push_back(bayes_logistic_equiv(seed + 9));
    results.push_back(bayes_markov_rule(seed + 10));
    results.push_back(window_walk(seed + 11));
    results.push_back(markov_sweep(seed + 12));
    results.push_back(accuracy_complement(seed + 13));
    results.push_back(utilization_accounts(seed + 14));
    return results;
}

}  // namespace bidsim
