#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "bidsim/game_sim.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bidsim;
using test::random_window;
using test::TempDir;

namespace {

double fraction_of_ones(const OutcomeHistory& h) {
    std::size_t ones = 0;
    for (auto v : h.outcomes) {
        ones += v;
    }
    return static_cast<double>(ones) / static_cast<double>(h.size());
}

}  // namespace

TEST_SUITE("game_sim") {

TEST_CASE("iid degenerate probabilities") {
    const OutcomeHistory ones = generate({IidSpec{1.0}, 5}, 100);
    const OutcomeHistory zeros = generate({IidSpec{0.0}, 5}, 100);
    CHECK(fraction_of_ones(ones) == 1.0);
    CHECK(fraction_of_ones(zeros) == 0.0);
}

TEST_CASE("generate is reproducible per seed") {
    const GeneratorSpec spec[] = {{IidSpec{0.37}, 99},
                                  calibrated_default_generator(99),
                                  {MarkovPersistenceSpec{0.8, 0.3}, 99}};
    for (const auto& s : spec) {
        CHECK(generate(s, 777) == generate(s, 777));
        GeneratorSpec reseeded = s;
        reseeded.seed = 100;
        CHECK_FALSE(generate(reseeded, 777) == generate(s, 777));
    }
}

TEST_CASE("iid long-run frequency at p = 0.6") {
    const OutcomeHistory h = generate({IidSpec{0.6}, 314159}, 1000000);
    const double frac = fraction_of_ones(h);
    CHECK(frac >= 0.598);
    CHECK(frac <= 0.602);
}

TEST_CASE("all-zero logistic truth behaves like a fair coin") {
    Theta star;
    star.weights.assign(15, 0.0);
    const OutcomeHistory h = generate({LogisticTruthSpec{star}, 271828}, 1000000);
    CHECK(std::fabs(fraction_of_ones(h) - 0.5) <= 0.002);
}

TEST_CASE("logistic warm-up is the fixed alternating pattern") {
    const GeneratorSpec spec = calibrated_default_generator(4242);
    const OutcomeHistory h = generate(spec, 40);
    for (std::size_t t = 0; t < 15; ++t) {
        CHECK(h.outcomes[t] == (t % 2 == 0 ? 1 : 0));
    }
    // lengths inside the warm-up return its prefix, independent of the seed
    GeneratorSpec other = spec;
    other.seed = 1;
    CHECK(generate(other, 7) == generate(spec, 7));
    CHECK(generate(spec, 1).outcomes == std::vector<std::uint8_t>{1});
    CHECK(generate(spec, 3).outcomes == std::vector<std::uint8_t>{1, 0, 1});
}

TEST_CASE("markov chain hits its stationary share") {
    // switch rates 0.1 away from C and 0.2 toward C give share 2/3
    const OutcomeHistory h = generate({MarkovPersistenceSpec{0.9, 0.2}, 161803}, 100000);
    CHECK(std::fabs(fraction_of_ones(h) - 2.0 / 3.0) <= 0.01);
    // all-persistent chain seeded from the D side stays at D
    const OutcomeHistory stuck = generate({MarkovPersistenceSpec{1.0, 0.0}, 1}, 50);
    CHECK(fraction_of_ones(stuck) == 0.0);
}

TEST_CASE("generate contract errors") {
    CHECK_THROWS_AS(generate({IidSpec{0.5}, 1}, 0), std::invalid_argument);
    CHECK_THROWS_AS(generate({IidSpec{1.5}, 1}, 10), std::invalid_argument);
    CHECK_THROWS_AS(generate({MarkovPersistenceSpec{-0.1, 0.5}, 1}, 10), std::invalid_argument);
    Theta nan_star;
    nan_star.weights.assign(3, 0.0);
    nan_star.bias = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(generate({LogisticTruthSpec{nan_star}, 1}, 10), std::invalid_argument);
}

TEST_CASE("featurize slides one window per outcome") {
    OutcomeHistory h;
    h.outcomes = {1, 1, 0, 1};
    const TrainingSet set = featurize(h, 3);
    REQUIRE(set.size() == 1);
    CHECK(set.samples[0].x.slots == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(set.samples[0].y == 1);
}

TEST_CASE("featurize yields exactly length - window samples") {
    const OutcomeHistory h = generate({IidSpec{0.5}, 7}, 1015);
    CHECK(featurize(h, 15).size() == 1000);

    OutcomeHistory constant;
    constant.outcomes.assign(40, 1);
    const TrainingSet set = featurize(constant, 15);
    CHECK(set.size() == 25);
    for (const Sample& s : set.samples) {
        CHECK(s.x == set.samples.front().x);
        CHECK(s.y == 1);
    }
}

TEST_CASE("featurize rows are contiguous slices of the history") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const OutcomeHistory h = generate({IidSpec{0.5}, seed}, 100);
        const std::size_t window = 1 + seed * 3;
        const TrainingSet set = featurize(h, window);
        REQUIRE(set.size() == 100 - window);
        for (std::size_t t = 0; t < set.size(); ++t) {
            for (std::size_t j = 0; j < window; ++j) {
                CHECK(set.samples[t].x.slots[j] == h.outcomes[t + j]);
            }
            CHECK(set.samples[t].y == h.outcomes[t + window]);
        }
    }
}

TEST_CASE("featurize contract errors") {
    OutcomeHistory h;
    h.outcomes = {1, 0, 1};
    CHECK_THROWS_AS(featurize(h, 3), std::invalid_argument);  // needs window + 1
    CHECK_THROWS_AS(featurize(h, 0), std::invalid_argument);
}

TEST_CASE("bayes oracle per variant") {
    Rng rng(33);
    SUBCASE("iid ignores the window") {
        for (int i = 0; i < 10; ++i) {
            const FeatureVector x = random_window(rng, 1 + rng.index(16));
            CHECK(bayes_predict({IidSpec{0.6}, 0}, x) == 1);
            CHECK(bayes_predict({IidSpec{0.4}, 0}, x) == 0);
            CHECK(bayes_predict({IidSpec{0.5}, 0}, x) == 1);  // tie rule
        }
    }
    SUBCASE("logistic truth coincides with classifier predict") {
        for (int i = 0; i < 200; ++i) {
            const std::size_t n = 1 + rng.index(16);
            const Theta star = test::random_theta(rng, n, 3.0);
            const FeatureVector x = random_window(rng, n);
            CHECK(bayes_predict({LogisticTruthSpec{star}, 0}, x) == predict(star, x));
        }
    }
    SUBCASE("markov persistence follows the newest slot") {
        const GeneratorSpec spec{MarkovPersistenceSpec{0.9, 0.2}, 0};
        FeatureVector ends_c = random_window(rng, 8);
        ends_c.slots.back() = 1;
        FeatureVector ends_d = ends_c;
        ends_d.slots.back() = 0;
        CHECK(bayes_predict(spec, ends_c) == 1);
        CHECK(bayes_predict(spec, ends_d) == 0);
    }
    SUBCASE("empty window is rejected") {
        CHECK_THROWS_AS(bayes_predict({IidSpec{0.5}, 0}, FeatureVector{}), std::invalid_argument);
    }
}

TEST_CASE("split is chronological") {
    const OutcomeHistory h = generate({IidSpec{0.5}, 88}, 1015);
    const TrainingSet set = featurize(h, 15);
    const auto [train_set, test_set] = split(set, {0.5});
    CHECK(train_set.size() == 500);
    CHECK(test_set.size() == 500);
    CHECK(train_set.samples.front() == set.samples.front());
    CHECK(test_set.samples.front() == set.samples[500]);
    CHECK(test_set.samples.back() == set.samples.back());
}

TEST_CASE("split contract errors") {
    TrainingSet ten;
    for (int i = 0; i < 10; ++i) {
        ten.samples.push_back({test::window_of({1}), 0});
    }
    CHECK_THROWS_AS(split(ten, {0.99}), std::invalid_argument);  // empty test side
    CHECK_THROWS_AS(split(ten, {0.01}), std::invalid_argument);  // empty train side
    CHECK_THROWS_AS(split(ten, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(split(ten, {1.0}), std::invalid_argument);
}

TEST_CASE("history csv round-trips") {
    TempDir dir("history_csv");
    const OutcomeHistory h = generate({IidSpec{0.4}, 9}, 257);
    const std::string path = (dir.path() / "history.csv").string();
    write_history_csv(path, h);
    CHECK(read_history_csv(path) == h);

    std::ofstream bad_header(dir.path() / "bad.csv");
    bad_header << "result\n1\n";
    bad_header.close();
    CHECK_THROWS_AS(read_history_csv((dir.path() / "bad.csv").string()), std::runtime_error);

    std::ofstream bad_value(dir.path() / "bad2.csv");
    bad_value << "outcome\n2\n";
    bad_value.close();
    CHECK_THROWS_AS(read_history_csv((dir.path() / "bad2.csv").string()), std::runtime_error);
}

TEST_CASE("trained model tracks the bayes oracle under logistic truth") {
    const GeneratorSpec spec = calibrated_default_generator(135);
    const std::size_t window = 15;
    const std::size_t train_n = 5000;
    const std::size_t test_n = 10000;
    const OutcomeHistory h = generate(spec, window + train_n + test_n);
    const TrainingSet all = featurize(h, window);
    TrainingSet train_set;
    train_set.samples.assign(all.samples.begin(),
                             all.samples.begin() + static_cast<std::ptrdiff_t>(train_n));
    const auto [theta, report] = train(train_set, {});
    REQUIRE(report.converged);
    std::size_t model_hits = 0;
    std::size_t oracle_hits = 0;
    std::size_t total = 0;
    for (std::size_t k = train_n; k < all.size(); ++k) {
        model_hits += predict(theta, all.samples[k].x) == all.samples[k].y;
        oracle_hits += bayes_predict(spec, all.samples[k].x) == all.samples[k].y;
        ++total;
    }
    const double model_acc = 100.0 * static_cast<double>(model_hits) / static_cast<double>(total);
    const double oracle_acc = 100.0 * static_cast<double>(oracle_hits) / static_cast<double>(total);
    CHECK(std::fabs(model_acc - oracle_acc) <= 2.0);
    CHECK(model_acc <= oracle_acc + 0.5);  // nothing beats the oracle by more than noise
}

}  // TEST_SUITE
