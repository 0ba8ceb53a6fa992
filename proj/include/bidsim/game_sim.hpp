#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bidsim/classifier.hpp"

namespace bidsim {

// Encounter results in play order, 1 = C won, 0 = D won.
struct OutcomeHistory {
    std::vector<std::uint8_t> outcomes;

    std::size_t size() const { return outcomes.size(); }
    bool operator==(const OutcomeHistory&) const = default;
};

// Every encounter is an independent Bernoulli(p_c_win) draw.
struct IidSpec {
    double p_c_win = 0.5;

    bool operator==(const IidSpec&) const = default;
};

// The next outcome follows the logistic model applied to the previous
// theta_star.size() outcomes, which makes the model assumption exactly true
// and the Bayes-optimal predictor computable.
struct LogisticTruthSpec {
    Theta theta_star;

    bool operator==(const LogisticTruthSpec&) const = default;
};

// The next outcome depends only on the immediately preceding one.
struct MarkovPersistenceSpec {
    double p_repeat_after_c_win = 0.5;  // P(next = 1 | previous = 1)
    double p_c_win_after_d_win = 0.5;   // P(next = 1 | previous = 0)

    bool operator==(const MarkovPersistenceSpec&) const = default;
};

struct GeneratorSpec {
    std::variant<IidSpec, LogisticTruthSpec, MarkovPersistenceSpec> process;
    std::uint64_t seed = 0;

    bool operator==(const GeneratorSpec&) const = default;
};

struct SplitSpec {
    double train_fraction = 0.5;

    bool operator==(const SplitSpec&) const = default;
};

// Draws a history of the given length. Deterministic for a given spec,
// including the seed. The logistic variant seeds its first n slots with the
// fixed alternating pattern 1,0,1,0,... and draws from outcome n+1 onward;
// the Markov variant starts as if the encounter before the first had gone
// to D.
OutcomeHistory generate(const GeneratorSpec& spec, std::size_t length);

// Slides a window of the given length over the history: sample t carries
// outcomes [t, t+window) as features (slot 0 = oldest) and outcome t+window
// as its label. Yields size() - window samples.
TrainingSet featurize(const OutcomeHistory& history, std::size_t window);

// True P(next = 1 | window) under the generating process.
double true_win_probability(const GeneratorSpec& spec, const FeatureVector& x);

// Predicts with the generator's own conditional probability: 1 iff
// P(next = 1 | window) >= 0.5. The accuracy ceiling for any learned model;
// for LogisticTruth it coincides with predict(theta_star, x).
Label bayes_predict(const GeneratorSpec& spec, const FeatureVector& x);

// Chronological split, first round(m * train_fraction) samples train and the
// remainder tests. No shuffling: windows overlap, so shuffling would leak
// test labels into training features.
std::pair<TrainingSet, TrainingSet> split(const TrainingSet& data, const SplitSpec& spec);

// Default generator: logistic ground truth over the newest three window
// slots. The constants come from tools/calibrate, which tunes them until the
// Bayes oracle sits near 91% accuracy with C taking roughly 59% of the wins.
Theta calibrated_default_theta(std::size_t window = 15);
GeneratorSpec calibrated_default_generator(std::uint64_t seed, std::size_t window = 15);

// CSV with a single "outcome" column; header row required.
void write_history_csv(const std::string& path, const OutcomeHistory& history);
OutcomeHistory read_history_csv(const std::string& path);

}  // namespace bidsim
