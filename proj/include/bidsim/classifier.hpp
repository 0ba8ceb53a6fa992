#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace bidsim {

// 1 = player C won the encounter, 0 = player D.
using Label = int;

// Outcomes of the last n encounters. slots[0] is the oldest outcome in the
// window, slots.back() the most recent one. Every slot is 0 or 1.
struct FeatureVector {
    std::vector<std::uint8_t> slots;

    std::size_t size() const { return slots.size(); }
    bool operator==(const FeatureVector&) const = default;
};

struct Sample {
    FeatureVector x;
    Label y = 0;

    bool operator==(const Sample&) const = default;
};

// Labeled windows, chronological where they come from a history.
struct TrainingSet {
    std::vector<Sample> samples;

    std::size_t size() const { return samples.size(); }
    // feature length n; samples must agree (checked by the ops below)
    std::size_t window() const { return samples.empty() ? 0 : samples.front().x.size(); }
    bool operator==(const TrainingSet&) const = default;
};

// Model parameters: intercept plus one weight per window slot.
struct Theta {
    double bias = 0.0;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    bool operator==(const Theta&) const = default;
};

struct TrainConfig {
    double grad_tolerance = 1e-6;       // stop once ||grad||_2 falls below this
    std::size_t max_iterations = 10000;
    double l2_penalty = 0.0;            // the bias is never penalized

    bool operator==(const TrainConfig&) const = default;
};

struct TrainReport {
    std::size_t iterations = 0;
    double final_cost = 0.0;
    double final_grad_norm = 0.0;
    bool converged = false;

    bool operator==(const TrainReport&) const = default;
};

// Logistic function 1/(1+e^-z). Saturates cleanly for large |z|, throws
// std::domain_error on non-finite input.
double sigmoid(double z);

// Model win probability P(label = 1 | x) = sigmoid(bias + w.x).
double hypothesis(const Theta& theta, const FeatureVector& x);

// Mean cross-entropy over the set plus (l2/2m)*||weights||^2. Evaluated in
// log1p(exp) form, so saturated samples contribute their linear term instead
// of log(0).
double cost(const Theta& theta, const TrainingSet& data, double l2 = 0.0);

// d(cost)/d(theta), laid out as [bias, weights...], length n+1.
std::vector<double> gradient(const Theta& theta, const TrainingSet& data, double l2 = 0.0);

// Fits theta by damped Newton iteration from the all-zero start. Deterministic
// for a given (data, config). Stops at grad_tolerance or max_iterations,
// whichever comes first; running out of iterations is reported, not thrown.
std::pair<Theta, TrainReport> train(const TrainingSet& data, const TrainConfig& config = {});

// 1 iff bias + w.x >= 0, i.e. hypothesis >= 0.5 with the tie going to 1.
Label predict(const Theta& theta, const FeatureVector& x);

// JSON document {"n": ..., "bias": ..., "weights": [...]}, round-trip exact.
std::string theta_to_json(const Theta& theta);
Theta theta_from_json(const std::string& text);

}  // namespace bidsim
