#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bidsim/allocator.hpp"
#include "bidsim/classifier.hpp"
#include "bidsim/game_sim.hpp"
#include "bidsim/metrics.hpp"

namespace bidsim {

struct RunConfig {
    GeneratorSpec generator = calibrated_default_generator(60);
    std::size_t window = 15;
    std::size_t train_samples = 1000;
    std::size_t test_samples = 1000;
    double d_max_us = 1000.0;
    TrainConfig train;
    std::string output_dir = "out";

    bool operator==(const RunConfig&) const = default;
};

struct RunSummary {
    RunConfig config_echo;
    Theta theta;
    TrainReport train_report;
    AccuracyReport accuracy;
    UtilizationReport utilization;
    DelayStats delay;   // wall-clock measurements, excluded from determinism
    MarkovBound bound;  // derived from delay, likewise excluded

    bool operator==(const RunSummary&) const = default;
};

// Throws std::invalid_argument when a field is out of contract.
void validate(const RunConfig& config);

// Full pipeline: generate -> featurize -> train -> predict -> allocate ->
// report. Writes summary.json, utilization.csv, decisions.csv and delays.csv
// into config.output_dir. Apart from the timing fields the result is a pure
// function of the config (the generator seed included).
RunSummary simulate(const RunConfig& config);

// Delay table over the given request counts, one row per count, using a
// model trained once from the config. Writes delays.csv into
// config.output_dir.
std::vector<DelayTableRow> bench(const RunConfig& config, const std::vector<std::size_t>& sweep);

struct PropertyResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Self-check suite: gradient vs finite differences, decision-rule and oracle
// equivalences, Markov-bound sweep, determinism. Failures are reported, not
// thrown.
std::vector<PropertyResult> run_property_suite(std::uint64_t seed);

// JSON round-trips. Summary documents list their timing-dependent fields
// under "nondeterministic_fields".
std::string config_to_json(const RunConfig& config);
RunConfig config_from_json(const std::string& text);
std::string summary_to_json(const RunSummary& summary);
RunSummary summary_from_json(const std::string& text);

// Keys of summary.json that depend on wall-clock measurement.
const std::vector<std::string>& summary_timing_fields();

}  // namespace bidsim
