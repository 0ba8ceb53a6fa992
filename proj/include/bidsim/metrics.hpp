#pragma once

#include <string>
#include <vector>

#include "bidsim/classifier.hpp"

namespace bidsim {

// Per-request decision delays in microseconds, each sample nonnegative.
struct DelayStats {
    std::vector<double> samples_us;
    double total_us = 0.0;
    double mean_us = 0.0;  // total / n_requests
    std::size_t n_requests = 0;

    bool operator==(const DelayStats&) const = default;
};

// Markov tail bound E[D]/D_max for the delay distribution. The raw bound is
// deliberately not clipped to 1 (it is a bound, not a probability);
// bound_clipped carries the min(1, bound) convenience value.
struct MarkovBound {
    double d_max_us = 0.0;
    double mean_us = 0.0;
    double bound = 0.0;
    double bound_clipped = 0.0;
    double empirical_tail = 0.0;
    bool holds = false;

    bool operator==(const MarkovBound&) const = default;
};

DelayStats delay_stats_from_samples(std::vector<double> samples_us);

// Times each predict call with the monotonic clock. Per-call timing overhead
// (one clock read pair, see clock_overhead_us) is included in the samples,
// not subtracted.
DelayStats time_predictions(const Theta& theta, const std::vector<FeatureVector>& windows);

// bound = mean/d_max; requires d_max > 0 and mean >= 0.
MarkovBound markov_bound(double mean_us, double d_max_us);

// Fraction of samples with duration >= d_max.
double empirical_tail(const DelayStats& stats, double d_max_us);

// Checks empirical_tail <= min(1, mean/d_max) on the given samples. The
// inequality holds for every nonnegative sample set, so this exists to
// property-test the implementation, not the mathematics.
MarkovBound verify_bound(const DelayStats& stats, double d_max_us);

struct DelayTableRow {
    std::size_t n_requests = 0;
    double total_us = 0.0;
    double avg_per_request_us = 0.0;

    bool operator==(const DelayTableRow&) const = default;
};

// CSV: n_requests,total_us,avg_per_request_us with 4-decimal times.
void write_delay_csv(const std::string& path, const std::vector<DelayTableRow>& rows);

// {"d_max_us", "mean_us", "bound", "bound_clipped", "empirical_tail", "holds"}
std::string bound_to_json(const MarkovBound& bound);

// Median cost of a back-to-back steady_clock read pair, the resolution floor
// of per-call timing.
double clock_overhead_us();

}  // namespace bidsim
