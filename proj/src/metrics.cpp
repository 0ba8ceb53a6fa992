#include "bidsim/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "json.hpp"

namespace bidsim {

namespace {

using Clock = std::chrono::steady_clock;

double to_us(Clock::duration d) {
    return std::chrono::duration<double, std::micro>(d).count();
}

// keeps the timed predict call from being optimized away
volatile int g_timing_sink = 0;

}  // namespace

DelayStats delay_stats_from_samples(std::vector<double> samples_us) {
    if (samples_us.empty()) {
        throw std::invalid_argument("delay stats need at least one sample");
    }
    for (double s : samples_us) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw std::invalid_argument("delay samples must be finite and >= 0");
        }
    }
    DelayStats stats;
    stats.samples_us = std::move(samples_us);
    stats.n_requests = stats.samples_us.size();
    for (double s : stats.samples_us) {
        stats.total_us += s;
    }
    stats.mean_us = stats.total_us / static_cast<double>(stats.n_requests);
    return stats;
}

DelayStats time_predictions(const Theta& theta, const std::vector<FeatureVector>& windows) {
    if (windows.empty()) {
        throw std::invalid_argument("time_predictions needs at least one window");
    }
    std::vector<double> samples;
    samples.reserve(windows.size());
    for (const FeatureVector& w : windows) {
        const auto t0 = Clock::now();
        g_timing_sink = predict(theta, w);
        const auto t1 = Clock::now();
        samples.push_back(std::max(0.0, to_us(t1 - t0)));
    }
    return delay_stats_from_samples(std::move(samples));
}

MarkovBound markov_bound(double mean_us, double d_max_us) {
    if (!(d_max_us > 0.0)) {
        throw std::invalid_argument("d_max must be > 0");
    }
    if (!(mean_us >= 0.0)) {
        throw std::invalid_argument("mean delay must be >= 0");
    }
    MarkovBound b;
    b.d_max_us = d_max_us;
    b.mean_us = mean_us;
    b.bound = mean_us / d_max_us;
    b.bound_clipped = std::min(1.0, b.bound);
    return b;
}

double empirical_tail(const DelayStats& stats, double d_max_us) {
    if (!(d_max_us > 0.0)) {
        throw std::invalid_argument("d_max must be > 0");
    }
    if (stats.samples_us.empty()) {
        throw std::invalid_argument("empirical tail needs at least one sample");
    }
    std::size_t at_or_above = 0;
    for (double s : stats.samples_us) {
        if (s >= d_max_us) {
            ++at_or_above;
        }
    }
    return static_cast<double>(at_or_above) / static_cast<double>(stats.samples_us.size());
}

MarkovBound verify_bound(const DelayStats& stats, double d_max_us) {
    MarkovBound b = markov_bound(stats.mean_us, d_max_us);
    b.empirical_tail = empirical_tail(stats, d_max_us);
    b.holds = b.empirical_tail <= std::min(1.0, b.bound);
    return b;
}

void write_delay_csv(const std::string& path, const std::vector<DelayTableRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "n_requests,total_us,avg_per_request_us\n";
    out << std::fixed << std::setprecision(4);
    for (const DelayTableRow& row : rows) {
        out << row.n_requests << ',' << row.total_us << ',' << row.avg_per_request_us << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed while writing " + path);
    }
}

std::string bound_to_json(const MarkovBound& bound) {
    nlohmann::json doc;
    doc["d_max_us"] = bound.d_max_us;
    doc["mean_us"] = bound.mean_us;
    doc["bound"] = bound.bound;
    doc["bound_clipped"] = bound.bound_clipped;
    doc["empirical_tail"] = bound.empirical_tail;
    doc["holds"] = bound.holds;
    return doc.dump(2);
}

double clock_overhead_us() {
    std::vector<double> costs;
    costs.reserve(1001);
    for (int i = 0; i < 1001; ++i) {
        const auto t0 = Clock::now();
        const auto t1 = Clock::now();
        costs.push_back(to_us(t1 - t0));
    }
    std::nth_element(costs.begin(), costs.begin() + 500, costs.end());
    return costs[500];
}

}  // namespace bidsim
