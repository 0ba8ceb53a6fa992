#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bidsim/classifier.hpp"

namespace bidsim {

// One resolved bid. The resource always goes to exactly one player: the
// predicted winner. actual_winner is present only in simulation, where the
// ground-truth outcome exists.
struct AllocationDecision {
    std::size_t request_index = 0;
    Label predicted_winner = 0;
    std::optional<Label> actual_winner;

    bool operator==(const AllocationDecision&) const = default;
};

// Resource shares in percent. Raw counts are the source of truth; share_d is
// the exact complement of share_c, so the shares always sum to the overall
// 100%. CSV output rounds to 2 decimals.
struct UtilizationReport {
    std::size_t count_c = 0;
    std::size_t count_d = 0;
    std::size_t n_requests = 0;
    double share_c = 0.0;
    double share_d = 0.0;
    double overall = 100.0;

    bool operator==(const UtilizationReport&) const = default;
};

struct AccuracyReport {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy = 0.0;  // percent

    bool operator==(const AccuracyReport&) const = default;
};

// Grants the resource to the classifier's predicted winner for this window.
// request_index is left at 0 for the caller to fill.
AllocationDecision resolve_bid(const Theta& theta, const FeatureVector& window);

// Drops the oldest slot and appends the outcome as the newest.
FeatureVector advance_window(const FeatureVector& window, Label outcome);

// Share of grants per player, computed over predicted winners.
UtilizationReport utilization(const std::vector<AllocationDecision>& decisions);

// Fraction of decisions whose prediction matched the actual winner. Every
// decision must carry an actual winner.
AccuracyReport accuracy(const std::vector<AllocationDecision>& decisions);

// CSV: request_index,predicted_winner,actual_winner (blank when absent).
void write_decisions_csv(const std::string& path, const std::vector<AllocationDecision>& decisions);

// CSV: n_requests,share_c_pct,share_d_pct,overall_pct with 2-decimal shares.
void write_utilization_csv(const std::string& path, const UtilizationReport& report);

}  // namespace bidsim
