#include "bidsim/allocator.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace bidsim {

AllocationDecision resolve_bid(const Theta& theta, const FeatureVector& window) {
    AllocationDecision decision;
    decision.predicted_winner = predict(theta, window);
    return decision;
}

FeatureVector advance_window(const FeatureVector& window, Label outcome) {
    if (outcome != 0 && outcome != 1) {
        throw std::invalid_argument("outcome must be 0 or 1");
    }
    FeatureVector next;
    next.slots.reserve(window.size());
    if (window.size() > 1) {
        next.slots.assign(window.slots.begin() + 1, window.slots.end());
    }
    next.slots.push_back(static_cast<std::uint8_t>(outcome));
    return next;
}

UtilizationReport utilization(const std::vector<AllocationDecision>& decisions) {
    if (decisions.empty()) {
        throw std::invalid_argument("utilization needs at least one decision");
    }
    UtilizationReport report;
    report.n_requests = decisions.size();
    for (const AllocationDecision& d : decisions) {
        if (d.predicted_winner == 1) {
            ++report.count_c;
        } else {
            ++report.count_d;
        }
    }
    report.share_c = 100.0 * static_cast<double>(report.count_c) / static_cast<double>(report.n_requests);
    report.share_d = 100.0 - report.share_c;
    report.overall = 100.0;
    return report;
}

AccuracyReport accuracy(const std::vector<AllocationDecision>& decisions) {
    if (decisions.empty()) {
        throw std::invalid_argument("accuracy needs at least one decision");
    }
    AccuracyReport report;
    report.total = decisions.size();
    for (const AllocationDecision& d : decisions) {
        if (!d.actual_winner.has_value()) {
            throw std::invalid_argument("decision " + std::to_string(d.request_index) +
                                        " has no actual winner");
        }
        if (d.predicted_winner == *d.actual_winner) {
            ++report.correct;
        }
    }
    report.accuracy = 100.0 * static_cast<double>(report.correct) / static_cast<double>(report.total);
    return report;
}

void write_decisions_csv(const std::string& path, const std::vector<AllocationDecision>& decisions) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "request_index,predicted_winner,actual_winner\n";
    for (const AllocationDecision& d : decisions) {
        out << d.request_index << ',' << d.predicted_winner << ',';
        if (d.actual_winner.has_value()) {
            out << *d.actual_winner;
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("failed while writing " + path);
    }
}

void write_utilization_csv(const std::string& path, const UtilizationReport& report) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    out << "n_requests,share_c_pct,share_d_pct,overall_pct\n";
    out << report.n_requests << ',' << std::fixed << std::setprecision(2) << report.share_c << ','
        << report.share_d << ',' << report.overall << '\n';
    if (!out) {
        throw std::runtime_error("failed while writing " + path);
    }
}

}  // namespace bidsim
