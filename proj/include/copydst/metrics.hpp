#pragma once

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "copydst/data.hpp"
#include "copydst/errors.hpp"
#include "copydst/tokenize.hpp"

namespace copydst {

struct BucketMetrics {
    std::size_t correct = 0;
    std::size_t total = 0;

    double accuracy() const {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

// One evaluated turn: both goals are accumulated (Schedule 1 scores the full
// goal at every turn).
struct TurnOutcome {
    Goal gold;
    Goal predicted;
};

struct EvalReport {
    std::size_t turns = 0;
    std::vector<std::string> slots;  // report order
    std::map<std::string, BucketMetrics> slot_goal;
    BucketMetrics joint;
    bool has_breakdown = false;
    std::map<std::string, BucketMetrics> seen_goal;
    std::map<std::string, BucketMetrics> unseen_goal;

    Json to_json() const;
    std::string to_table() const;
};

namespace detail {

inline bool slot_matches(const Goal& gold, const Goal& predicted, const std::string& slot) {
    auto g = gold.find(slot);
    auto p = predicted.find(slot);
    bool g_set = g != gold.end();
    bool p_set = p != predicted.end();
    if (!g_set && !p_set) return true;  // None == None
    if (g_set != p_set) return false;
    return normalize_value(g->second) == normalize_value(p->second);
}

}  // namespace detail

// Scheme A / Schedule 1 scoring: per-slot accumulated-goal accuracy at every
// turn, joint goal = all slots simultaneously correct. When `unseen_values`
// is given (slot -> normalized value set), per-slot accuracy is additionally
// broken down over turns whose gold value is set, bucketed by membership.
inline EvalReport compute_metrics(
    const std::vector<TurnOutcome>& outcomes, const std::vector<std::string>& slots,
    const std::map<std::string, std::set<std::string>>* unseen_values = nullptr) {
    EvalReport report;
    report.turns = outcomes.size();
    report.slots = slots;
    report.has_breakdown = unseen_values != nullptr;
    for (const auto& slot : slots) {
        report.slot_goal[slot] = {};
        if (report.has_breakdown) {
            report.seen_goal[slot] = {};
            report.unseen_goal[slot] = {};
        }
    }
    for (const auto& turn : outcomes) {
        bool all_match = true;
        for (const auto& slot : slots) {
            bool match = detail::slot_matches(turn.gold, turn.predicted, slot);
            auto& m = report.slot_goal[slot];
            ++m.total;
            if (match) ++m.correct;
            all_match = all_match && match;
            if (report.has_breakdown) {
                auto g = turn.gold.find(slot);
                if (g != turn.gold.end()) {
                    auto uit = unseen_values->find(slot);
                    bool is_unseen = uit != unseen_values->end() &&
                                     uit->second.count(normalize_value(g->second)) > 0;
                    auto& bucket = is_unseen ? report.unseen_goal[slot] : report.seen_goal[slot];
                    ++bucket.total;
                    if (match) ++bucket.correct;
                }
            }
        }
        ++report.joint.total;
        if (all_match) ++report.joint.correct;
    }
    return report;
}

// Accuracy of the constant predictor that always answers the modal gold value
// of the bucket; the reference point for "does the model beat class priors".
inline double majority_baseline(const std::vector<TurnOutcome>& outcomes, const std::string& slot,
                                const std::set<std::string>* restrict_to_values = nullptr) {
    std::map<std::string, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& turn : outcomes) {
        auto g = turn.gold.find(slot);
        if (g == turn.gold.end()) continue;
        std::string norm = normalize_value(g->second);
        if (restrict_to_values && !restrict_to_values->count(norm)) continue;
        ++counts[norm];
        ++total;
    }
    if (total == 0) return 0.0;
    std::size_t best = 0;
    for (const auto& [value, n] : counts) best = std::max(best, n);
    return static_cast<double>(best) / static_cast<double>(total);
}

inline Json EvalReport::to_json() const {
    Json j;
    j["turns"] = turns;
    Json per_slot = Json::object();
    for (const auto& slot : slots) {
        const auto& m = slot_goal.at(slot);
        Json js;
        js["accuracy"] = m.accuracy();
        js["correct"] = m.correct;
        js["total"] = m.total;
        if (has_breakdown) {
            const auto& s = seen_goal.at(slot);
            const auto& u = unseen_goal.at(slot);
            js["seen"] = {{"accuracy", s.total ? Json(s.accuracy()) : Json()},
                          {"correct", s.correct},
                          {"total", s.total}};
            js["unseen"] = {{"accuracy", u.total ? Json(u.accuracy()) : Json()},
                            {"correct", u.correct},
                            {"total", u.total}};
        }
        per_slot[slot] = js;
    }
    j["slots"] = per_slot;
    j["joint_goal"] = {{"accuracy", joint.accuracy()},
                       {"correct", joint.correct},
                       {"total", joint.total}};
    return j;
}

inline std::string EvalReport::to_table() const {
    auto fmt = [](const BucketMetrics& m) {
        if (m.total == 0) return std::string("     -");
        std::ostringstream os;
        os << std::fixed << std::setprecision(4) << m.accuracy();
        return os.str();
    };
    std::size_t width = 10;
    for (const auto& s : slots) width = std::max(width, s.size() + 2);
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width)) << "slot" << std::right
       << std::setw(8) << "turns" << std::setw(10) << "accuracy";
    if (has_breakdown) os << std::setw(10) << "seen" << std::setw(10) << "unseen";
    os << "\n";
    for (const auto& slot : slots) {
        const auto& m = slot_goal.at(slot);
        os << std::left << std::setw(static_cast<int>(width)) << slot << std::right
           << std::setw(8) << m.total << std::setw(10) << fmt(m);
        if (has_breakdown)
            os << std::setw(10) << fmt(seen_goal.at(slot)) << std::setw(10)
               << fmt(unseen_goal.at(slot));
        os << "\n";
    }
    os << std::left << std::setw(static_cast<int>(width)) << "joint goal" << std::right
       << std::setw(8) << joint.total << std::setw(10) << fmt(joint) << "\n";
    return os.str();
}

}  // namespace copydst
