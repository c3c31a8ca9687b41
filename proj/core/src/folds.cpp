#include "leafrec/folds.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>

namespace leafrec {

namespace {
constexpr int kFolds = 10;
}

FoldPlan make_fold_plan(const DatasetManifest& manifest, FoldMode mode,
                        std::uint64_t seed) {
    const int n = static_cast<int>(manifest.entries.size());
    if (n < kFolds)
        throw std::invalid_argument("fold plan: need at least 10 entries, have " +
                                    std::to_string(n));

    // test_fold[i] = fold (0-based) in which entry i is tested; validation
    // happens one fold later, so both modes share the role assignment below.
    std::vector<int> test_fold(n);
    if (mode == FoldMode::Indexed) {
        for (int p = 0; p < n; ++p) test_fold[p] = p % kFolds;
    } else {
        std::map<int, std::vector<int>> by_class;
        for (const auto& e : manifest.entries) by_class[e.label].push_back(e.index);
        for (auto& [label, idx] : by_class) {
            if (idx.size() < kFolds)
                throw std::invalid_argument(
                    "fold plan: class '" + manifest.class_names[label] +
                    "' has only " + std::to_string(idx.size()) +
                    " samples; stratified 10-fold needs at least 10");
            std::sort(idx.begin(), idx.end());
            std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ull *
                                        (static_cast<std::uint64_t>(label) + 1)));
            std::shuffle(idx.begin(), idx.end(), rng);
            for (std::size_t i = 0; i < idx.size(); ++i)
                test_fold[idx[i]] = static_cast<int>(i % kFolds);
        }
    }

    FoldPlan plan;
    plan.mode = mode;
    plan.seed = seed;
    plan.splits.resize(kFolds);
    for (int f = 0; f < kFolds; ++f) {
        for (int i = 0; i < n; ++i) {
            if (test_fold[i] == f)
                plan.splits[f].test.push_back(i);
            else if (test_fold[i] == (f + kFolds - 1) % kFolds)
                plan.splits[f].valid.push_back(i);
            else
                plan.splits[f].train.push_back(i);
        }
    }
    audit_fold_plan(plan, static_cast<std::size_t>(n));
    return plan;
}

void audit_fold_plan(const FoldPlan& plan, std::size_t n_entries) {
    if (plan.splits.size() != kFolds)
        throw std::runtime_error("fold plan: expected 10 folds, have " +
                                 std::to_string(plan.splits.size()));
    for (std::size_t f = 0; f < plan.splits.size(); ++f) {
        const auto& s = plan.splits[f];
        std::vector<int> role(n_entries, 0);
        auto mark = [&](const std::vector<int>& idx, const char* what) {
            for (int i : idx) {
                if (i < 0 || static_cast<std::size_t>(i) >= n_entries)
                    throw std::runtime_error("fold plan: fold " +
                                             std::to_string(f + 1) +
                                             " references out-of-range index " +
                                             std::to_string(i));
                if (role[i]++)
                    throw std::runtime_error(
                        "fold plan: leakage in fold " + std::to_string(f + 1) +
                        ": entry " + std::to_string(i) + " appears in " + what +
                        " and another role");
            }
        };
        mark(s.train, "train");
        mark(s.valid, "valid");
        mark(s.test, "test");
        for (std::size_t i = 0; i < n_entries; ++i)
            if (!role[i])
                throw std::runtime_error("fold plan: fold " + std::to_string(f + 1) +
                                         " drops entry " + std::to_string(i));
        if (s.test.empty() || s.valid.empty() || s.train.empty())
            throw std::runtime_error("fold plan: fold " + std::to_string(f + 1) +
                                     " has an empty role");
    }
}

std::string fold_mode_name(FoldMode mode) {
    return mode == FoldMode::Indexed ? "indexed" : "random-stratified";
}

}  // namespace leafrec
