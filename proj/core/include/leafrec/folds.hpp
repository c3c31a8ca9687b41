#ifndef LEAFREC_FOLDS_HPP
#define LEAFREC_FOLDS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "leafrec/manifest.hpp"

namespace leafrec {

enum class FoldMode { Indexed, RandomStratified };

struct FoldSplit {
    std::vector<int> train, valid, test;  // manifest indices
};

struct FoldPlan {
    FoldMode mode = FoldMode::Indexed;
    std::uint64_t seed = 0;
    std::vector<FoldSplit> splits;  // one per fold, 10 total
};

/// Indexed mode: sorted position p is test in fold (p mod 10)+1 and
/// validation in fold ((p+1) mod 10)+1, the remaining eight folds train.
/// Random-stratified mode: per-class shuffle dealt round-robin into test
/// folds; fold f validates on fold (f+1) mod 10's test set.
FoldPlan make_fold_plan(const DatasetManifest& manifest, FoldMode mode,
                        std::uint64_t seed = 0);

/// Throws when any fold's roles fail to partition 0..n-1 (leakage or
/// dropped entries).
void audit_fold_plan(const FoldPlan& plan, std::size_t n_entries);

std::string fold_mode_name(FoldMode mode);

}  // namespace leafrec

#endif
