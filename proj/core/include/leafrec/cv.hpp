#ifndef LEAFREC_CV_HPP
#define LEAFREC_CV_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "leafrec/features.hpp"
#include "leafrec/folds.hpp"
#include "leafrec/neural.hpp"
#include "leafrec/svm.hpp"

namespace leafrec {

struct CvConfig {
    TrainConfig conv2d_cfg{12, 32, 0.01, 0.9, 1e-4, 0.3, 1};
    TrainConfig conv1d_cfg{40, 32, 0.01, 0.9, 1e-4, 0.3, 1};
    TrainConfig dense_cfg{60, 32, 0.02, 0.9, 1e-4, 0.3, 1};
    GridSearchSpec grid;
    std::vector<int> folds;  // 1-based subset; empty = all ten
    std::uint64_t seed = 1;
    bool kkt_audit = false;  // re-derive alphas and audit after grid search
};

struct FoldResult {
    int fold = 0;  // 1-based
    double valid_acc = 0, test_acc = 0;
    double svm_c = 0, svm_gamma = 0;
    std::array<double, 7> branch_test_acc{};  // kBranchNames order
    bool kkt_ok = true;
    std::string error;  // non-empty when the fold aborted
};

struct CvReport {
    FoldMode mode = FoldMode::Indexed;
    std::uint64_t seed = 0;
    std::uint64_t config_hash = 0;
    bool partial = false;
    std::vector<FoldResult> folds;
    double mean_valid = 0, std_valid = 0;
    double mean_test = 0, std_test = 0;
    std::array<double, 7> branch_mean{};
    std::vector<std::vector<long>> confusion;  // [true][pred], all folds
};

/// Concatenates exactly seven 100-d embeddings in kBranchNames order into
/// the 700-d fused vector.
std::vector<double> fuse(const std::vector<std::vector<double>>& embeddings);

/// `features[i]` must hold the extracted set for manifest index i.
CvReport run_cv(const DatasetManifest& manifest, const FoldPlan& plan,
                const std::vector<LeafFeatureSet>& features, const CvConfig& cfg);

std::string cv_report_csv(const CvReport& r);
std::string cv_report_svg(const CvReport& r);

/// Canonical string of every hyperparameter, hashed into report files.
std::string cv_config_string(const CvConfig& cfg, FoldMode mode, int encoder_side);

}  // namespace leafrec

#endif
