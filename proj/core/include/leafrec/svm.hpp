#ifndef LEAFREC_SVM_HPP
#define LEAFREC_SVM_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafrec {

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

/// Per-dimension mean/std scaler fitted on training data only.
/// Zero-variance dimensions pass through unscaled.
struct Standardizer {
    std::vector<double> mean, scale;

    void fit(const std::vector<std::vector<double>>& x);
    std::vector<double> apply(std::span<const double> x) const;
    std::vector<std::vector<double>> apply_all(
        const std::vector<std::vector<double>>& x) const;
};

struct BinarySvm {
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> coef;  // alpha_i * y_i
    double bias = 0;
    double gamma = 1;
    double c = 1;

    double decision(std::span<const double> x) const;
};

struct SmoOptions {
    double tol = 1e-3;
    std::size_t max_passes = 100000;
};

/// SMO with maximal-KKT-violation working pair selection.
/// Labels must be -1/+1 with both classes present.
BinarySvm train_binary(const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double c, double gamma,
                       const SmoOptions& opts = {});

/// Dual objective of a trained machine on its training set (exposed for
/// the QP cross-check).
double dual_objective(const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y, const std::vector<double>& alpha,
                      double gamma);

/// Raw alphas of the last train_binary run paired with the solution
/// (needed by KKT audits and dual-objective comparisons).
struct BinarySvmFit {
    BinarySvm svm;
    std::vector<double> alpha;
};
BinarySvmFit train_binary_fit(const std::vector<std::vector<double>>& x,
                              const std::vector<int>& y, double c, double gamma,
                              const SmoOptions& opts = {});

/// One-vs-one multiclass model with the fitted input standardizer.
struct SvmModel {
    std::vector<int> class_labels;
    struct Pair {
        int a, b;  // class indices into class_labels; +1 = a, -1 = b
        BinarySvm svm;
    };
    std::vector<Pair> pairs;
    Standardizer standardizer;

    int predict(std::span<const double> x) const;
    std::vector<int> predict_all(const std::vector<std::vector<double>>& x) const;
};

/// Trains on already-standardized inputs when `standardize` is false;
/// otherwise fits the standardizer on x first.
SvmModel train_multiclass(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& labels, double c, double gamma,
                          bool standardize = true, const SmoOptions& opts = {});

struct GridSearchSpec {
    std::vector<double> c_values = {0.1, 1, 10, 100};
    std::vector<double> gamma_values;  // empty: {1e-3,1e-2,1e-1,1}/dim
};

struct GridSearchResult {
    double c = 0, gamma = 0;
    double valid_accuracy = 0;
    SvmModel model;
};

/// Exhaustive search; ties prefer smaller C, then smaller gamma.
GridSearchResult grid_search(const std::vector<std::vector<double>>& train_x,
                             const std::vector<int>& train_y,
                             const std::vector<std::vector<double>>& valid_x,
                             const std::vector<int>& valid_y,
                             const GridSearchSpec& spec = {});

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// KKT audit over the training set: alpha=0 => y f(x) >= 1-tol,
/// 0<alpha<C => |y f(x)-1| <= tol, alpha=C => y f(x) <= 1+tol.
bool kkt_satisfied(const std::vector<std::vector<double>>& x,
                   const std::vector<int>& y, const BinarySvmFit& fit,
                   double tol = 1e-3);

/// Re-derives every pairwise machine of `model` on its training data and
/// runs the KKT audit on each.
bool audit_multiclass_kkt(const SvmModel& model,
                          const std::vector<std::vector<double>>& x,
                          const std::vector<int>& labels, double tol = 1e-3,
                          const SmoOptions& opts = {});

void save_svm(const SvmModel& model, const std::string& path);
SvmModel load_svm(const std::string& path);

}  // namespace leafrec

#endif
