#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mdgait/features.hpp"

namespace mdgait {

struct LogisticModel {
    std::vector<std::string> predictor_names; // excludes the intercept
    std::vector<double> coef; // intercept first, raw (unstandardized) scale
    std::vector<double> std_error;
    std::vector<double> p_value; // two-sided Wald
    double log_likelihood = 0.0;
    std::size_t n_train = 0;
    bool converged = false;
    // True when the fit failed to converge while its final iterate puts every
    // training row strictly on the correct side -- the signature of separable
    // classes, where no finite maximum-likelihood estimate exists. The
    // coefficients then hold that iterate: not an MLE, but a direction that
    // splits the training classes, usable for prediction.
    bool separated = false;
    std::vector<double> ll_trace; // log-likelihood after each IRLS iteration
};

// Maximum-likelihood logistic regression via IRLS with step halving.
// Predictors are z-scored internally; reported coefficients are on the raw
// scale. Separation (standardized coefficients diverging past 1e3) or a
// constant predictor yields converged = false.
LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y,
                           const std::vector<std::string>& names = {});

// p(X) = exp(eta) / (1 + exp(eta)), computed overflow-safely.
double predict(const LogisticModel& model, const std::vector<double>& x);

// -2 log L + (d+1) ln n, intercept counted; +infinity for unconverged fits.
double bic(const LogisticModel& model);

struct RocPoint {
    double threshold = 0.0;
    double fa = 0.0;
    double detection = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // false-alarm rate ascending
    double auc = 0.0;
};

RocCurve roc(const std::vector<double>& probs, const std::vector<int>& labels);

struct ThresholdChoice {
    double tau = 0.5;
    double fa = 0.0; // empirical false-alarm rate at tau
    double detection = 0.0; // empirical detection rate at tau
    bool feasible = false; // false-alarm bound achievable
};

// Smallest candidate threshold (midpoints between adjacent distinct
// probabilities plus outer bounds) whose empirical false-alarm rate meets
// fa_bound. If no candidate does (only possible when a negative sample has
// probability 1), the largest candidate is returned with feasible = false.
ThresholdChoice choose_threshold(const std::vector<double>& probs,
                                 const std::vector<int>& labels, double fa_bound = 0.05);

enum class Scenario { toward, away, both };

const char* scenario_name(Scenario s);
Scenario scenario_from_name(const std::string& name);

struct ModelSelectionResult {
    Scenario scenario = Scenario::both;
    std::uint32_t best_mask = 0; // bit j = feature j included
    double best_bic = std::numeric_limits<double>::infinity();
    LogisticModel best_model;
    std::vector<double> bic_by_mask; // size 256, index = mask (0 unused)
    std::array<double, 8> best_bic_per_order{}; // index d-1
    std::array<std::uint32_t, 8> best_mask_per_order{};
    std::size_t n_rows = 0;
};

// Exhaustive BIC search over all 255 nonempty predictor subsets.
ModelSelectionResult select_subsets(const Matrix& x, const std::vector<int>& y,
                                    const std::vector<std::string>& names);

// As above on a feature table, filtering rows by scenario and skipping rows
// whose flags mark a pipeline error.
ModelSelectionResult select_model(const FeatureTable& table, Scenario scenario);

struct LosoFold {
    std::string subject;
    Scenario scenario = Scenario::both;
    std::uint32_t mask = 0;
    std::vector<std::string> predictor_names;
    double tau = 0.5;
    bool tau_feasible = false;
    double pd_train = std::numeric_limits<double>::quiet_NaN();
    double fa_train = std::numeric_limits<double>::quiet_NaN();
    double pd_test = std::numeric_limits<double>::quiet_NaN(); // NaN: no positives held out
    double fa_test = std::numeric_limits<double>::quiet_NaN(); // NaN: no negatives held out
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::vector<std::string> flags;
};

// Leave-one-subject-out: select and fit on everyone else, threshold at
// fa_bound on the training rows, report detection/false-alarm rates on the
// held-out subject. When the training rows are perfectly separable (no subset
// has a finite-BIC fit), the smallest separating subset's last iterate is
// used instead and the fold is flagged "training_separable".
LosoFold evaluate_loso(const FeatureTable& table, const std::string& held_out,
                       Scenario scenario, double fa_bound = 0.05);

// Rows matching a scenario with usable (non-error) feature values.
FeatureTable filter_rows(const FeatureTable& table, Scenario scenario);

} // namespace mdgait
