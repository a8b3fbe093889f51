#include "mdgait/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "mdgait/errors.hpp"

namespace mdgait {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxIterations = 100;
constexpr double kCoefTolerance = 1e-8;
constexpr double kSeparationLimit = 1e3;
// Diagonal loading relative to the normal equations' own scale: enough to
// solve exactly collinear subsets, but never competing with the data term,
// whose magnitude collapses when a separated fit saturates.
constexpr double kRidge = 1e-10;

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
    return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double bernoulli_ll(const Eigen::VectorXd& eta, const std::vector<int>& y) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += static_cast<double>(y[static_cast<std::size_t>(i)]) * eta[i] - softplus(eta[i]);
    return ll;
}

double wald_p(double coef, double se) {
    if (!std::isfinite(se) || se <= 0) return 1.0;
    return std::erfc(std::abs(coef / se) / std::numbers::sqrt2);
}

} // namespace

LogisticModel fit_logistic(const Matrix& x, const std::vector<int>& y,
                           const std::vector<std::string>& names) {
    const std::size_t n = y.size();
    if (x.rows() != n) throw ValidationError("fit: label count does not match the design matrix");
    if (n == 0) throw DataError("fit: no samples");
    const std::size_t d = x.cols();
    if (!names.empty() && names.size() != d)
        throw ValidationError("fit: predictor name count mismatch");

    std::size_t positives = 0;
    for (int v : y) {
        if (v != 0 && v != 1) throw ValidationError("fit: labels must be 0 or 1");
        positives += static_cast<std::size_t>(v);
    }
    if (positives == 0 || positives == n) throw DataError("fit: need samples of both classes");

    LogisticModel model;
    model.n_train = n;
    if (names.empty()) {
        for (std::size_t j = 0; j < d; ++j) model.predictor_names.push_back("x" + std::to_string(j + 1));
    } else {
        model.predictor_names = names;
    }
    model.coef.assign(d + 1, 0.0);
    model.std_error.assign(d + 1, kNaN);
    model.p_value.assign(d + 1, kNaN);
    model.log_likelihood = -kInf;

    // Standardize predictors; a constant predictor cannot be estimated.
    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x(i, j);
        m /= static_cast<double>(n);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = x(i, j) - m;
            v += dx * dx;
        }
        mean[j] = m;
        sd[j] = std::sqrt(v / static_cast<double>(n));
        if (!(sd[j] > 0)) return model; // converged = false
    }

    const auto ni = static_cast<Eigen::Index>(n);
    const auto di = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd design(ni, di + 1);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < n; ++i)
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j) + 1) =
                (x(i, j) - mean[j]) / sd[j];

    Eigen::VectorXd b = Eigen::VectorXd::Zero(di + 1);
    Eigen::VectorXd eta = design * b;
    double ll = bernoulli_ll(eta, y);
    model.ll_trace.push_back(ll);

    Eigen::VectorXd p(ni), w(ni), z(ni);
    bool converged = false, separated = false;
    for (int it = 0; it < kMaxIterations; ++it) {
        for (Eigen::Index i = 0; i < ni; ++i) {
            // Residual and weight via the complementary sigmoid: y - p computed
            // directly would round to zero once |eta| passes ~37, freezing the
            // iteration at a spurious fixed point on separated data.
            const double q = sigmoid(-eta[i]); // 1 - p
            p[i] = sigmoid(eta[i]);
            w[i] = std::max(p[i] * q, 1e-300);
            const double residual = y[static_cast<std::size_t>(i)] == 1 ? q : -p[i];
            z[i] = eta[i] + residual / w[i];
        }
        Eigen::MatrixXd a = design.transpose() * w.asDiagonal() * design;
        a.diagonal().array() += kRidge * a.diagonal().maxCoeff() + 1e-300;
        Eigen::VectorXd rhs = design.transpose() * (w.array() * z.array()).matrix();
        Eigen::VectorXd b_new = a.ldlt().solve(rhs);

        // Halve the step until the log-likelihood stops decreasing.
        Eigen::VectorXd eta_new = design * b_new;
        double ll_new = bernoulli_ll(eta_new, y);
        for (int h = 0; h < 30 && ll_new < ll - 1e-10; ++h) {
            b_new = 0.5 * (b_new + b);
            eta_new = design * b_new;
            ll_new = bernoulli_ll(eta_new, y);
        }

        const double delta = (b_new - b).cwiseAbs().maxCoeff();
        b = b_new;
        eta = eta_new;
        ll = ll_new;
        model.ll_trace.push_back(ll);

        if (b.cwiseAbs().maxCoeff() > kSeparationLimit) {
            separated = true;
            break;
        }
        if (delta < kCoefTolerance) {
            converged = true;
            break;
        }
    }
    // On separable data the coefficient norm grows by a bounded increment per
    // iteration, so the hard limit above may not be reached within the
    // iteration cap. The reliable signature is the combination that remains:
    // no convergence, yet every training point strictly on its correct side.
    if (!converged && !separated) {
        bool all_correct = true;
        for (Eigen::Index i = 0; i < ni && all_correct; ++i)
            all_correct = y[static_cast<std::size_t>(i)] == 1 ? eta[i] > 0 : eta[i] < 0;
        separated = all_correct;
    }
    model.converged = converged && !separated;
    model.separated = separated;
    model.log_likelihood = ll;

    // Back to raw scale.
    double intercept = b[0];
    for (std::size_t j = 0; j < d; ++j) {
        model.coef[j + 1] = b[static_cast<Eigen::Index>(j) + 1] / sd[j];
        intercept -= b[static_cast<Eigen::Index>(j) + 1] * mean[j] / sd[j];
    }
    model.coef[0] = intercept;

    if (model.converged) {
        // Observed information on the raw scale for Wald standard errors.
        Eigen::MatrixXd raw(ni, di + 1);
        raw.col(0).setOnes();
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t i = 0; i < n; ++i)
                raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j) + 1) = x(i, j);
        for (Eigen::Index i = 0; i < ni; ++i) w[i] = sigmoid(eta[i]) * sigmoid(-eta[i]);
        Eigen::MatrixXd info = raw.transpose() * w.asDiagonal() * raw;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
        if (lu.isInvertible()) {
            Eigen::MatrixXd cov = lu.inverse();
            for (std::size_t j = 0; j <= d; ++j) {
                const double v = cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
                model.std_error[j] = v > 0 ? std::sqrt(v) : kInf;
            }
        } else {
            std::fill(model.std_error.begin(), model.std_error.end(), kInf);
        }
        for (std::size_t j = 0; j <= d; ++j)
            model.p_value[j] = wald_p(model.coef[j], model.std_error[j]);
    }
    return model;
}

double predict(const LogisticModel& model, const std::vector<double>& x) {
    if (model.coef.size() != model.predictor_names.size() + 1)
        throw ValidationError("predict: model has no fitted coefficients");
    if (x.size() != model.predictor_names.size())
        throw ValidationError("predict: expected " +
                              std::to_string(model.predictor_names.size()) + " predictors");
    double eta = model.coef[0];
    for (std::size_t j = 0; j < x.size(); ++j) eta += model.coef[j + 1] * x[j];
    return sigmoid(eta);
}

double bic(const LogisticModel& model) {
    if (!model.converged) return kInf;
    if (model.n_train == 0) throw ValidationError("bic: model was not fitted");
    return -2.0 * model.log_likelihood +
           static_cast<double>(model.coef.size()) * std::log(static_cast<double>(model.n_train));
}

RocCurve roc(const std::vector<double>& probs, const std::vector<int>& labels) {
    if (probs.size() != labels.size() || probs.empty())
        throw ValidationError("roc: scores and labels disagree");
    std::size_t npos = 0;
    for (int v : labels) npos += static_cast<std::size_t>(v != 0);
    const std::size_t nneg = probs.size() - npos;
    if (npos == 0 || nneg == 0) throw DataError("roc: need samples of both classes");

    std::vector<std::size_t> order(probs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

    RocCurve curve;
    curve.points.push_back({1.0, 0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = probs[order[i]];
        // Consume the whole tie group: decisions are p >= threshold.
        while (i < order.size() && probs[order[i]] == threshold) {
            if (labels[order[i]] != 0)
                ++tp;
            else
                ++fp;
            ++i;
        }
        curve.points.push_back({threshold, static_cast<double>(fp) / static_cast<double>(nneg),
                                static_cast<double>(tp) / static_cast<double>(npos)});
    }
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
        const auto& a = curve.points[k - 1];
        const auto& b = curve.points[k];
        curve.auc += (b.fa - a.fa) * (a.detection + b.detection) / 2.0;
    }
    return curve;
}

ThresholdChoice choose_threshold(const std::vector<double>& probs,
                                 const std::vector<int>& labels, double fa_bound) {
    if (probs.size() != labels.size() || probs.empty())
        throw ValidationError("threshold: scores and labels disagree");
    if (!(fa_bound >= 0 && fa_bound <= 1))
        throw ValidationError("threshold: fa_bound must be in [0, 1]");
    std::size_t npos = 0;
    for (int v : labels) npos += static_cast<std::size_t>(v != 0);
    const std::size_t nneg = probs.size() - npos;
    if (npos == 0 || nneg == 0) throw DataError("threshold: need samples of both classes");

    std::vector<double> distinct(probs);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<double> candidates;
    candidates.push_back(distinct.front() / 2.0);
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    candidates.push_back((distinct.back() + 1.0) / 2.0);

    auto rates = [&](double tau) {
        std::size_t fa = 0, det = 0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            if (probs[i] >= tau) {
                if (labels[i] != 0)
                    ++det;
                else
                    ++fa;
            }
        }
        return std::pair<double, double>{static_cast<double>(fa) / static_cast<double>(nneg),
                                         static_cast<double>(det) / static_cast<double>(npos)};
    };

    ThresholdChoice choice;
    choice.feasible = false;
    double tau = candidates.back();
    for (double c : candidates) {
        if (rates(c).first <= fa_bound) {
            tau = c;
            choice.feasible = true;
            break;
        }
    }
    // Keep tau inside (0, 1); only the degenerate ends are affected, and
    // clamping the lower end can only reduce the false-alarm rate further.
    tau = std::clamp(tau, std::numeric_limits<double>::denorm_min(), 1.0 - 1e-12);
    auto [fa, det] = rates(tau);
    choice.tau = tau;
    choice.fa = fa;
    choice.detection = det;
    return choice;
}

const char* scenario_name(Scenario s) {
    switch (s) {
        case Scenario::toward: return "toward";
        case Scenario::away: return "away";
        default: return "both";
    }
}

Scenario scenario_from_name(const std::string& name) {
    if (name == "toward") return Scenario::toward;
    if (name == "away") return Scenario::away;
    if (name == "both") return Scenario::both;
    throw ValidationError("unknown scenario '" + name + "' (toward, away, or both)");
}

FeatureTable filter_rows(const FeatureTable& table, Scenario scenario) {
    FeatureTable out;
    for (const auto& row : table) {
        if (row.flags.find("error") != std::string::npos) continue;
        if (scenario == Scenario::toward && row.direction != Direction::toward) continue;
        if (scenario == Scenario::away && row.direction != Direction::away) continue;
        out.push_back(row);
    }
    return out;
}

ModelSelectionResult select_subsets(const Matrix& x, const std::vector<int>& y,
                                    const std::vector<std::string>& names) {
    if (x.cols() != 8 || names.size() != 8)
        throw ValidationError("select: expected the 8-feature design");
    if (x.rows() != y.size() || y.empty()) throw ValidationError("select: labels disagree");

    ModelSelectionResult result;
    result.n_rows = y.size();
    result.bic_by_mask.assign(256, kInf);
    result.best_bic_per_order.fill(kInf);
    result.best_mask_per_order.fill(0);

    for (std::uint32_t mask = 1; mask < 256; ++mask) {
        std::vector<std::size_t> cols;
        std::vector<std::string> sub_names;
        for (std::size_t j = 0; j < 8; ++j)
            if (mask & (1u << j)) {
                cols.push_back(j);
                sub_names.push_back(names[j]);
            }
        Matrix sub(x.rows(), cols.size());
        for (std::size_t i = 0; i < x.rows(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = x(i, cols[j]);

        LogisticModel model = fit_logistic(sub, y, sub_names);
        const double value = bic(model);
        result.bic_by_mask[mask] = value;

        const auto order = static_cast<std::size_t>(std::popcount(mask));
        if (value < result.best_bic_per_order[order - 1]) {
            result.best_bic_per_order[order - 1] = value;
            result.best_mask_per_order[order - 1] = mask;
        }
        if (value < result.best_bic) {
            result.best_bic = value;
            result.best_mask = mask;
            result.best_model = std::move(model);
        }
    }
    if (result.best_mask == 0) throw DataError("select: no predictor subset converged");
    return result;
}

namespace {

void table_design(const FeatureTable& rows, Matrix& x, std::vector<int>& y) {
    x = Matrix(rows.size(), 8);
    y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < 8; ++j) x(i, j) = rows[i].features[j];
        y[i] = rows[i].label != 0 ? 1 : 0;
    }
}

std::vector<double> subset_values(const FeatureRow& row, std::uint32_t mask) {
    std::vector<double> v;
    for (std::size_t j = 0; j < 8; ++j)
        if (mask & (1u << j)) v.push_back(row.features[j]);
    return v;
}

} // namespace

ModelSelectionResult select_model(const FeatureTable& table, Scenario scenario) {
    FeatureTable rows = filter_rows(table, scenario);
    if (rows.empty()) throw DataError("select: no usable rows for this scenario");
    Matrix x;
    std::vector<int> y;
    table_design(rows, x, y);
    std::vector<std::string> names(FeatureVector::names().begin(), FeatureVector::names().end());
    ModelSelectionResult result = select_subsets(x, y, names);
    result.scenario = scenario;
    return result;
}

LosoFold evaluate_loso(const FeatureTable& table, const std::string& held_out,
                       Scenario scenario, double fa_bound) {
    FeatureTable rows = filter_rows(table, scenario);
    FeatureTable train, test;
    for (const auto& row : rows)
        (row.subject == held_out ? test : train).push_back(row);
    if (test.empty()) throw DataError("evaluate: held-out subject '" + held_out + "' absent");
    if (train.empty()) throw DataError("evaluate: no training rows left");

    Matrix x;
    std::vector<int> y;
    table_design(train, x, y);
    std::vector<std::string> names(FeatureVector::names().begin(), FeatureVector::names().end());

    ModelSelectionResult selection;
    bool separable_training = false;
    try {
        selection = select_subsets(x, y, names);
    } catch (const DataError&) {
        // Perfectly separable training data leaves every subset without a
        // finite maximum-likelihood fit, so BIC cannot rank them -- but the
        // fold still has a working detector. Fall back to the smallest subset
        // whose fit separated the classes and score with its last iterate,
        // which splits the training rows with zero error by construction.
        for (std::size_t order = 1; order <= 8 && !separable_training; ++order)
            for (std::uint32_t mask = 1; mask < 256; ++mask) {
                if (static_cast<std::size_t>(std::popcount(mask)) != order) continue;
                std::vector<std::size_t> cols;
                std::vector<std::string> sub_names;
                for (std::size_t j = 0; j < 8; ++j)
                    if (mask & (1u << j)) {
                        cols.push_back(j);
                        sub_names.push_back(names[j]);
                    }
                Matrix sub(x.rows(), cols.size());
                for (std::size_t i = 0; i < x.rows(); ++i)
                    for (std::size_t j = 0; j < cols.size(); ++j) sub(i, j) = x(i, cols[j]);
                LogisticModel fit = fit_logistic(sub, y, sub_names);
                if (fit.separated) {
                    selection.best_mask = mask;
                    selection.best_model = std::move(fit);
                    separable_training = true;
                    break;
                }
            }
        if (!separable_training) throw;
    }

    LosoFold fold;
    fold.subject = held_out;
    fold.scenario = scenario;
    fold.mask = selection.best_mask;
    fold.predictor_names = selection.best_model.predictor_names;
    fold.n_train = train.size();
    fold.n_test = test.size();
    if (separable_training) fold.flags.push_back("training_separable");

    std::vector<double> train_probs(train.size());
    for (std::size_t i = 0; i < train.size(); ++i)
        train_probs[i] = predict(selection.best_model, subset_values(train[i], fold.mask));
    ThresholdChoice choice = choose_threshold(train_probs, y, fa_bound);
    fold.tau = choice.tau;
    fold.tau_feasible = choice.feasible;
    fold.pd_train = choice.detection;
    fold.fa_train = choice.fa;
    if (!choice.feasible) fold.flags.push_back("fa_bound_infeasible");

    std::size_t tp = 0, fp = 0, pos = 0, neg = 0;
    for (const auto& row : test) {
        const double p = predict(selection.best_model, subset_values(row, fold.mask));
        const bool declared = p >= fold.tau;
        if (row.label != 0) {
            ++pos;
            tp += declared;
        } else {
            ++neg;
            fp += declared;
        }
    }
    if (pos > 0)
        fold.pd_test = static_cast<double>(tp) / static_cast<double>(pos);
    else
        fold.flags.push_back("no_positives_held_out");
    if (neg > 0)
        fold.fa_test = static_cast<double>(fp) / static_cast<double>(neg);
    else
        fold.flags.push_back("no_negatives_held_out");
    return fold;
}

} // namespace mdgait
