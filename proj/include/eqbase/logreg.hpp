#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace eqbase {

/// Per-feature input transform applied before the linear predictor.
enum class Transform {
    Raw,     ///< x
    Log,     ///< ln x, x > 0
    NegLog,  ///< -ln x, x > 0
};

std::string to_string(Transform t);
Transform parse_transform(const std::string& text);

struct FeatureSpec {
    std::string name;
    Transform transform = Transform::Raw;

    bool operator==(const FeatureSpec&) const = default;
};

/// Raised for inputs outside a feature transform's domain.
class FeatureDomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Single-neuron classifier sigmoid(intercept + sum_k w_k f_k(x_k)).
struct LogisticModel {
    double intercept = 0.0;
    std::vector<double> weights;
    std::vector<FeatureSpec> features;

    void validate() const;
    /// intercept + sum_k w_k f_k(x_k), on untransformed inputs.
    double linear_predictor(std::span<const double> raw) const;
    double predict_prob(std::span<const double> raw) const;
};

/// Pr(Y=1 | r, d) = 1 / (1 + beta0_hat r^beta1 d^-beta2).
struct PowerLawForm {
    double beta0_hat = 1.0;
    double beta1 = 0.0;
    double beta2 = 0.0;

    double prob(double r, double d) const;
};

/// Requires the (NegLog r, Log d) feature layout; beta0_hat = e^{-intercept}.
PowerLawForm to_power_law(const LogisticModel& model);

/// Stable logistic function.
double sigmoid(double z);

/// Row-major table of raw feature values with binary labels.
struct Dataset {
    std::vector<FeatureSpec> spec;
    std::vector<double> values;
    std::vector<int> labels;

    std::size_t cols() const { return spec.size(); }
    std::size_t rows() const { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * cols(), cols()}; }
    void push_back(std::span<const double> raw, int label);
    /// Row subset, order preserved.
    Dataset subset(std::span<const std::size_t> indices) const;
};

enum class Solver {
    /// Gradient descent with Barzilai-Borwein trial steps and backtracking.
    /// Reference method; slow on ill-conditioned data.
    GradientDescent,
    /// Damped Newton with the same backtracking rule. Reaches the same
    /// optimum in a handful of iterations.
    Newton,
};

struct LogisticFitOptions {
    double l2 = 0.0;             ///< lambda in mean CE + lambda/2 |w|^2 (intercept unpenalized)
    double tolerance = 1e-8;     ///< on the Euclidean norm of the full gradient
    int max_iterations = 20000;
    double max_weight_norm = 1e3;
    Solver solver = Solver::Newton;
    /// Record the objective after each accepted step.
    bool keep_trace = false;
};

enum class FitStatus {
    Converged,
    WeightCapReached,  ///< |w| hit max_weight_norm (separable data)
    MaxIterations,
    Stalled,  ///< line search could not decrease the objective further
};

std::string to_string(FitStatus s);

struct LogisticFit {
    LogisticModel model;
    FitStatus status = FitStatus::MaxIterations;
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
    std::vector<double> trace;
};

/// Objective value and gradient (intercept first) for given parameters.
struct ObjectiveValue {
    double value = 0.0;
    std::vector<double> gradient;
};

ObjectiveValue logistic_objective(const Dataset& data, double intercept,
                                  std::span<const double> weights, double l2);

/// Full-batch descent with backtracking line search, starting from zeros.
/// The objective never increases between iterations.
/// Throws std::invalid_argument on single-class data or bad feature values.
LogisticFit fit_logistic(const Dataset& data, const LogisticFitOptions& options = {});

/// AUC of the model's scores on `data`.
double evaluate_auc(const LogisticModel& model, const Dataset& data);

/// Model JSON {intercept, weights[], feature_spec[]}.
std::string model_to_json(const LogisticModel& model, int indent = 2);
LogisticModel model_from_json(const std::string& text);

}  // namespace eqbase
