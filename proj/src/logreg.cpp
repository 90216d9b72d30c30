#include "eqbase/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "eqbase/skill.hpp"

namespace eqbase {

std::string to_string(Transform t) {
    switch (t) {
        case Transform::Raw: return "raw";
        case Transform::Log: return "log";
        case Transform::NegLog: return "neglog";
    }
    return "?";
}

Transform parse_transform(const std::string& text) {
    if (text == "raw") return Transform::Raw;
    if (text == "log") return Transform::Log;
    if (text == "neglog") return Transform::NegLog;
    throw std::invalid_argument("unknown feature transform '" + text + "'");
}

std::string to_string(FitStatus s) {
    switch (s) {
        case FitStatus::Converged: return "converged";
        case FitStatus::WeightCapReached: return "weight-cap-reached";
        case FitStatus::MaxIterations: return "max-iterations";
        case FitStatus::Stalled: return "stalled";
    }
    return "?";
}

namespace {

double apply(Transform t, double x, const std::string& name) {
    switch (t) {
        case Transform::Raw: return x;
        case Transform::Log:
        case Transform::NegLog:
            if (!(x > 0.0))
                throw FeatureDomainError("feature '" + name + "' must be > 0 for log transform");
            return t == Transform::Log ? std::log(x) : -std::log(x);
    }
    return x;
}

// log(1 + e^z) without overflow
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void LogisticModel::validate() const {
    if (weights.size() != features.size())
        throw std::invalid_argument("logistic model: weight count does not match feature count");
}

double LogisticModel::linear_predictor(std::span<const double> raw) const {
    validate();
    if (raw.size() != features.size())
        throw std::invalid_argument("logistic model: expected " + std::to_string(features.size()) +
                                    " features, got " + std::to_string(raw.size()));
    double eta = intercept;
    for (std::size_t k = 0; k < weights.size(); ++k)
        eta += weights[k] * apply(features[k].transform, raw[k], features[k].name);
    return eta;
}

double LogisticModel::predict_prob(std::span<const double> raw) const {
    return sigmoid(linear_predictor(raw));
}

double PowerLawForm::prob(double r, double d) const {
    return 1.0 / (1.0 + beta0_hat * std::pow(r, beta1) * std::pow(d, -beta2));
}

PowerLawForm to_power_law(const LogisticModel& model) {
    model.validate();
    if (model.features.size() != 2 || model.features[0].transform != Transform::NegLog ||
        model.features[1].transform != Transform::Log)
        throw std::invalid_argument("power-law form needs features (neglog r, log d)");
    return {std::exp(-model.intercept), model.weights[0], model.weights[1]};
}

void Dataset::push_back(std::span<const double> raw, int label) {
    if (raw.size() != cols()) throw std::invalid_argument("dataset: row width mismatch");
    if (label != 0 && label != 1) throw std::invalid_argument("dataset: label must be 0 or 1");
    values.insert(values.end(), raw.begin(), raw.end());
    labels.push_back(label);
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.spec = spec;
    for (auto i : indices) out.push_back(row(i), labels.at(i));
    return out;
}

namespace {

// Transformed design matrix; rows x cols, row-major.
std::vector<double> design(const Dataset& data) {
    std::vector<double> z(data.values.size());
    const std::size_t k = data.cols();
    for (std::size_t i = 0; i < data.rows(); ++i)
        for (std::size_t j = 0; j < k; ++j)
            z[i * k + j] = apply(data.spec[j].transform, data.values[i * k + j], data.spec[j].name);
    return z;
}

}  // namespace

ObjectiveValue logistic_objective(const Dataset& data, double intercept,
                                  std::span<const double> weights, double l2) {
    if (weights.size() != data.cols()) throw std::invalid_argument("objective: weight count mismatch");
    const auto z = design(data);
    const std::size_t n = data.rows();
    const std::size_t k = data.cols();
    ObjectiveValue out;
    out.gradient.assign(k + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = intercept;
        for (std::size_t j = 0; j < k; ++j) eta += weights[j] * z[i * k + j];
        const double y = data.labels[i];
        out.value += softplus(eta) - y * eta;
        const double r = sigmoid(eta) - y;
        out.gradient[0] += r;
        for (std::size_t j = 0; j < k; ++j) out.gradient[j + 1] += r * z[i * k + j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.value *= inv_n;
    for (auto& g : out.gradient) g *= inv_n;
    for (std::size_t j = 0; j < k; ++j) {
        out.value += 0.5 * l2 * weights[j] * weights[j];
        out.gradient[j + 1] += l2 * weights[j];
    }
    return out;
}

namespace {

// Optimization runs on standardized columns u = (z - mean) / scale. The map
// between (gamma) and (intercept, weights) is affine and invertible, so the
// objective below is exactly the documented one evaluated at the mapped point.
struct Standardized {
    std::size_t n = 0;
    std::size_t k = 0;
    std::vector<double> u;  // n x k
    std::vector<double> mean;
    std::vector<double> scale;
    std::vector<int> y;
    double l2 = 0.0;

    struct Eval {
        double value = 0.0;
        std::vector<double> grad_gamma;  // d f / d gamma
        std::vector<double> grad_beta;   // d f / d (intercept, weights)
        bool separated = false;
    };

    void to_beta(std::span<const double> gamma, double& intercept, std::vector<double>& w) const {
        w.resize(k);
        intercept = gamma[0];
        for (std::size_t j = 0; j < k; ++j) {
            w[j] = gamma[j + 1] / scale[j];
            intercept -= w[j] * mean[j];
        }
    }

    // Hessian of the objective in gamma coordinates, (k+1) x (k+1) row-major.
    std::vector<double> hessian(std::span<const double> gamma) const {
        const std::size_t d = k + 1;
        std::vector<double> h(d * d, 0.0);
        std::vector<double> x(d);
        x[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = u.data() + i * k;
            double eta = gamma[0];
            for (std::size_t j = 0; j < k; ++j) {
                x[j + 1] = row[j];
                eta += gamma[j + 1] * row[j];
            }
            const double p = sigmoid(eta);
            const double w = p * (1.0 - p);
            for (std::size_t a = 0; a < d; ++a)
                for (std::size_t b = a; b < d; ++b) h[a * d + b] += w * x[a] * x[b];
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) h[b * d + a] = h[a * d + b] *= inv_n;
        for (std::size_t j = 0; j < k; ++j) h[(j + 1) * d + j + 1] += l2 / (scale[j] * scale[j]);
        return h;
    }

    Eval evaluate(std::span<const double> gamma) const {
        Eval e;
        e.grad_gamma.assign(k + 1, 0.0);
        e.separated = true;
        for (std::size_t i = 0; i < n; ++i) {
            double eta = gamma[0];
            const double* row = u.data() + i * k;
            for (std::size_t j = 0; j < k; ++j) eta += gamma[j + 1] * row[j];
            const double yi = y[i];
            e.value += softplus(eta) - yi * eta;
            if ((yi > 0.5 ? eta : -eta) <= 0.0) e.separated = false;
            const double r = sigmoid(eta) - yi;
            e.grad_gamma[0] += r;
            for (std::size_t j = 0; j < k; ++j) e.grad_gamma[j + 1] += r * row[j];
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        e.value *= inv_n;
        for (auto& g : e.grad_gamma) g *= inv_n;

        // data term: d/dw_j = mean(r z_j) = scale_j * d/dgamma_j + mean_j * d/dintercept
        e.grad_beta.assign(k + 1, 0.0);
        e.grad_beta[0] = e.grad_gamma[0];
        for (std::size_t j = 0; j < k; ++j) {
            const double w = gamma[j + 1] / scale[j];
            e.grad_beta[j + 1] = e.grad_gamma[j + 1] * scale[j] + mean[j] * e.grad_gamma[0] + l2 * w;
            e.value += 0.5 * l2 * w * w;
            e.grad_gamma[j + 1] += l2 * w / scale[j];
        }
        if (l2 > 0.0) e.separated = false;
        return e;
    }
};

Standardized standardize(const Dataset& data, double l2) {
    Standardized s;
    s.n = data.rows();
    s.k = data.cols();
    s.u = design(data);
    s.y = data.labels;
    s.l2 = l2;
    s.mean.assign(s.k, 0.0);
    s.scale.assign(s.k, 1.0);
    for (std::size_t j = 0; j < s.k; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) m += s.u[i * s.k + j];
        m /= static_cast<double>(s.n);
        double v = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            const double d = s.u[i * s.k + j] - m;
            v += d * d;
        }
        const double sd = std::sqrt(v / static_cast<double>(s.n));
        s.mean[j] = m;
        s.scale[j] = sd > 0.0 ? sd : 1.0;
        for (std::size_t i = 0; i < s.n; ++i) s.u[i * s.k + j] = (s.u[i * s.k + j] - m) / s.scale[j];
    }
    return s;
}

// Solves H x = b for symmetric positive (semi)definite H by Cholesky, adding
// diagonal jitter when H is numerically singular.
std::vector<double> solve_spd(std::vector<double> h, std::vector<double> b) {
    const std::size_t d = b.size();
    double diag_max = 0.0;
    for (std::size_t i = 0; i < d; ++i) diag_max = std::max(diag_max, h[i * d + i]);
    const auto original = h;
    for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-12 * std::max(diag_max, 1e-300) : jitter * 100.0) {
        h = original;
        for (std::size_t i = 0; i < d; ++i) h[i * d + i] += jitter;
        bool ok = true;
        for (std::size_t j = 0; j < d && ok; ++j) {
            double s = h[j * d + j];
            for (std::size_t m = 0; m < j; ++m) s -= h[j * d + m] * h[j * d + m];
            if (!(s > 0.0)) {
                ok = false;
                break;
            }
            const double l = std::sqrt(s);
            h[j * d + j] = l;
            for (std::size_t i = j + 1; i < d; ++i) {
                double t = h[i * d + j];
                for (std::size_t m = 0; m < j; ++m) t -= h[i * d + m] * h[j * d + m];
                h[i * d + j] = t / l;
            }
        }
        if (!ok) {
            if (jitter > 1e6 * std::max(diag_max, 1.0)) throw std::runtime_error("Newton system is not positive definite");
            continue;
        }
        for (std::size_t i = 0; i < d; ++i) {
            double t = b[i];
            for (std::size_t m = 0; m < i; ++m) t -= h[i * d + m] * b[m];
            b[i] = t / h[i * d + i];
        }
        for (std::size_t i = d; i-- > 0;) {
            double t = b[i];
            for (std::size_t m = i + 1; m < d; ++m) t -= h[m * d + i] * b[m];
            b[i] = t / h[i * d + i];
        }
        return b;
    }
}

}  // namespace

LogisticFit fit_logistic(const Dataset& data, const LogisticFitOptions& options) {
    if (data.rows() == 0) throw std::invalid_argument("fit: empty dataset");
    const auto positives = std::count(data.labels.begin(), data.labels.end(), 1);
    if (positives == 0 || positives == static_cast<long>(data.rows()))
        throw std::invalid_argument("fit: data contain a single class");
    if (options.l2 < 0.0) throw std::invalid_argument("fit: l2 must be >= 0");

    const Standardized prob = standardize(data, options.l2);
    const std::size_t dim = prob.k + 1;

    LogisticFit fit;
    fit.model.features = data.spec;

    std::vector<double> gamma(dim, 0.0);
    auto cur = prob.evaluate(gamma);
    std::vector<double> prev_gamma;
    std::vector<double> prev_grad;
    double step = 1.0;
    constexpr double kArmijo = 1e-4;

    for (fit.iterations = 0;; ++fit.iterations) {
        fit.gradient_norm = norm2(cur.grad_beta);
        double intercept;
        std::vector<double> w;
        prob.to_beta(gamma, intercept, w);
        fit.model.intercept = intercept;
        fit.model.weights = w;
        fit.objective = cur.value;

        if (norm2(w) >= options.max_weight_norm) {
            fit.status = FitStatus::WeightCapReached;
            break;
        }
        // On strictly separated data the infimum lies at infinity, so a small
        // gradient is not convergence.
        if (fit.gradient_norm <= options.tolerance && !cur.separated) {
            fit.status = FitStatus::Converged;
            break;
        }
        if (fit.iterations >= options.max_iterations) {
            fit.status = FitStatus::MaxIterations;
            break;
        }

        std::vector<double> direction(dim);
        if (options.solver == Solver::Newton) {
            std::vector<double> rhs(dim);
            for (std::size_t j = 0; j < dim; ++j) rhs[j] = -cur.grad_gamma[j];
            direction = solve_spd(prob.hessian(gamma), rhs);
            step = 1.0;
        } else {
            // Barzilai-Borwein trial step
            if (!prev_gamma.empty()) {
                double ss = 0.0, sy = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    const double s = gamma[j] - prev_gamma[j];
                    const double y = cur.grad_gamma[j] - prev_grad[j];
                    ss += s * s;
                    sy += s * y;
                }
                step = sy > 0.0 ? ss / sy : step * 2.0;
            }
            for (std::size_t j = 0; j < dim; ++j) direction[j] = -cur.grad_gamma[j];
        }
        double slope = 0.0;  // directional derivative, < 0 for a descent direction
        for (std::size_t j = 0; j < dim; ++j) slope += direction[j] * cur.grad_gamma[j];
        if (!(slope < 0.0)) {
            fit.status = FitStatus::Stalled;
            break;
        }

        // backtrack until the Armijo condition holds
        std::vector<double> trial(dim);
        Standardized::Eval next;
        bool accepted = false;
        for (int halvings = 0; halvings < 80; ++halvings) {
            for (std::size_t j = 0; j < dim; ++j) trial[j] = gamma[j] + step * direction[j];
            next = prob.evaluate(trial);
            // Near the optimum the Armijo decrease drops below rounding; a step
            // that does not raise the objective and shrinks the gradient is kept.
            if (next.value <= cur.value + kArmijo * step * slope ||
                (next.value <= cur.value && norm2(next.grad_gamma) < norm2(cur.grad_gamma))) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            fit.status = FitStatus::Stalled;
            break;
        }
        prev_gamma = std::move(gamma);
        prev_grad = cur.grad_gamma;
        gamma = trial;
        cur = std::move(next);
        if (options.keep_trace) fit.trace.push_back(cur.value);
    }
    return fit;
}

double evaluate_auc(const LogisticModel& model, const Dataset& data) {
    if (model.features.size() != data.cols())
        throw std::invalid_argument("evaluate_auc: model and data disagree on feature count");
    // The linear predictor is a strictly increasing transform of the
    // probability and does not saturate to ties in floating point.
    std::vector<ScoredLabel> scored;
    scored.reserve(data.rows());
    for (std::size_t i = 0; i < data.rows(); ++i)
        scored.emplace_back(model.linear_predictor(data.row(i)), data.labels[i]);
    const auto auc = roc_auc(scored);
    if (!auc) throw std::invalid_argument("evaluate_auc: both classes required");
    return *auc;
}

std::string model_to_json(const LogisticModel& model, int indent) {
    nlohmann::json spec = nlohmann::json::array();
    for (const auto& f : model.features)
        spec.push_back({{"name", f.name}, {"transform", to_string(f.transform)}});
    nlohmann::ordered_json j;
    j["intercept"] = model.intercept;
    j["weights"] = model.weights;
    j["feature_spec"] = spec;
    return j.dump(indent);
}

LogisticModel model_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    LogisticModel m;
    m.intercept = j.at("intercept").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& f : j.at("feature_spec"))
        m.features.push_back({f.at("name").get<std::string>(),
                              parse_transform(f.at("transform").get<std::string>())});
    m.validate();
    return m;
}

}  // namespace eqbase
