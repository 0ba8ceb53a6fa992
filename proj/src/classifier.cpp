#include "bidsim/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace bidsim {

namespace {

void check_dims(const Theta& theta, const FeatureVector& x) {
    if (theta.size() != x.size()) {
        throw std::invalid_argument("feature length " + std::to_string(x.size()) +
                                    " does not match theta length " + std::to_string(theta.size()));
    }
}

void check_set(const Theta& theta, const TrainingSet& data, double l2) {
    if (data.size() == 0) {
        throw std::invalid_argument("empty training set");
    }
    if (l2 < 0.0) {
        throw std::invalid_argument("l2 penalty must be >= 0");
    }
    for (const Sample& s : data.samples) {
        check_dims(theta, s.x);
    }
}

double linear_term(const Theta& theta, const FeatureVector& x) {
    double z = theta.bias;
    for (std::size_t j = 0; j < x.slots.size(); ++j) {
        if (x.slots[j]) {
            z += theta.weights[j];
        }
    }
    return z;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) {
        s += a * a;
    }
    return std::sqrt(s);
}

// In-place lower Cholesky of a dense symmetric matrix (row-major). Fails when
// a pivot is not safely positive.
bool cholesky(std::vector<double>& a, std::size_t n) {
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::fabs(a[i * n + i]));
    }
    const double floor = scale * 1e-13;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) {
            d -= a[j * n + k] * a[j * n + k];
        }
        if (!(d > floor) || !std::isfinite(d)) {
            return false;
        }
        d = std::sqrt(d);
        a[j * n + j] = d;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    return true;
}

// Solves L L^T x = b given the Cholesky factor L.
std::vector<double> cholesky_solve(const std::vector<double>& l, std::size_t n, const std::vector<double>& b) {
    std::vector<double> x(b);
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) {
            s -= l[k * n + ii] * x[k];
        }
        x[ii] = s / l[ii * n + ii];
    }
    return x;
}

}  // namespace

double sigmoid(double z) {
    if (!std::isfinite(z)) {
        throw std::domain_error("sigmoid: input must be finite");
    }
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double hypothesis(const Theta& theta, const FeatureVector& x) {
    check_dims(theta, x);
    return sigmoid(linear_term(theta, x));
}

double cost(const Theta& theta, const TrainingSet& data, double l2) {
    check_set(theta, data, l2);
    const double m = static_cast<double>(data.size());
    double sum = 0.0;
    for (const Sample& s : data.samples) {
        const double z = linear_term(theta, s.x);
        const double y = static_cast<double>(s.y);
        // log(1 + e^z) - y*z, split by sign of z so exp never overflows
        if (z > 0.0) {
            sum += (1.0 - y) * z + std::log1p(std::exp(-z));
        } else {
            sum += -y * z + std::log1p(std::exp(z));
        }
    }
    double penalty = 0.0;
    if (l2 > 0.0) {
        double w2 = 0.0;
        for (double w : theta.weights) {
            w2 += w * w;
        }
        penalty = l2 / (2.0 * m) * w2;
    }
    return sum / m + penalty;
}

std::vector<double> gradient(const Theta& theta, const TrainingSet& data, double l2) {
    check_set(theta, data, l2);
    const double m = static_cast<double>(data.size());
    const std::size_t n = theta.size();
    std::vector<double> g(n + 1, 0.0);
    for (const Sample& s : data.samples) {
        const double r = sigmoid(linear_term(theta, s.x)) - static_cast<double>(s.y);
        g[0] += r;
        for (std::size_t j = 0; j < n; ++j) {
            if (s.x.slots[j]) {
                g[j + 1] += r;
            }
        }
    }
    for (double& v : g) {
        v /= m;
    }
    if (l2 > 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
            g[j + 1] += l2 / m * theta.weights[j];
        }
    }
    return g;
}

std::pair<Theta, TrainReport> train(const TrainingSet& data, const TrainConfig& config) {
    if (config.grad_tolerance <= 0.0) {
        throw std::invalid_argument("grad_tolerance must be > 0");
    }
    if (config.max_iterations < 1) {
        throw std::invalid_argument("max_iterations must be >= 1");
    }
    if (data.size() == 0) {
        throw std::invalid_argument("empty training set");
    }
    const std::size_t n = data.window();
    if (n == 0) {
        throw std::invalid_argument("window length must be >= 1");
    }
    for (const Sample& s : data.samples) {
        if (s.x.size() != n) {
            throw std::invalid_argument("all feature vectors must share the same window length");
        }
        if (s.y != 0 && s.y != 1) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
        for (std::uint8_t v : s.x.slots) {
            if (v > 1) {
                throw std::invalid_argument("feature slots must be 0 or 1");
            }
        }
    }

    const std::size_t dim = n + 1;
    const double m = static_cast<double>(data.size());
    Theta theta{0.0, std::vector<double>(n, 0.0)};

    double j = cost(theta, data, config.l2_penalty);
    std::vector<double> g = gradient(theta, data, config.l2_penalty);
    double gnorm = norm2(g);

    std::vector<double> hess(dim * dim);
    std::vector<double> design_row(dim);
    std::size_t iter = 0;

    while (gnorm > config.grad_tolerance && iter < config.max_iterations) {
        if (!std::isfinite(j) || !std::isfinite(gnorm)) {
            throw std::runtime_error("non-finite value encountered during optimization");
        }

        // H = (1/m) sum h(1-h) a a^T + (l2/m) on the weight diagonal,
        // a = [1; x]. Features are binary, so a a^T is an indicator pattern.
        std::fill(hess.begin(), hess.end(), 0.0);
        for (const Sample& s : data.samples) {
            const double h = sigmoid(linear_term(theta, s.x));
            const double w = h * (1.0 - h);
            design_row[0] = 1.0;
            for (std::size_t k = 0; k < n; ++k) {
                design_row[k + 1] = s.x.slots[k] ? 1.0 : 0.0;
            }
            for (std::size_t r = 0; r < dim; ++r) {
                if (design_row[r] == 0.0) {
                    continue;
                }
                for (std::size_t c = 0; c <= r; ++c) {
                    if (design_row[c] != 0.0) {
                        hess[r * dim + c] += w;
                    }
                }
            }
        }
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c <= r; ++c) {
                hess[r * dim + c] /= m;
                hess[c * dim + r] = hess[r * dim + c];
            }
        }
        if (config.l2_penalty > 0.0) {
            for (std::size_t k = 1; k < dim; ++k) {
                hess[k * dim + k] += config.l2_penalty / m;
            }
        }

        // Newton direction, with an escalating ridge when the Hessian is
        // singular (saturated or constant features).
        std::vector<double> dir;
        double ridge = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt) {
            std::vector<double> a(hess);
            if (ridge > 0.0) {
                for (std::size_t k = 0; k < dim; ++k) {
                    a[k * dim + k] += ridge;
                }
            }
            if (cholesky(a, dim)) {
                dir = cholesky_solve(a, dim, g);
                for (double& v : dir) {
                    v = -v;
                }
                break;
            }
            ridge = ridge == 0.0 ? 1e-8 : ridge * 100.0;
        }
        double slope = 0.0;
        if (!dir.empty()) {
            for (std::size_t k = 0; k < dim; ++k) {
                slope += g[k] * dir[k];
            }
        }
        if (dir.empty() || !(slope < 0.0) || !std::isfinite(slope)) {
            // steepest descent fallback
            dir.assign(g.begin(), g.end());
            for (double& v : dir) {
                v = -v;
            }
            slope = -gnorm * gnorm;
        }

        // Armijo backtracking
        double step = 1.0;
        bool accepted = false;
        Theta trial = theta;
        double jt = j;
        for (int halvings = 0; halvings < 64; ++halvings) {
            trial.bias = theta.bias + step * dir[0];
            for (std::size_t k = 0; k < n; ++k) {
                trial.weights[k] = theta.weights[k] + step * dir[k + 1];
            }
            jt = cost(trial, data, config.l2_penalty);
            if (std::isfinite(jt) && jt <= j + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;  // step underflow, no further progress possible
        }

        theta = trial;
        j = jt;
        g = gradient(theta, data, config.l2_penalty);
        gnorm = norm2(g);
        ++iter;
    }

    if (!std::isfinite(j) || !std::isfinite(gnorm)) {
        throw std::runtime_error("non-finite value encountered during optimization");
    }

    TrainReport report;
    report.iterations = iter;
    report.final_cost = j;
    report.final_grad_norm = gnorm;
    report.converged = gnorm <= config.grad_tolerance;
    return {theta, report};
}

Label predict(const Theta& theta, const FeatureVector& x) {
    check_dims(theta, x);
    return linear_term(theta, x) >= 0.0 ? 1 : 0;
}

std::string theta_to_json(const Theta& theta) {
    nlohmann::json doc;
    doc["n"] = theta.size();
    doc["bias"] = theta.bias;
    doc["weights"] = theta.weights;
    return doc.dump(2);
}

Theta theta_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("theta document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("bias") || !doc.contains("weights")) {
        throw std::invalid_argument("theta document must contain n, bias and weights");
    }
    Theta theta;
    try {
        theta.bias = doc.at("bias").get<double>();
        theta.weights = doc.at("weights").get<std::vector<double>>();
        if (doc.at("n").get<std::size_t>() != theta.weights.size()) {
            throw std::invalid_argument("theta document: n does not match the weight count");
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("theta document field has the wrong type: ") + e.what());
    }
    if (!std::isfinite(theta.bias)) {
        throw std::invalid_argument("theta document: bias must be finite");
    }
    for (double w : theta.weights) {
        if (!std::isfinite(w)) {
            throw std::invalid_argument("theta document: weights must be finite");
        }
    }
    return theta;
}

}  // namespace bidsim
