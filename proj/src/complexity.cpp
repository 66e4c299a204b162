#include "topomap/complexity.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace topomap::complexity {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 1.0)) {
        throw std::invalid_argument("alpha must be > 1");
    }
}

}  // namespace

double max_packing_constant() {
    return std::numbers::pi / (2.0 * std::sqrt(3.0));
}

void CostModelParams::validate() const {
    if (!(kappa > 0.0) || kappa > max_packing_constant() + 1e-12) {
        throw std::invalid_argument("kappa must lie in (0, pi/(2 sqrt 3)]");
    }
    if (!(c_d > 0.0) || c_s < 0.0) {
        throw std::invalid_argument("cost coefficients must be positive");
    }
}

int layer_count(std::uint64_t n, double alpha) {
    require_alpha(alpha);
    if (n < 1) {
        throw std::invalid_argument("layer_count needs N >= 1");
    }
    const double ratio = std::log(static_cast<double>(n)) / (2.0 * std::log(alpha));
    return static_cast<int>(std::ceil(ratio)) + 1;
}

double candidate_size(int ell, double alpha, double kappa) {
    require_alpha(alpha);
    if (ell < 1) {
        throw std::invalid_argument("layer index must be >= 1");
    }
    const double ratio = (1.0 - std::pow(alpha, -ell)) / (1.0 - 1.0 / alpha);
    return kappa * ratio * ratio;
}

double candidate_size_limit(double alpha, double kappa) {
    require_alpha(alpha);
    const double ratio = alpha / (alpha - 1.0);
    return kappa * ratio * ratio;
}

double total_cost(std::uint64_t n, double alpha, const CostModelParams& params) {
    const int layers = layer_count(n, alpha);
    double cost = 0.0;
    for (int ell = 1; ell <= layers - 1; ++ell) {
        const double k_here = candidate_size(ell, alpha, params.kappa);
        const double k_above = candidate_size(ell + 1, alpha, params.kappa);
        cost += params.c_d * alpha * alpha * k_above + params.c_s * k_here * k_here;
    }
    return cost;
}

double objective_H(double alpha, double r) {
    require_alpha(alpha);
    const double ratio = alpha / (alpha - 1.0);
    const double ratio2 = ratio * ratio;
    const double log_a = std::log(alpha);
    return alpha * alpha / log_a * ratio2 + r / log_a * ratio2 * ratio2;
}

std::vector<double> Grid::points() const {
    if (!(lo > 1.0) || !(hi > lo) || !(step > 0.0)) {
        throw std::invalid_argument("alpha grid must satisfy 1 < lo < hi and step > 0");
    }
    std::vector<double> out;
    // Index-based so the points carry no accumulated rounding.
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(lo + static_cast<double>(i) * step);
    }
    return out;
}

double alpha_star(double r, const Grid& grid) {
    const auto pts = grid.points();
    if (pts.empty()) {
        throw std::invalid_argument("empty alpha grid");
    }
    double best_alpha = pts.front();
    double best = objective_H(best_alpha, r);
    for (double a : pts) {
        const double h = objective_H(a, r);
        if (h < best) {
            best = h;
            best_alpha = a;
        }
    }
    return best_alpha;
}

double space_bound(std::uint64_t n, double alpha) {
    require_alpha(alpha);
    if (n < 1) {
        throw std::invalid_argument("space_bound needs N >= 1");
    }
    return static_cast<double>(n) / (1.0 - 1.0 / (alpha * alpha));
}

double node_density(int ell, const LearnerConfig& config, double kappa) {
    const double v = layer_vigilance(ell, config.base_vigilance, config.alpha);
    return kappa / (std::numbers::pi * v * v);
}

}  // namespace topomap::complexity
