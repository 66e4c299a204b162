/**
 * @file complexity.hpp
 * @brief Closed-form cost model for the layered search on planar data.
 *
 * With nodes packed at density kappa / (pi * vigilance^2), layer l+1 holds
 * alpha^-2 times the nodes of layer l. From that follow the layer count for N
 * bottom nodes, the per-layer candidate count, the total search cost, and a
 * scalar objective whose minimizer in alpha balances fan-out against depth.
 * All logarithms are natural.
 */

#pragma once

#include <cstdint>
#include <vector>

#include "topomap/graph.hpp"

namespace topomap::complexity {

/// pi / (2 sqrt 3), densest hexagonal circle packing.
double max_packing_constant();

struct CostModelParams {
    double kappa = 0.0;  // packing constant, (0, pi/(2 sqrt 3)]
    double c_d = 1.0;    // cost per distance evaluation
    double c_s = 0.0;    // cost per winner-selection comparison

    /// c_s * kappa / c_d
    double r() const { return c_s * kappa / c_d; }
    void validate() const;
};

int layer_count(std::uint64_t n, double alpha);

/// kappa * ((1 - alpha^-l) / (1 - alpha^-1))^2
double candidate_size(int ell, double alpha, double kappa);

/// Limit of candidate_size as l grows: kappa * (alpha / (alpha - 1))^2.
double candidate_size_limit(double alpha, double kappa);

double total_cost(std::uint64_t n, double alpha, const CostModelParams& params);

double objective_H(double alpha, double r);

struct Grid {
    double lo = 1.001;
    double hi = 10.0;
    double step = 1e-3;

    std::vector<double> points() const;
};

/// Grid argmin of objective_H; ties resolve toward the smaller alpha.
double alpha_star(double r, const Grid& grid = {});

/// N / (1 - alpha^-2), the geometric-series bound on stored nodes.
double space_bound(std::uint64_t n, double alpha);

/// kappa / (pi * vigilance(l)^2), nodes per square meter.
double node_density(int ell, const LearnerConfig& config, double kappa);

}  // namespace topomap::complexity
