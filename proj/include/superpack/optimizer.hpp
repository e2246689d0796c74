#ifndef SUPERPACK_OPTIMIZER_HPP
#define SUPERPACK_OPTIMIZER_HPP

#include "superpack/geometry.hpp"
#include "superpack/lattice.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace superpack {

/// A stationary point of det B subject to ||Bu||_p^p = 1 for every
/// representative u of a neighbor case.
struct CriticalPoint {
    Basis basis;
    CaseId case_id = CaseId::I;
    std::vector<double> multipliers;
    double residual = 0.0;
    double density = 0.0;
    bool verified = false;
    int neighbors = 0;
};

struct SearchConfig {
    int restarts = 500;
    std::uint64_t seed = 1;
    double newton_tol = 1e-11;
    int max_iterations = 200;
    double min_abs_det = 1e-8;
    int jobs = 1;
};

/// ||B u_j||_p^p - 1 for each representative u_j.
std::vector<double> constraint_residuals(const Basis& b, const NeighborCase& nc, Exponent p);

/// Cofactor matrix of a 3x3 matrix, i.e. the gradient of det.
Eigen::Matrix3d cofactor(const Eigen::Matrix3d& b);

struct StationarityEval {
    Eigen::VectorXd values;
    /// Some |(Bu)_i| < 1e-12 with p < 2: the constraint is not twice differentiable there.
    bool kink = false;
};

/// Lagrange conditions: the 9 entries (row-major) of
///   cof(B) - sum_j lambda_j d(||B u_j||_p^p)/dB
/// followed by the constraint residuals. Unknowns are ordered as
/// (B row-major, lambda). sign(0) is taken as 0.
StationarityEval stationarity_system(const Eigen::Matrix3d& b, const Eigen::VectorXd& multipliers,
                                     const NeighborCase& nc, Exponent p);

/// Analytic Jacobian of stationarity_system with respect to (B, lambda).
Eigen::MatrixXd stationarity_jacobian(const Eigen::Matrix3d& b, const Eigen::VectorXd& multipliers,
                                      const NeighborCase& nc, Exponent p);

/// Least-squares multipliers for the gradient block at fixed B.
Eigen::VectorXd initial_multipliers(const Eigen::Matrix3d& b, const NeighborCase& nc, Exponent p);

enum class NewtonStatus {
    converged,
    max_iterations,
    singular_jacobian,
    left_region,
    kink,
    line_search_failed,
    nonpositive_det,
};
std::string to_string(NewtonStatus s);

struct NewtonResult {
    NewtonStatus status = NewtonStatus::max_iterations;
    std::optional<CriticalPoint> point;
    int iterations = 0;
    double residual = 0.0;

    bool ok() const noexcept { return status == NewtonStatus::converged; }
};

/// Damped Newton on the stationarity system. The start is negated when
/// det < 0 (B and -B generate the same lattice) and rescaled so the
/// longest constraint vector has norm 1. A converged point is checked
/// with verify_packing.
NewtonResult newton_solve(const Basis& start, const NeighborCase& nc, Exponent p, const SearchConfig& cfg);

/// Random N(0,1) starting bases, one Newton solve each. Converged and
/// verified packing lattices only, deduplicated by density (1e-7) and
/// sorted by density, densest first. Deterministic in cfg.seed for any cfg.jobs.
std::vector<CriticalPoint> random_search(const NeighborCase& nc, Exponent p, const SearchConfig& cfg);

/// Starting matrix for restart `index`; a pure function of (seed, index).
Eigen::Matrix3d random_start(std::uint64_t seed, int index);

}  // namespace superpack

#endif
