#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace episim {

/// Vertex label, 1-based. Low labels are strong (high expected degree).
using Label = std::uint32_t;

/// Scalar parameters of the evolving network and the infection.
struct ModelParams {
    Label n_vertices = 1;
    double beta = 1.0;
    double gamma = 0.5;
    double kappa = 1.0;  ///< vertex update rate; 0 means a static network
    double lambda = 0.0; ///< infection rate per edge

    /// Throws std::domain_error naming the offending field.
    void validate() const;
    double tau() const;

    bool operator==(const ModelParams&) const = default;
};

/// Power-law exponent of the degree distribution, 1 + 1/gamma.
double tau_of_gamma(double gamma);

/// min(beta N^(2 gamma - 1) / (x^gamma y^gamma), 1). Throws std::domain_error
/// for x == y or labels outside [1, N].
double connection_probability(Label x, Label y, const ModelParams& params);

/// Precomputed connection kernel. Evaluates the same expression as
/// connection_probability (bit-identical results) without repeated pow calls.
class ConnectionKernel {
public:
    explicit ConnectionKernel(const ModelParams& params);

    Label size() const { return n_; }
    const ModelParams& params() const { return params_; }

    /// beta N^(2 gamma - 1)
    double scale() const { return scale_; }
    /// x^gamma
    double label_power(Label x) const { return power_[x - 1]; }

    /// Uncapped product form beta N^(2 gamma - 1) x^-gamma y^-gamma.
    double envelope(Label x, Label y) const { return scale_ / (power_[x - 1] * power_[y - 1]); }
    double prob(Label x, Label y) const
    {
        const double q = envelope(x, y);
        return q < 1.0 ? q : 1.0;
    }

    /// Largest y with envelope(x, y) >= 1, or 0 if there is none. Every
    /// y <= saturation_limit(x) connects to x with probability one.
    Label saturation_limit(Label x) const { return saturation_[x - 1]; }

private:
    ModelParams params_;
    Label n_;
    double scale_;
    std::vector<double> power_;
    std::vector<Label> saturation_;
};

/// Exponents and thresholds of the star/connector partition.
struct StarPartitionParams {
    double alpha = 0.0;
    double alpha_prime = 0.0;
    double alpha_double_prime = 0.0; ///< (alpha + alpha_prime) / 2
    double t_lambda = 0.0;           ///< lambda^-alpha_prime
    Label star_cutoff = 0;           ///< floor(lambda^((2 + alpha)/gamma) N); stars are 1..star_cutoff
    double eta = 0.0;
};

enum class StarConstraint {
    none,
    alpha_bound,       ///< (1/gamma - 3) alpha + 2/gamma - 3 < 0
    alpha_prime_bound, ///< (1/gamma - 2) alpha - alpha' + 2/gamma - 3 < 0
};

std::string to_string(StarConstraint c);

/// Outcome of validate_star_parameters: either populated parameters or the
/// first violated inequality, together with both inequality left-hand sides.
struct StarFeasibility {
    std::optional<StarPartitionParams> params;
    StarConstraint violated = StarConstraint::none;
    double alpha_bound_value = 0.0;
    double alpha_prime_bound_value = 0.0;

    bool feasible() const { return params.has_value(); }
};

double alpha_bound_lhs(double gamma, double alpha);
double alpha_prime_bound_lhs(double gamma, double alpha, double alpha_prime);

/// Default connector-availability fraction: half of exp(-2 (1 + kappa)).
double default_eta(double kappa);

/// Checks both exponent inequalities. Infeasibility is reported, not thrown;
/// std::domain_error is reserved for alpha <= 0, alpha' <= 0, alpha' >= alpha,
/// lambda <= 0 or invalid params.
StarFeasibility validate_star_parameters(const ModelParams& params, double alpha, double alpha_prime);

/// Default (alpha, alpha') for gamma > 1/3: alpha one unit above the lower end
/// of its admissible half-line, alpha' = alpha/2 when admissible, otherwise the
/// midpoint of the admissible interval for alpha'. Throws for gamma <= 1/3.
std::pair<double, double> default_star_exponents(double gamma);

/// Mean-field critical rates of a degree histogram (index = degree).
struct MeanFieldRates {
    double lambda_naive = 0.0;       ///< 1 / sum k mu(k)
    double lambda_sizebiased = 0.0;  ///< sum k mu(k) / sum k^2 mu(k)
    double third_moment_ratio = 0.0; ///< sum k^3 mu(k) / sum k mu(k); fast extinction predicted when lambda^3 times this < 1
};

/// `histogram[k]` is the (possibly unnormalised) mass at degree k. Mass at
/// k = 0 only enters the normalisation. Throws std::domain_error when the
/// histogram has no mass at positive degrees or a negative entry.
MeanFieldRates meanfield_critical_rates(std::span<const double> histogram);

/// Scores used by the supermartingale M and the exact neighbour sums
/// S(x) = sum_y p_xy, T(x) = sum_y p_xy s2(y).
class ScoreTable {
public:
    explicit ScoreTable(const ModelParams& params);

    Label size() const { return static_cast<Label>(s1_.size()); }
    double s1(Label x) const { return s1_[x - 1]; }
    double s2(Label x) const { return s2_[x - 1]; }
    double degree_sum(Label x) const { return s_cap_[x - 1]; }
    double weighted_degree_sum(Label x) const { return t_cap_[x - 1]; }

    /// beta/(1-gamma) (N/x)^gamma
    double degree_sum_bound(Label x) const;
    /// 2 beta/(1 - 3 gamma) (N/x)^gamma; only meaningful for gamma < 1/3
    double weighted_degree_sum_bound(Label x) const;

    const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
    std::vector<double> s1_, s2_, s_cap_, t_cap_;
};

/// Relative tolerance used when comparing exact sums against closed-form bounds.
inline constexpr double kBoundRelTol = 1e-12;

} // namespace episim
