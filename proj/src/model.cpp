#include "episim/model.hpp"

#include <cmath>
#include <stdexcept>

namespace episim {

namespace {

double scale_of(const ModelParams& p)
{
    return p.beta * std::pow(static_cast<double>(p.n_vertices), 2.0 * p.gamma - 1.0);
}

} // namespace

void ModelParams::validate() const
{
    if (n_vertices < 1)
        throw std::domain_error("n_vertices must be >= 1");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::domain_error("beta must be positive and finite");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("gamma must lie in (0, 1)");
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw std::domain_error("kappa must be nonnegative and finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::domain_error("lambda must be nonnegative and finite");
}

double ModelParams::tau() const { return tau_of_gamma(gamma); }

double tau_of_gamma(double gamma)
{
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("gamma must lie in (0, 1)");
    return 1.0 + 1.0 / gamma;
}

double connection_probability(Label x, Label y, const ModelParams& params)
{
    if (x == y)
        throw std::domain_error("connection_probability: x == y");
    if (x < 1 || y < 1 || x > params.n_vertices || y > params.n_vertices)
        throw std::domain_error("connection_probability: label out of range");
    const double q = scale_of(params) / (std::pow(static_cast<double>(x), params.gamma) *
                                         std::pow(static_cast<double>(y), params.gamma));
    return q < 1.0 ? q : 1.0;
}

ConnectionKernel::ConnectionKernel(const ModelParams& params)
    : params_(params), n_(params.n_vertices), scale_(0.0)
{
    params.validate();
    scale_ = scale_of(params);
    power_.resize(n_);
    for (Label x = 1; x <= n_; ++x)
        power_[x - 1] = std::pow(static_cast<double>(x), params.gamma);

    // envelope(x, .) is nonincreasing, and so is the saturation limit in x.
    saturation_.assign(n_, 0);
    Label y = n_;
    for (Label x = 1; x <= n_; ++x) {
        while (y >= 1 && envelope(x, y) < 1.0)
            --y;
        saturation_[x - 1] = y;
    }
}

std::string to_string(StarConstraint c)
{
    switch (c) {
    case StarConstraint::none:
        return "none";
    case StarConstraint::alpha_bound:
        return "alpha_bound: (1/gamma - 3)*alpha + 2/gamma - 3 < 0";
    case StarConstraint::alpha_prime_bound:
        return "alpha_prime_bound: (1/gamma - 2)*alpha - alpha' + 2/gamma - 3 < 0";
    }
    return "unknown";
}

double alpha_bound_lhs(double gamma, double alpha)
{
    return (1.0 / gamma - 3.0) * alpha + 2.0 / gamma - 3.0;
}

double alpha_prime_bound_lhs(double gamma, double alpha, double alpha_prime)
{
    return (1.0 / gamma - 2.0) * alpha - alpha_prime + 2.0 / gamma - 3.0;
}

double default_eta(double kappa) { return 0.5 * std::exp(-2.0 * (1.0 + kappa)); }

StarFeasibility validate_star_parameters(const ModelParams& params, double alpha, double alpha_prime)
{
    params.validate();
    if (!(alpha > 0.0))
        throw std::domain_error("alpha must be positive");
    if (!(alpha_prime > 0.0))
        throw std::domain_error("alpha_prime must be positive");
    if (!(alpha_prime < alpha))
        throw std::domain_error("alpha_prime must be strictly smaller than alpha");
    if (!(params.lambda > 0.0))
        throw std::domain_error("star partition requires lambda > 0");

    StarFeasibility out;
    out.alpha_bound_value = alpha_bound_lhs(params.gamma, alpha);
    out.alpha_prime_bound_value = alpha_prime_bound_lhs(params.gamma, alpha, alpha_prime);
    if (!(out.alpha_bound_value < 0.0)) {
        out.violated = StarConstraint::alpha_bound;
        return out;
    }
    if (!(out.alpha_prime_bound_value < 0.0)) {
        out.violated = StarConstraint::alpha_prime_bound;
        return out;
    }

    StarPartitionParams sp;
    sp.alpha = alpha;
    sp.alpha_prime = alpha_prime;
    sp.alpha_double_prime = 0.5 * (alpha + alpha_prime);
    sp.t_lambda = std::pow(params.lambda, -alpha_prime);
    const double cutoff =
        std::floor(std::pow(params.lambda, (2.0 + alpha) / params.gamma) * params.n_vertices);
    sp.star_cutoff = cutoff >= params.n_vertices ? params.n_vertices : static_cast<Label>(cutoff);
    sp.eta = default_eta(params.kappa);
    out.params = sp;
    return out;
}

std::pair<double, double> default_star_exponents(double gamma)
{
    if (!(gamma > 1.0 / 3.0 && gamma < 1.0))
        throw std::domain_error("star exponents exist only for gamma in (1/3, 1)");
    // alpha_bound is affine in alpha with negative slope; admissible alphas form (lo, inf).
    const double lo = std::max(0.0, (2.0 / gamma - 3.0) / (3.0 - 1.0 / gamma));
    const double alpha = lo + 1.0;
    // alpha' admissible on (max(0, (1/gamma - 2) alpha + 2/gamma - 3), alpha).
    const double lo_prime = std::max(0.0, (1.0 / gamma - 2.0) * alpha + 2.0 / gamma - 3.0);
    double alpha_prime = 0.5 * alpha;
    if (!(alpha_prime > lo_prime))
        alpha_prime = 0.5 * (lo_prime + alpha);
    return {alpha, alpha_prime};
}

MeanFieldRates meanfield_critical_rates(std::span<const double> histogram)
{
    double mass = 0.0, m1 = 0.0, m2 = 0.0, m3 = 0.0;
    for (std::size_t k = 0; k < histogram.size(); ++k) {
        const double w = histogram[k];
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::domain_error("degree histogram entries must be nonnegative and finite");
        const double kd = static_cast<double>(k);
        mass += w;
        m1 += w * kd;
        m2 += w * kd * kd;
        m3 += w * kd * kd * kd;
    }
    if (!(m1 > 0.0))
        throw std::domain_error("degree histogram has no mass at positive degrees");
    m1 /= mass;
    m2 /= mass;
    m3 /= mass;
    return {1.0 / m1, m1 / m2, m3 / m1};
}

ScoreTable::ScoreTable(const ModelParams& params) : params_(params)
{
    const ConnectionKernel kernel(params);
    const Label n = params.n_vertices;
    const double nd = static_cast<double>(n);
    s1_.resize(n);
    s2_.resize(n);
    for (Label x = 1; x <= n; ++x) {
        const double r = std::pow(nd / x, params.gamma);
        s1_[x - 1] = r * r;
        s2_[x - 1] = r * r + r;
    }

    // Suffix sums over y of y^-gamma and s2(y) y^-gamma, prefix sums of s2 for
    // the saturated block.
    std::vector<double> tail_inv(n + 2, 0.0), tail_s2(n + 2, 0.0), head_s2(n + 1, 0.0);
    for (Label y = n; y >= 1; --y) {
        tail_inv[y] = tail_inv[y + 1] + 1.0 / kernel.label_power(y);
        tail_s2[y] = tail_s2[y + 1] + s2_[y - 1] / kernel.label_power(y);
    }
    for (Label y = 1; y <= n; ++y)
        head_s2[y] = head_s2[y - 1] + s2_[y - 1];

    s_cap_.resize(n);
    t_cap_.resize(n);
    for (Label x = 1; x <= n; ++x) {
        const Label sat = kernel.saturation_limit(x);
        const double factor = kernel.scale() / kernel.label_power(x);
        double s = static_cast<double>(sat) + factor * tail_inv[sat + 1];
        double t = head_s2[sat] + factor * tail_s2[sat + 1];
        // remove the y = x term
        if (x <= sat) {
            s -= 1.0;
            t -= s2_[x - 1];
        } else {
            const double pxx = kernel.envelope(x, x);
            s -= pxx;
            t -= pxx * s2_[x - 1];
        }
        s_cap_[x - 1] = s;
        t_cap_[x - 1] = t;
    }
}

double ScoreTable::degree_sum_bound(Label x) const
{
    return params_.beta / (1.0 - params_.gamma) *
           std::pow(static_cast<double>(params_.n_vertices) / x, params_.gamma);
}

double ScoreTable::weighted_degree_sum_bound(Label x) const
{
    return 2.0 * params_.beta / (1.0 - 3.0 * params_.gamma) *
           std::pow(static_cast<double>(params_.n_vertices) / x, params_.gamma);
}

} // namespace episim
