#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "drpen/dataset.hpp"

namespace drpen {

enum class PenaltyKind { none, l1, elastic_net, scad, mcp };

// Penalty family plus per-coefficient multipliers. An infinite factor
// excludes the coordinate entirely (its coefficient is pinned at zero);
// a zero factor leaves the coordinate unpenalized.
struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::l1;
    double mix = 0.5;    // elastic-net L1 proportion, in (0,1)
    double a = 3.7;      // SCAD shape, > 2
    double gamma = 3.0;  // MCP shape, > 1
    Vector factors;      // empty means all ones

    double factor(Eigen::Index j) const {
        return factors.size() > 0 ? factors[j] : 1.0;
    }

    void validate(Eigen::Index p) const {
        if (kind == PenaltyKind::elastic_net && !(mix > 0.0 && mix < 1.0))
            throw std::invalid_argument("elastic net mix must be in (0,1)");
        if (kind == PenaltyKind::scad && !(a > 2.0))
            throw std::invalid_argument("SCAD parameter a must exceed 2");
        if (kind == PenaltyKind::mcp && !(gamma > 1.0))
            throw std::invalid_argument("MCP parameter gamma must exceed 1");
        if (factors.size() > 0) {
            if (factors.size() != p)
                throw std::invalid_argument("penalty factors length != number of covariates");
            for (Eigen::Index j = 0; j < p; ++j)
                if (std::isnan(factors[j]) || factors[j] < 0.0)
                    throw std::invalid_argument("penalty factors must be nonnegative");
        }
    }

    static PenaltySpec l1_with(Vector f = {}) {
        PenaltySpec s;
        s.kind = PenaltyKind::l1;
        s.factors = std::move(f);
        return s;
    }
};

inline double soft_threshold(double v, double t) {
    if (t < 0.0) throw std::invalid_argument("soft_threshold: negative threshold");
    double av = std::abs(v) - t;
    if (av <= 0.0) return 0.0;
    return v > 0 ? av : -av;
}

// Minimizer of 0.5*(b - v)^2 + SCAD_{lambda,a}(|b|) for a unit-variance
// coordinate.
inline double scad_univariate(double v, double lambda, double a = 3.7) {
    if (!(a > 2.0)) throw std::invalid_argument("SCAD parameter a must exceed 2");
    if (lambda < 0.0) throw std::invalid_argument("scad_univariate: negative lambda");
    double av = std::abs(v);
    if (av <= 2.0 * lambda) return soft_threshold(v, lambda);
    if (av <= a * lambda)
        return soft_threshold(v, a * lambda / (a - 1.0)) / (1.0 - 1.0 / (a - 1.0));
    return v;
}

// Firm thresholding: minimizer of 0.5*(b - v)^2 + MCP_{lambda,gamma}(|b|).
inline double mcp_univariate(double v, double lambda, double gamma = 3.0) {
    if (!(gamma > 1.0)) throw std::invalid_argument("MCP parameter gamma must exceed 1");
    if (lambda < 0.0) throw std::invalid_argument("mcp_univariate: negative lambda");
    double av = std::abs(v);
    if (av <= gamma * lambda) return soft_threshold(v, lambda) / (1.0 - 1.0 / gamma);
    return v;
}

inline double scad_penalty_value(double t, double lambda, double a) {
    t = std::abs(t);
    if (t <= lambda) return lambda * t;
    if (t <= a * lambda)
        return (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0));
    return lambda * lambda * (a + 1.0) / 2.0;
}

inline double mcp_penalty_value(double t, double lambda, double gamma) {
    t = std::abs(t);
    if (t <= gamma * lambda) return lambda * t - t * t / (2.0 * gamma);
    return gamma * lambda * lambda / 2.0;
}

namespace detail {

// Coordinate objective 0.5*d*b^2 - u*b + rho(|b|); shared by the fallback
// search below.
template <typename Rho>
double coord_obj(double b, double u, double d, Rho&& rho) {
    return 0.5 * d * b * b - u * b + rho(std::abs(b));
}

// Univariate update for a coordinate with curvature d (= <w x_j^2>/n).
// d == 1 reproduces the *_univariate rules. When d is too small for the
// concave branch to stay convex, candidate stationary points and region
// boundaries are compared by objective value.
inline double scad_update(double u, double d, double lambda, double a) {
    if (lambda <= 0.0) return u / d;
    double s = u >= 0 ? 1.0 : -1.0;
    double au = std::abs(u);
    if (d > 1.0 / (a - 1.0)) {
        if (au <= lambda * (d + 1.0)) return soft_threshold(u, lambda) / d;
        if (au <= a * lambda * d)
            return s * (au - a * lambda / (a - 1.0)) / (d - 1.0 / (a - 1.0));
        return u / d;
    }
    auto rho = [&](double t) { return scad_penalty_value(t, lambda, a); };
    double best = 0.0, best_obj = coord_obj(0.0, u, d, rho);
    double cands[4] = {soft_threshold(u, lambda) / d, s * lambda, s * a * lambda, u / d};
    for (double b : cands) {
        double o = coord_obj(b, u, d, rho);
        if (o < best_obj) { best_obj = o; best = b; }
    }
    return best;
}

inline double mcp_update(double u, double d, double lambda, double gamma) {
    if (lambda <= 0.0) return u / d;
    double au = std::abs(u);
    if (d > 1.0 / gamma) {
        if (au <= gamma * lambda * d) return soft_threshold(u, lambda) / (d - 1.0 / gamma);
        return u / d;
    }
    auto rho = [&](double t) { return mcp_penalty_value(t, lambda, gamma); };
    double s = u >= 0 ? 1.0 : -1.0;
    double best = 0.0, best_obj = coord_obj(0.0, u, d, rho);
    double cands[2] = {s * gamma * lambda, u / d};
    for (double b : cands) {
        double o = coord_obj(b, u, d, rho);
        if (o < best_obj) { best_obj = o; best = b; }
    }
    return best;
}

// Dispatch on the penalty family. u is the partial-residual inner product
// plus d*beta_old, d the coordinate curvature, lam the already
// factor-scaled penalty level.
inline double coordinate_update(double u, double d, double lam, const PenaltySpec& pen) {
    switch (pen.kind) {
        case PenaltyKind::none:
            return u / d;
        case PenaltyKind::l1:
            return soft_threshold(u, lam) / d;
        case PenaltyKind::elastic_net:
            return soft_threshold(u, lam * pen.mix) / (d + lam * (1.0 - pen.mix));
        case PenaltyKind::scad:
            return scad_update(u, d, lam, pen.a);
        case PenaltyKind::mcp:
            return mcp_update(u, d, lam, pen.gamma);
    }
    return 0.0;
}

// Penalty contribution of one coefficient to the objective.
inline double penalty_term(double beta, double lam, const PenaltySpec& pen) {
    switch (pen.kind) {
        case PenaltyKind::none: return 0.0;
        case PenaltyKind::l1: return lam * std::abs(beta);
        case PenaltyKind::elastic_net:
            return lam * (pen.mix * std::abs(beta) + 0.5 * (1.0 - pen.mix) * beta * beta);
        case PenaltyKind::scad: return scad_penalty_value(beta, lam, pen.a);
        case PenaltyKind::mcp: return mcp_penalty_value(beta, lam, pen.gamma);
    }
    return 0.0;
}

}  // namespace detail

}  // namespace drpen
