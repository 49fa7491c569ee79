#pragma once

// Independent brute-force oracles used to pin expected values. These
// deliberately avoid the library's solver code paths.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "maisac/channel.hpp"

namespace oracles {

using maisac::CMat;
using maisac::CVec;
using maisac::cplx;

/// Exhaustive search over rank-1 transmit designs for N = 2 beams, K <= 1
/// users. Beam directions are swept on a (theta, phi) grid; for each
/// direction pair the power allocation is a 2-variable linear-fractional
/// program whose maximum sits at a vertex of the feasible polygon, so the
/// powers are handled exactly. A coordinate golden-section polish removes
/// the direction discretization error.
struct Rank1GridOracle {
    // Quadratic forms of the fixed combiner.
    CVec a;                    // H_d^H u
    std::vector<CVec> b;       // H_l^H u
    CVec h;                    // user channel (may be empty for K = 0)
    double alpha_d2 = 0;       // |alpha_d|^2
    std::vector<double> alpha_l2;
    double noise_term = 0;     // sigma_r^2 ||u||^2
    double gamma = 0, delta2 = 0, p_th = 0;

    static CVec dir(double theta, double phi) {
        CVec v(2);
        v << cplx(std::cos(theta), 0.0), std::polar(std::sin(theta), phi);
        return v;
    }

    /// Best objective over the power polygon for fixed beam directions.
    double best_over_powers(const CVec& v1, const CVec& v2) const {
        const double A1 = alpha_d2 * std::norm(a.dot(v1));
        const double A2 = alpha_d2 * std::norm(a.dot(v2));
        double B1 = 0, B2 = 0;
        for (std::size_t l = 0; l < b.size(); ++l) {
            B1 += alpha_l2[l] * std::norm(b[l].dot(v1));
            B2 += alpha_l2[l] * std::norm(b[l].dot(v2));
        }
        const bool has_user = h.size() > 0;
        const double C1 = has_user ? std::norm(h.dot(v1)) : 0.0;
        const double C2 = has_user ? std::norm(h.dot(v2)) : 0.0;

        // Candidate vertices of {q >= 0, q1+q2 <= P, C1 q1 - g C2 q2 >= g d2}.
        std::vector<std::array<double, 2>> cand;
        auto push = [&](double q1, double q2) { cand.push_back({q1, q2}); };
        push(0, 0);
        push(p_th, 0);
        push(0, p_th);
        if (has_user && C1 > 0) {
            const double q1_min = gamma * delta2 / C1;
            push(q1_min, 0);
            if (gamma * C2 > 0) {
                // comm boundary with power boundary: q1 + q2 = P.
                const double q2 = (C1 * p_th - gamma * delta2) / (C1 + gamma * C2);
                push(p_th - q2, q2);
            } else {
                push(q1_min, p_th - q1_min);
            }
        }
        double best = -1.0;
        for (const auto& q : cand) {
            const double q1 = q[0], q2 = q[1];
            if (q1 < -1e-12 || q2 < -1e-12 || q1 + q2 > p_th * (1 + 1e-12)) continue;
            if (has_user && C1 * q1 - gamma * (C2 * q2 + delta2) < -1e-12 * std::max(1.0, gamma * delta2))
                continue;
            const double num = q1 * A1 + q2 * A2;
            const double den = q1 * B1 + q2 * B2 + noise_term;
            best = std::max(best, num / den);
        }
        return best;  // negative when the direction pair is infeasible
    }

    double value(const std::array<double, 4>& ang) const {
        return best_over_powers(dir(ang[0], ang[1]), dir(ang[2], ang[3]));
    }

    double search(int n_theta = 48, int n_phi = 64) const {
        double best = -1.0;
        std::array<double, 4> best_ang{0, 0, 0, 0};
        for (int i1 = 0; i1 < n_theta; ++i1)
            for (int j1 = 0; j1 < n_phi; ++j1) {
                const CVec v1 = dir(i1 * (M_PI / 2) / (n_theta - 1), j1 * 2 * M_PI / n_phi);
                for (int i2 = 0; i2 < n_theta; ++i2)
                    for (int j2 = 0; j2 < n_phi; ++j2) {
                        const double val = best_over_powers(
                            v1, dir(i2 * (M_PI / 2) / (n_theta - 1), j2 * 2 * M_PI / n_phi));
                        if (val > best) {
                            best = val;
                            best_ang = {i1 * (M_PI / 2) / (n_theta - 1), j1 * 2 * M_PI / n_phi,
                                        i2 * (M_PI / 2) / (n_theta - 1), j2 * 2 * M_PI / n_phi};
                        }
                    }
            }
        // Golden-section polish per coordinate.
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        for (int round = 0; round < 6; ++round) {
            for (int c = 0; c < 4; ++c) {
                const double span = (c % 2 == 0 ? M_PI / 2 / (n_theta - 1) : 2 * M_PI / n_phi) * 2;
                double lo = best_ang[c] - span, hi = best_ang[c] + span;
                double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
                auto at = [&](double v) {
                    auto ang = best_ang;
                    ang[c] = v;
                    return value(ang);
                };
                double f1 = at(x1), f2 = at(x2);
                for (int it = 0; it < 40; ++it) {
                    if (f1 < f2) {
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + gr * (hi - lo);
                        f2 = at(x2);
                    } else {
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - gr * (hi - lo);
                        f1 = at(x1);
                    }
                }
                const double mid = 0.5 * (lo + hi);
                if (at(mid) > best) {
                    best_ang[c] = mid;
                    best = at(mid);
                }
            }
        }
        return best;
    }
};

inline Rank1GridOracle make_rank1_oracle(const CMat& H_d, const std::vector<CMat>& H_l,
                                         const CVec& u, cplx alpha_d,
                                         const std::vector<cplx>& alpha_l, double sigma_r2,
                                         const CVec& h_user, double gamma, double delta2,
                                         double p_th) {
    Rank1GridOracle g;
    g.a = H_d.adjoint() * u;
    for (const auto& Hl : H_l) g.b.push_back(Hl.adjoint() * u);
    g.h = h_user;
    g.alpha_d2 = std::norm(alpha_d);
    for (auto al : alpha_l) g.alpha_l2.push_back(std::norm(al));
    g.noise_term = sigma_r2 * u.squaredNorm();
    g.gamma = gamma;
    g.delta2 = delta2;
    g.p_th = p_th;
    return g;
}

}  // namespace oracles
