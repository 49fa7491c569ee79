#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maisac/channel.hpp"
#include "maisac/convex/qcqp.hpp"

namespace maisac {

using Vec2 = Eigen::Vector2d;

/// One weighted group of the position objective:
///     weight * sum_b | sum_a coef(a,b) * f_paths(p_a)^H gtilde(:,b) |^2.
/// The receive-side sensing numerator uses coef(m,b) = conj(u_m) with
/// gtilde(:,b) = (h_t^H w_b) g_r; the transmit side uses coef(n,b) =
/// conj(w_b[n]) with gtilde = (h_r^H u) g_t; user terms use the user PRV.
struct QuadTerm {
    PathSet paths;
    double weight = 1.0;
    CMat gtilde;  // L x B
    CMat coef;    // A x B
};

/// Numerator/denominator pair f(p)/g(p) of a fractional objective in one
/// antenna position, with all other antennas of the side held fixed.
struct PositionObjective {
    std::vector<QuadTerm> num;
    std::vector<QuadTerm> den;
    double num_const = 0.0;
    double den_const = 0.0;
    std::vector<Position2D> positions;
    double wavelength = 0.1;
};

namespace detail_pos {

/// f_paths(p)^H gtilde column and its position derivatives.
inline void frv_products(const PathSet& paths, const Position2D& p, double wavelength,
                         const CMat& gtilde, Eigen::Index b, cplx& val, cplx& dx, cplx& dy) {
    const double k0 = 2.0 * M_PI / wavelength;
    val = dx = dy = cplx(0, 0);
    for (int l = 0; l < paths.count(); ++l) {
        const double sc = std::sin(paths.elevation[l]) * std::cos(paths.azimuth[l]);
        const double cc = std::cos(paths.elevation[l]);
        const double rho = p.x * sc + p.y * cc;
        const cplx e = std::polar(1.0, -k0 * rho) * gtilde(l, b);
        val += e;
        dx += cplx(0, -k0 * sc) * e;
        dy += cplx(0, -k0 * cc) * e;
    }
}

struct TermEval {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
};

/// Value and gradient of one QuadTerm with antenna `moving` placed at p.
inline TermEval eval_term(const QuadTerm& t, const std::vector<Position2D>& pos, int moving,
                          const Position2D& p, double wavelength, bool want_grad) {
    const Eigen::Index B = t.gtilde.cols();
    const auto A = static_cast<Eigen::Index>(pos.size());
    TermEval out;
    for (Eigen::Index b = 0; b < B; ++b) {
        cplx fixed(0, 0);
        for (Eigen::Index a = 0; a < A; ++a) {
            if (static_cast<int>(a) == moving) continue;
            cplx v, dx, dy;
            frv_products(t.paths, pos[a], wavelength, t.gtilde, b, v, dx, dy);
            fixed += t.coef(a, b) * v;
        }
        cplx v, dx, dy;
        frv_products(t.paths, p, wavelength, t.gtilde, b, v, dx, dy);
        const cplx s = fixed + t.coef(moving, b) * v;
        out.value += t.weight * std::norm(s);
        if (want_grad) {
            out.grad[0] += t.weight * 2.0 * std::real(std::conj(s) * t.coef(moving, b) * dx);
            out.grad[1] += t.weight * 2.0 * std::real(std::conj(s) * t.coef(moving, b) * dy);
        }
    }
    return out;
}

/// Same value through the cosine expansion over path pairs; kept as an
/// independent evaluation route for tests.
inline double eval_term_cos(const QuadTerm& t, const std::vector<Position2D>& pos, int moving,
                            const Position2D& p, double wavelength) {
    const Eigen::Index B = t.gtilde.cols();
    const auto A = static_cast<Eigen::Index>(pos.size());
    const double k0 = 2.0 * M_PI / wavelength;
    const int L = t.paths.count();
    auto rho = [&](const Position2D& q, int l) {
        return q.x * std::sin(t.paths.elevation[l]) * std::cos(t.paths.azimuth[l]) +
               q.y * std::cos(t.paths.elevation[l]);
    };
    double total = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
        for (Eigen::Index a = 0; a < A; ++a) {
            const Position2D& pa = static_cast<int>(a) == moving ? p : pos[a];
            for (Eigen::Index a2 = 0; a2 < A; ++a2) {
                const Position2D& pa2 = static_cast<int>(a2) == moving ? p : pos[a2];
                const cplx ca = t.coef(a, b), ca2 = t.coef(a2, b);
                for (int j = 0; j < L; ++j)
                    for (int l = 0; l < L; ++l) {
                        const cplx G = t.gtilde(j, b) * std::conj(t.gtilde(l, b));
                        const double ang = k0 * (rho(pa2, l) - rho(pa, j)) + std::arg(G) +
                                           std::arg(ca) - std::arg(ca2);
                        total += t.weight * std::abs(ca) * std::abs(ca2) * std::abs(G) *
                                 std::cos(ang);
                    }
            }
        }
    }
    return total;
}

/// Spectral bound on the Hessian of one QuadTerm in the moving position:
/// 32 pi^2/lambda^2 on the self part plus 8 pi^2/lambda^2 on each cross
/// pairing, both carrying the total path-pair magnitude ||gtilde||_1^2.
inline double term_hessian_bound(const QuadTerm& t, int moving, double wavelength) {
    const double k2 = (M_PI * M_PI) / (wavelength * wavelength);
    const Eigen::Index B = t.gtilde.cols();
    const auto A = t.coef.rows();
    double bound = 0.0;
    for (Eigen::Index b = 0; b < B; ++b) {
        const double g1 = t.gtilde.col(b).cwiseAbs().sum();
        const double gg = g1 * g1;
        const double cm = std::abs(t.coef(moving, b));
        bound += 32.0 * k2 * cm * cm * gg;
        for (Eigen::Index a = 0; a < A; ++a) {
            if (static_cast<int>(a) == moving) continue;
            bound += 8.0 * k2 * cm * std::abs(t.coef(a, b)) * gg;
        }
    }
    return t.weight * bound;
}

}  // namespace detail_pos

struct FgValue {
    double f = 0.0;
    double g = 0.0;
    double ratio() const { return f / g; }
};

/// Exact f and g with antenna `moving` evaluated at p.
inline FgValue eval_fg(const PositionObjective& obj, int moving, const Position2D& p) {
    FgValue v;
    v.f = obj.num_const;
    v.g = obj.den_const;
    for (const auto& t : obj.num)
        v.f += detail_pos::eval_term(t, obj.positions, moving, p, obj.wavelength, false).value;
    for (const auto& t : obj.den)
        v.g += detail_pos::eval_term(t, obj.positions, moving, p, obj.wavelength, false).value;
    return v;
}

/// Cosine-expansion route of eval_fg (independent arithmetic; test oracle).
inline FgValue eval_fg_cos(const PositionObjective& obj, int moving, const Position2D& p) {
    FgValue v;
    v.f = obj.num_const;
    v.g = obj.den_const;
    for (const auto& t : obj.num)
        v.f += detail_pos::eval_term_cos(t, obj.positions, moving, p, obj.wavelength);
    for (const auto& t : obj.den)
        v.g += detail_pos::eval_term_cos(t, obj.positions, moving, p, obj.wavelength);
    return v;
}

/// Analytic gradients of f and g in the moving position.
inline void grad_fg(const PositionObjective& obj, int moving, const Position2D& p, Vec2& grad_f,
                    Vec2& grad_g) {
    grad_f.setZero();
    grad_g.setZero();
    for (const auto& t : obj.num)
        grad_f += detail_pos::eval_term(t, obj.positions, moving, p, obj.wavelength, true).grad;
    for (const auto& t : obj.den)
        grad_g += detail_pos::eval_term(t, obj.positions, moving, p, obj.wavelength, true).grad;
}

/// Position-independent spectral bounds (delta_f, delta_g) dominating the
/// Hessians of f and g everywhere.
inline std::pair<double, double> hessian_bounds(const PositionObjective& obj, int moving) {
    double df = 0, dg = 0;
    for (const auto& t : obj.num) df += detail_pos::term_hessian_bound(t, moving, obj.wavelength);
    for (const auto& t : obj.den) dg += detail_pos::term_hessian_bound(t, moving, obj.wavelength);
    return {df, dg};
}

/// Second-order Taylor surrogate around p0: a global lower bound when
/// `lower` (curvature -delta), else a global upper bound (+delta).
struct Surrogate {
    double v0 = 0.0;
    Vec2 grad = Vec2::Zero();
    double delta = 0.0;
    Vec2 p0 = Vec2::Zero();
    bool lower = true;

    double at(const Vec2& p) const {
        const Vec2 d = p - p0;
        const double quad = 0.5 * delta * d.squaredNorm();
        return v0 + grad.dot(d) + (lower ? -quad : quad);
    }
};

inline Surrogate lower_surrogate(double v0, const Vec2& grad, double delta, const Vec2& p0) {
    return Surrogate{v0, grad, delta, p0, true};
}
inline Surrogate upper_surrogate(double v0, const Vec2& grad, double delta, const Vec2& p0) {
    return Surrogate{v0, grad, delta, p0, false};
}

/// Linearized minimum-distance constraint: unit^T (p - other) >= dist, which
/// implies ||p - other|| >= dist by Cauchy-Schwarz.
struct DistanceCut {
    Vec2 unit = Vec2::Zero();
    Vec2 other = Vec2::Zero();
    double dist = 0.0;

    bool satisfied(const Vec2& p, double tol = 0.0) const {
        return unit.dot(p - other) >= dist - tol;
    }
};

inline DistanceCut distance_linearization(const Position2D& anchor, const Position2D& other,
                                          double dist) {
    const Vec2 d = anchor.vec() - other.vec();
    const double n = d.norm();
    if (n < 1e-12)
        throw std::invalid_argument("distance_linearization: anchor coincides with the neighbor");
    return DistanceCut{d / n, other.vec(), dist};
}

/// Per-user communication side constraint f_k(p)/g_k(p) >= gamma for the
/// transmit sweep; rx sweeps carry none.
struct CommTerm {
    PositionObjective obj;  // shares the tx positions
    double gamma = 0.0;
};

struct RxObjectiveContext {
    PositionObjective sensing;
};

struct TxObjectiveContext {
    PositionObjective sensing;
    std::vector<CommTerm> comm;
};

/// Builds the receive-side context. The combiner is normalized first (the
/// ratio is scale-invariant in u) and all terms are rescaled by the current
/// denominator so the SCA subproblems see O(1) data.
inline RxObjectiveContext make_rx_context(const ScenarioRealization& real,
                                          const ScenarioConfig& cfg, const AntennaLayout& layout,
                                          const CMat& tx_beams, const CVec& u_raw) {
    const int N = static_cast<int>(tx_beams.cols());
    const int M = static_cast<int>(layout.rx.size());
    const CVec u = u_raw.normalized();

    RxObjectiveContext ctx;
    PositionObjective& po = ctx.sensing;
    po.positions = layout.rx;
    po.wavelength = cfg.wavelength;
    po.den_const = cfg.noise_radar_var * u.squaredNorm();

    const CVec h_t_d = channel_vector(layout.tx, real.target_tx, cfg.wavelength);
    CMat coef(M, N);
    for (int m = 0; m < M; ++m)
        for (int n = 0; n < N; ++n) coef(m, n) = std::conj(u[m]);

    QuadTerm target;
    target.paths = real.target_rx;
    target.weight = std::norm(real.target_rcs);
    target.gtilde.resize(real.target_rx.count(), N);
    for (int n = 0; n < N; ++n)
        target.gtilde.col(n) = (h_t_d.dot(tx_beams.col(n))) * real.target_rx.coeff;
    target.coef = coef;
    po.num.push_back(std::move(target));

    for (int l = 0; l < cfg.l_clutter(); ++l) {
        const CVec h_t_l = channel_vector(layout.tx, real.clutter_tx[l], cfg.wavelength);
        QuadTerm cl;
        cl.paths = real.clutter_rx[l];
        cl.weight = std::norm(real.clutter_rcs[l]);
        cl.gtilde.resize(real.clutter_rx[l].count(), N);
        for (int n = 0; n < N; ++n)
            cl.gtilde.col(n) = (h_t_l.dot(tx_beams.col(n))) * real.clutter_rx[l].coeff;
        cl.coef = coef;
        po.den.push_back(std::move(cl));
    }

    // Normalize to O(1): divide every term by the current denominator value.
    const double g0 = eval_fg(po, 0, po.positions[0]).g;
    if (g0 > 0) {
        const double s = 1.0 / g0;
        for (auto& t : po.num) t.weight *= s;
        for (auto& t : po.den) t.weight *= s;
        po.num_const *= s;
        po.den_const *= s;
    }
    return ctx;
}

/// Builds the transmit-side context, including the per-user surrogate data.
inline TxObjectiveContext make_tx_context(const ScenarioRealization& real,
                                          const ScenarioConfig& cfg, const AntennaLayout& layout,
                                          const CMat& tx_beams, const CVec& u_raw) {
    const int N = static_cast<int>(tx_beams.cols());
    const CVec u = u_raw.normalized();

    TxObjectiveContext ctx;
    PositionObjective& po = ctx.sensing;
    po.positions = layout.tx;
    po.wavelength = cfg.wavelength;
    po.den_const = cfg.noise_radar_var * u.squaredNorm();

    CMat coef(N, N);  // coef(n, b) = conj(w_b[n])
    for (int n = 0; n < N; ++n)
        for (int b = 0; b < N; ++b) coef(n, b) = std::conj(tx_beams(n, b));

    const CVec h_r_d = channel_vector(layout.rx, real.target_rx, cfg.wavelength);
    QuadTerm target;
    target.paths = real.target_tx;
    target.weight = std::norm(real.target_rcs);
    target.gtilde.resize(real.target_tx.count(), N);
    for (int b = 0; b < N; ++b) target.gtilde.col(b) = (h_r_d.dot(u)) * real.target_tx.coeff;
    target.coef = coef;
    po.num.push_back(std::move(target));

    for (int l = 0; l < cfg.l_clutter(); ++l) {
        const CVec h_r_l = channel_vector(layout.rx, real.clutter_rx[l], cfg.wavelength);
        QuadTerm cl;
        cl.paths = real.clutter_tx[l];
        cl.weight = std::norm(real.clutter_rcs[l]);
        cl.gtilde.resize(real.clutter_tx[l].count(), N);
        for (int b = 0; b < N; ++b) cl.gtilde.col(b) = (h_r_l.dot(u)) * real.clutter_tx[l].coeff;
        cl.coef = coef;
        po.den.push_back(std::move(cl));
    }
    {
        const double g0 = eval_fg(po, 0, po.positions[0]).g;
        if (g0 > 0) {
            const double s = 1.0 / g0;
            for (auto& t : po.num) t.weight *= s;
            for (auto& t : po.den) t.weight *= s;
            po.num_const *= s;
            po.den_const *= s;
        }
    }

    const int K = cfg.k_users();
    for (int k = 0; k < K; ++k) {
        CommTerm cm;
        cm.gamma = cfg.gamma_for(k);
        PositionObjective& co = cm.obj;
        co.positions = layout.tx;
        co.wavelength = cfg.wavelength;
        co.den_const = cfg.noise_user_var;

        QuadTerm sig;
        sig.paths = real.user_paths[k];
        sig.weight = 1.0;
        sig.gtilde = real.user_paths[k].coeff;  // L x 1
        sig.coef.resize(N, 1);
        for (int n = 0; n < N; ++n) sig.coef(n, 0) = std::conj(tx_beams(n, k));
        co.num.push_back(std::move(sig));

        if (N > 1) {
            QuadTerm intf;
            intf.paths = real.user_paths[k];
            intf.weight = 1.0;
            intf.gtilde.resize(real.user_paths[k].count(), N - 1);
            intf.coef.resize(N, N - 1);
            int col = 0;
            for (int b = 0; b < N; ++b) {
                if (b == k) continue;
                intf.gtilde.col(col) = real.user_paths[k].coeff;
                for (int n = 0; n < N; ++n) intf.coef(n, col) = std::conj(tx_beams(n, b));
                ++col;
            }
            co.den.push_back(std::move(intf));
        }
        const double gk0 = eval_fg(co, 0, co.positions[0]).g;
        if (gk0 > 0) {
            const double s = 1.0 / gk0;
            for (auto& t : co.num) t.weight *= s;
            for (auto& t : co.den) t.weight *= s;
            co.num_const *= s;
            co.den_const *= s;
        }
        ctx.comm.push_back(std::move(cm));
    }
    return ctx;
}

/// Inner-loop controls of the per-antenna successive convex approximation.
struct ScaConfig {
    int max_iter = 15;
    double rel_tol = 1e-4;
    double qcqp_tol = 1e-8;
    // Cap on the displacement from the entry position within one call; the
    // outer loop shrinks it near convergence (trust-region schedule).
    double max_step = std::numeric_limits<double>::infinity();
};

/// Iterate log of one per-antenna optimization.
struct ScaState {
    Position2D position;
    double alpha = 0.0;
    double beta = 0.0;
    double chi = 0.0;
    double varsigma = 0.0;
    int iterations = 0;
    std::vector<double> trace;  // exact ratio after each accepted step
};

namespace detail_pos {

/// One per-antenna SCA run shared by both sides. `comm` may be empty.
inline Position2D optimize_single_position(PositionObjective& sens, std::vector<CommTerm>& comm,
                                           int idx, const Region& region, double min_dist,
                                           const ScaConfig& cfg, ScaState* state) {
    Vec2 p = sens.positions[idx].vec();
    const Vec2 entry = p;

    // Numerical drift can leave the incumbent marginally inside the spacing
    // band; push it back out before linearizing (tolerance 1e-9).
    for (std::size_t b = 0; b < sens.positions.size(); ++b) {
        if (static_cast<int>(b) == idx) continue;
        const Vec2 other = sens.positions[b].vec();
        const double d = (p - other).norm();
        if (d < min_dist && d > min_dist - 1e-9) {
            p = other + (p - other) * (min_dist / d);
            p.x() = std::clamp(p.x(), region.x_min, region.x_max);
            p.y() = std::clamp(p.y(), region.y_min, region.y_max);
        }
    }

    const auto [df, dg] = hessian_bounds(sens, idx);
    std::vector<std::pair<double, double>> comm_deltas;
    for (const auto& cm : comm) comm_deltas.push_back(hessian_bounds(cm.obj, idx));

    FgValue cur = eval_fg(sens, idx, Position2D::from_vec(p));
    double chi = cur.ratio();
    ScaState st;
    st.trace.push_back(chi);

    for (int it = 0; it < cfg.max_iter; ++it) {
        st.iterations = it + 1;
        Vec2 gf, gg;
        grad_fg(sens, idx, Position2D::from_vec(p), gf, gg);
        const double varsigma = chi / cur.g;  // tight at the expansion point

        convex::QcqpProblem qp;
        qp.objective.resize(5);
        qp.objective << 0, 0, 0, 0, 1;  // x = (px, py, alpha, beta, chi)

        {  // alpha <= f_lower(p)
            convex::QuadConstraint c;
            c.Q = Eigen::MatrixXd::Zero(5, 5);
            c.Q(0, 0) = c.Q(1, 1) = df;
            c.q.resize(5);
            c.q << -df * p.x() - gf.x(), -df * p.y() - gf.y(), 1.0, 0.0, 0.0;
            c.r = 0.5 * df * p.squaredNorm() + gf.dot(p) - cur.f;
            qp.constraints.push_back(std::move(c));
        }
        {  // g_upper(p) <= beta
            convex::QuadConstraint c;
            c.Q = Eigen::MatrixXd::Zero(5, 5);
            c.Q(0, 0) = c.Q(1, 1) = dg;
            c.q.resize(5);
            c.q << gg.x() - dg * p.x(), gg.y() - dg * p.y(), 0.0, -1.0, 0.0;
            c.r = cur.g - gg.dot(p) + 0.5 * dg * p.squaredNorm();
            qp.constraints.push_back(std::move(c));
        }
        {  // 0.5*(varsigma*beta^2 + chi^2/varsigma) <= alpha
            convex::QuadConstraint c;
            c.Q = Eigen::MatrixXd::Zero(5, 5);
            c.Q(3, 3) = varsigma;
            c.Q(4, 4) = 1.0 / varsigma;
            c.q.resize(5);
            c.q << 0.0, 0.0, -1.0, 0.0, 0.0;
            c.r = 0.0;
            qp.constraints.push_back(std::move(c));
        }
        std::vector<DistanceCut> cuts;
        for (std::size_t b = 0; b < sens.positions.size(); ++b) {
            if (static_cast<int>(b) == idx) continue;
            cuts.push_back(distance_linearization(Position2D::from_vec(p), sens.positions[b],
                                                  min_dist));
            convex::QuadConstraint c;
            c.q.resize(5);
            c.q << -cuts.back().unit.x(), -cuts.back().unit.y(), 0.0, 0.0, 0.0;
            c.r = min_dist + cuts.back().unit.dot(cuts.back().other);
            qp.constraints.push_back(std::move(c));
        }
        std::vector<FgValue> comm_cur(comm.size());
        for (std::size_t k = 0; k < comm.size(); ++k) {
            // gamma * g_upper_k(p) - f_lower_k(p) <= 0
            comm_cur[k] = eval_fg(comm[k].obj, idx, Position2D::from_vec(p));
            Vec2 gfk, ggk;
            grad_fg(comm[k].obj, idx, Position2D::from_vec(p), gfk, ggk);
            const double gamma = comm[k].gamma;
            const double dq = gamma * comm_deltas[k].second + comm_deltas[k].first;
            convex::QuadConstraint c;
            c.Q = Eigen::MatrixXd::Zero(5, 5);
            c.Q(0, 0) = c.Q(1, 1) = dq;
            const Vec2 lin = gamma * ggk - gfk;
            c.q.resize(5);
            c.q << lin.x() - dq * p.x(), lin.y() - dq * p.y(), 0.0, 0.0, 0.0;
            c.r = gamma * comm_cur[k].g - comm_cur[k].f - lin.dot(p) + 0.5 * dq * p.squaredNorm();
            qp.constraints.push_back(std::move(c));
        }

        qp.lower.resize(5);
        qp.upper.resize(5);
        const double inf = std::numeric_limits<double>::infinity();
        qp.lower << std::max(region.x_min, entry.x() - cfg.max_step),
            std::max(region.y_min, entry.y() - cfg.max_step), 0.0, 0.0, 0.0;
        qp.upper << std::min(region.x_max, entry.x() + cfg.max_step),
            std::min(region.y_max, entry.y() + cfg.max_step), inf, inf, inf;
        qp.start.resize(5);
        qp.start << p.x(), p.y(), cur.f, cur.g, chi;

        auto sol = convex::solve_qcqp(qp, cfg.qcqp_tol);
#ifdef MAISAC_POS_TRACE
        std::fprintf(stderr,
                     "  sca it %d: status=%d it=%d obj=%.6e cand=(%.5f,%.5f) from (%.5f,%.5f)\n",
                     it, static_cast<int>(sol.status.kind), sol.status.iterations, sol.status.objective,
                     sol.x[0], sol.x[1], p.x(), p.y());
#endif
        if (!sol.status.ok()) break;

        auto admissible = [&](const Vec2& q) {
            for (std::size_t b = 0; b < sens.positions.size(); ++b) {
                if (static_cast<int>(b) == idx) continue;
                if ((q - sens.positions[b].vec()).norm() < min_dist - 1e-9) return false;
            }
            for (std::size_t k = 0; k < comm.size(); ++k) {
                const FgValue ck = eval_fg(comm[k].obj, idx, Position2D::from_vec(q));
                if (ck.ratio() < comm[k].gamma * (1.0 - 1e-9)) return false;
            }
            return true;
        };
        Vec2 cand(std::clamp(sol.x[0], region.x_min, region.x_max),
                  std::clamp(sol.x[1], region.y_min, region.y_max));
        FgValue next = eval_fg(sens, idx, Position2D::from_vec(cand));
        const double new_chi = next.ratio();
        if (!admissible(cand) || new_chi < chi * (1.0 - 1e-12))
            break;  // reject; keep incumbent

        // The global curvature majorant keeps the raw step very short; extend
        // along the same direction while the exact objective keeps improving
        // and the true constraints hold.
        const Vec2 dir = cand - p;
        double best_chi = new_chi;
        Vec2 best = cand;
        FgValue best_val = next;
        for (double factor = 2.0; factor <= 64.0 && dir.norm() > 0; factor *= 2.0) {
            Vec2 ext = p + factor * dir;
            ext.x() = std::clamp(ext.x(), region.x_min, region.x_max);
            ext.y() = std::clamp(ext.y(), region.y_min, region.y_max);
            if (!admissible(ext)) break;
            const FgValue ev = eval_fg(sens, idx, Position2D::from_vec(ext));
            if (ev.ratio() <= best_chi) break;
            best_chi = ev.ratio();
            best = ext;
            best_val = ev;
        }

        const double gain = best_chi - chi;
        p = best;
        cur = best_val;
        chi = best_chi;
        st.trace.push_back(chi);
        st.alpha = sol.x[2];
        st.beta = sol.x[3];
        st.chi = sol.x[4];
        st.varsigma = varsigma;
        if (gain < cfg.rel_tol * std::abs(chi)) break;
    }

    sens.positions[idx] = Position2D::from_vec(p);
    for (auto& cm : comm) cm.obj.positions[idx] = sens.positions[idx];
    st.position = sens.positions[idx];
    if (state) *state = st;
    return sens.positions[idx];
}

}  // namespace detail_pos

/// P4.1 sweep step: optimize receive antenna m with everything else fixed.
inline Position2D optimize_rx_position(RxObjectiveContext& ctx, int m, const Region& region,
                                       double min_dist, const ScaConfig& cfg,
                                       ScaState* state = nullptr) {
    std::vector<CommTerm> none;
    return detail_pos::optimize_single_position(ctx.sensing, none, m, region, min_dist, cfg,
                                                state);
}

/// P5.1 sweep step: optimize transmit antenna n under the user surrogates.
inline Position2D optimize_tx_position(TxObjectiveContext& ctx, int n, const Region& region,
                                       double min_dist, const ScaConfig& cfg,
                                       ScaState* state = nullptr) {
    return detail_pos::optimize_single_position(ctx.sensing, ctx.comm, n, region, min_dist, cfg,
                                                state);
}

}  // namespace maisac
