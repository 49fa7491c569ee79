#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maisac/convex/status.hpp"

namespace maisac::convex {

/// Convex quadratic inequality 0.5*x'Qx + q'x + r <= 0 (Q PSD; Q = 0 gives a
/// linear constraint).
struct QuadConstraint {
    Eigen::MatrixXd Q;
    Eigen::VectorXd q;
    double r = 0.0;

    double value(const Eigen::VectorXd& x) const {
        double v = q.dot(x) + r;
        if (Q.size() > 0) v += 0.5 * x.dot(Q * x);
        return v;
    }
    Eigen::VectorXd grad(const Eigen::VectorXd& x) const {
        if (Q.size() == 0) return q;
        return Q * x + q;
    }
};

/// Small convex QCQP: maximize objective'x subject to quadratic constraints
/// and optional box bounds. A feasible (or boundary) start must be supplied;
/// the SCA subproblems always have one.
struct QcqpProblem {
    Eigen::VectorXd objective;
    std::vector<QuadConstraint> constraints;
    Eigen::VectorXd lower;  // may be empty; -inf entries allowed
    Eigen::VectorXd upper;  // may be empty; +inf entries allowed
    Eigen::VectorXd start;
};

struct QcqpSolution {
    Eigen::VectorXd x;
    SolveStatus status;
};

namespace detail {

inline std::vector<QuadConstraint> expand_constraints(const QcqpProblem& prob) {
    std::vector<QuadConstraint> cons = prob.constraints;
    const Eigen::Index n = prob.objective.size();
    const double inf = std::numeric_limits<double>::infinity();
    auto add_linear = [&](const Eigen::VectorXd& a, double rhs) {
        QuadConstraint c;
        c.Q.resize(0, 0);
        c.q = a;
        c.r = -rhs;
        cons.push_back(std::move(c));
    };
    for (Eigen::Index i = 0; i < prob.lower.size(); ++i) {
        if (prob.lower[i] > -inf) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
            a[i] = -1.0;
            add_linear(a, -prob.lower[i]);  // -x_i <= -lo
        }
    }
    for (Eigen::Index i = 0; i < prob.upper.size(); ++i) {
        if (prob.upper[i] < inf) {
            Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
            a[i] = 1.0;
            add_linear(a, prob.upper[i]);  // x_i <= up
        }
    }
    return cons;
}

}  // namespace detail

/// Primal-dual interior-point method for the problem above. Handles starts on
/// the constraint boundary by slacking each inequality and driving the primal
/// residual to zero (infeasible-start Newton with Mehrotra correction).
inline QcqpSolution solve_qcqp(const QcqpProblem& prob, double tol = 1e-8) {
    using Vec = Eigen::VectorXd;
    using Mat = Eigen::MatrixXd;

    const Eigen::Index n = prob.objective.size();
    if (prob.start.size() != n)
        throw std::invalid_argument("solve_qcqp: start point dimension mismatch");
    const std::vector<QuadConstraint> cons = detail::expand_constraints(prob);
    const int m = static_cast<int>(cons.size());
    const Vec c = prob.objective;  // maximize c'x == minimize -c'x

    QcqpSolution out;
    out.x = prob.start;
    if (m == 0) {  // unconstrained linear objective: only sensible if c == 0
        out.status.kind = c.norm() == 0.0 ? SolveStatus::Kind::Optimal
                                          : SolveStatus::Kind::NumericalFailure;
        out.status.objective = c.dot(out.x);
        return out;
    }

    Vec x = prob.start;
    Vec s(m), lam(m);
    // Per-constraint magnitudes; residual tests are relative to these so that
    // wildly different constraint scales cannot mask sloppy convergence.
    Vec cscale(m);
    const double xnorm0 = 1.0 + prob.start.norm();
    for (int i = 0; i < m; ++i) {
        double qn = cons[i].Q.size() > 0 ? cons[i].Q.norm() : 0.0;
        cscale[i] = 1e-12 + std::abs(cons[i].r) + cons[i].q.norm() * xnorm0 +
                    0.5 * qn * xnorm0 * xnorm0;
    }
    for (int i = 0; i < m; ++i)
        s[i] = std::max(-cons[i].value(x), 1e-6 * cscale[i]);
    for (int i = 0; i < m; ++i) lam[i] = 1.0;

    auto eval_all = [&](const Vec& xx, Vec& vals, Mat& J) {
        vals.resize(m);
        J.resize(m, n);
        for (int i = 0; i < m; ++i) {
            vals[i] = cons[i].value(xx);
            J.row(i) = cons[i].grad(xx).transpose();
        }
    };

    const int max_iter = 120;
    SolveStatus st;
    Vec vals;
    Mat J;
    for (int iter = 0; iter < max_iter; ++iter) {
        eval_all(x, vals, J);
        Vec r_dual = -c + J.transpose() * lam;
        Vec r_prim = vals + s;
        const double mu = s.dot(lam) / m;

        double rel_p = 0.0;
        for (int i = 0; i < m; ++i)
            rel_p = std::max(rel_p, std::abs(r_prim[i]) / cscale[i]);
        const double obj = c.dot(x);
        const double gap = s.dot(lam);  // objective-unit bound on suboptimality

        st.iterations = iter;
        st.primal_residual = rel_p;
        st.dual_residual = r_dual.lpNorm<Eigen::Infinity>();
        st.duality_gap = gap / (1.0 + std::abs(obj));
        if (rel_p <= tol && st.dual_residual <= tol * (1.0 + c.lpNorm<Eigen::Infinity>()) &&
            gap <= tol * (1.0 + std::abs(obj))) {
            st.kind = SolveStatus::Kind::Optimal;
            break;
        }

        Mat H = Mat::Zero(n, n);
        for (int i = 0; i < m; ++i)
            if (cons[i].Q.size() > 0) H += lam[i] * cons[i].Q;
        H.diagonal().array() += 1e-12 * (1.0 + H.trace());

        auto solve_newton = [&](const Vec& r_cent, Vec& dx, Vec& ds, Vec& dlam) -> bool {
            // (H + J' S^-1 Lam J) dx = -r_dual - J' S^-1 (-r_cent + Lam r_prim)
            Vec sinv_lam = lam.array() / s.array();
            Mat K = H;
            K.noalias() += J.transpose() * sinv_lam.asDiagonal() * J;
            Vec rhs = -r_dual - J.transpose() * ((lam.array() * r_prim.array() - r_cent.array()) / s.array()).matrix();
            Eigen::LDLT<Mat> ldlt(K);
            if (ldlt.info() != Eigen::Success) return false;
            dx = ldlt.solve(rhs);
            ds = -r_prim - J * dx;
            dlam = ((-r_cent.array() - lam.array() * ds.array()) / s.array()).matrix();
            return dx.allFinite() && ds.allFinite() && dlam.allFinite();
        };
        auto max_step = [&](const Vec& v, const Vec& dv) {
            double a = 1.0;
            for (int i = 0; i < m; ++i)
                if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
            return a;
        };

        // Predictor.
        Vec r_cent_aff = (s.array() * lam.array()).matrix();
        Vec dx_a, ds_a, dlam_a;
        if (!solve_newton(r_cent_aff, dx_a, ds_a, dlam_a)) {
            st.kind = SolveStatus::Kind::NumericalFailure;
            out.x = prob.start;
            out.status = st;
            return out;
        }
        double ap = max_step(s, ds_a), ad = max_step(lam, dlam_a);
        double mu_aff = (s + ap * ds_a).dot(lam + ad * dlam_a) / m;
        double sigma = std::pow(std::min(1.0, std::max(mu_aff / std::max(mu, 1e-300), 0.0)), 3);
        sigma = std::min(std::max(sigma, 1e-6), 0.9);

        // Corrector.
        Vec r_cent = (s.array() * lam.array() + ds_a.array() * dlam_a.array() - sigma * mu).matrix();
        Vec dx, ds, dlam;
        if (!solve_newton(r_cent, dx, ds, dlam)) {
            st.kind = SolveStatus::Kind::NumericalFailure;
            out.x = prob.start;
            out.status = st;
            return out;
        }
        double alpha_p = 0.99 * max_step(s, ds);
        double alpha_d = 0.99 * max_step(lam, dlam);
        double alpha = std::min({1.0, alpha_p, alpha_d});
        x += alpha * dx;
        s += alpha * ds;
        lam += alpha * dlam;
        if (iter == max_iter - 1) st.kind = SolveStatus::Kind::MaxIterations;
    }
    if (st.kind != SolveStatus::Kind::Optimal &&
        st.kind != SolveStatus::Kind::MaxIterations)
        st.kind = SolveStatus::Kind::MaxIterations;

    // Never return something worse than the supplied start when that start
    // is itself feasible at tolerance.
    double viol_start = 0.0, viol_x = 0.0;
    for (int i = 0; i < m; ++i) {
        viol_start = std::max(viol_start, cons[i].value(prob.start) / cscale[i]);
        viol_x = std::max(viol_x, cons[i].value(x) / cscale[i]);
    }
    const double feas_tol = std::sqrt(tol);
    const bool start_ok = viol_start <= feas_tol;
    const bool x_ok = x.allFinite() && viol_x <= feas_tol;
    if (!x_ok || (start_ok && c.dot(x) < c.dot(prob.start))) {
        out.x = prob.start;
        if (st.kind == SolveStatus::Kind::Optimal && !x_ok)
            st.kind = SolveStatus::Kind::NumericalFailure;
    } else {
        out.x = x;
    }
    st.objective = c.dot(out.x);
    st.dual_objective = st.objective + m * st.duality_gap;
    out.status = st;
    return out;
}

}  // namespace maisac::convex
