#pragma once

#include <cmath>
#include <complex>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "maisac/convex/status.hpp"

namespace maisac::convex {

using CMat = Eigen::MatrixXcd;

enum class Sense { LessEq, Eq, GreaterEq };

/// Trace-linear constraint: sum_j tr(A_j X_j) + a.s <= / == / >= rhs.
/// Empty matrices / empty vectors stand for zero coefficients.
struct SdpConstraint {
    std::vector<CMat> block_mats;
    Eigen::VectorXd scalar_coefs;
    Sense sense = Sense::Eq;
    double rhs = 0.0;
};

/// Complex Hermitian SDP with additional nonnegative scalar variables
/// (the Charnes-Cooper scalar and inequality slacks live there).
struct SdpProblem {
    std::vector<int> block_dims;
    int n_scalars = 0;
    bool maximize = false;
    std::vector<CMat> objective_blocks;
    Eigen::VectorXd objective_scalars;
    std::vector<SdpConstraint> constraints;
};

struct SdpSolution {
    std::vector<CMat> blocks;
    Eigen::VectorXd scalars;
    SolveStatus status;
};

namespace detail {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

/// Real symmetric embedding of a Hermitian matrix, scaled so that
/// <embed(A), embed(X)>_F = tr(A X).
inline Mat embed_half(const CMat& A) {
    const Eigen::Index d = A.rows();
    Mat E(2 * d, 2 * d);
    E.topLeftCorner(d, d) = A.real();
    E.bottomRightCorner(d, d) = A.real();
    E.topRightCorner(d, d) = -A.imag();
    E.bottomLeftCorner(d, d) = A.imag();
    return 0.5 * (E + E.transpose()) * 0.5;  // symmetrize, then the 1/2 factor
}

inline CMat unembed(const Mat& Y) {
    const Eigen::Index d = Y.rows() / 2;
    Eigen::MatrixXd re = 0.5 * (Y.topLeftCorner(d, d) + Y.bottomRightCorner(d, d));
    Eigen::MatrixXd im = 0.5 * (Y.bottomLeftCorner(d, d) - Y.topRightCorner(d, d));
    CMat X = re.cast<std::complex<double>>() + std::complex<double>(0, 1) * im.cast<std::complex<double>>();
    return 0.5 * (X + X.adjoint());
}

/// Dense block-diagonal SDP in real standard form:
/// min sum_j <C_j, Y_j>  s.t.  sum_j <A_ij, Y_j> = b_i,  Y_j >= 0.
struct RealBlockSdp {
    std::vector<int> dims;
    std::vector<Mat> C;                    // per block
    std::vector<std::vector<Mat>> A;       // [constraint][block]
    Vec b;

    int n_cons() const { return static_cast<int>(b.size()); }
    int n_blocks() const { return static_cast<int>(dims.size()); }
};

using BlockVals = std::vector<Mat>;

inline double bdot(const Mat& a, const Mat& b) { return (a.cwiseProduct(b)).sum(); }

inline Vec apply_A(const RealBlockSdp& P, const BlockVals& Y) {
    Vec r(P.n_cons());
    for (int i = 0; i < P.n_cons(); ++i) {
        double v = 0;
        for (int j = 0; j < P.n_blocks(); ++j)
            if (P.A[i][j].size() > 0) v += bdot(P.A[i][j], Y[j]);
        r[i] = v;
    }
    return r;
}

inline BlockVals apply_At(const RealBlockSdp& P, const Vec& y) {
    BlockVals R(P.n_blocks());
    for (int j = 0; j < P.n_blocks(); ++j) R[j] = Mat::Zero(P.dims[j], P.dims[j]);
    for (int i = 0; i < P.n_cons(); ++i)
        for (int j = 0; j < P.n_blocks(); ++j)
            if (P.A[i][j].size() > 0) R[j] += y[i] * P.A[i][j];
    return R;
}

inline double block_inner(const BlockVals& a, const BlockVals& b) {
    double v = 0;
    for (std::size_t j = 0; j < a.size(); ++j) v += bdot(a[j], b[j]);
    return v;
}

/// Largest alpha in (0, 1] with S + alpha*dS staying positive definite.
inline double max_psd_step(const BlockVals& S, const BlockVals& dS) {
    double alpha = 1.0;
    for (std::size_t j = 0; j < S.size(); ++j) {
        Eigen::LLT<Mat> llt(S[j]);
        if (llt.info() != Eigen::Success) return 0.0;
        Mat L = llt.matrixL();
        Mat W = L.triangularView<Eigen::Lower>().solve(dS[j]);
        W = L.triangularView<Eigen::Lower>().solve(W.transpose()).eval();
        W = 0.5 * (W + W.transpose());
        Eigen::SelfAdjointEigenSolver<Mat> es(W, Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff();
        if (lmin < 0) alpha = std::min(alpha, -1.0 / lmin);
    }
    return alpha;
}

struct IpmResult {
    BlockVals X;
    Vec y;
    SolveStatus status;
};

/// Maps solver-space iterates back to the caller's units so that residuals
/// and certificates are judged against the original data, not the
/// equilibrated copy (row scaling can hide order-one violations otherwise).
struct ScaleInfo {
    Vec p_ratio;     // <A_i, X> = p_ratio_i * <A'_i, Y>
    Vec y_scale;     // y_i = y_scale_i * y'_i
    Vec z_scale;     // Z_j = z_scale_j * Z'_j
    double obj_scale = 1.0;
    Vec b_orig;
    std::vector<double> c_norm;  // per-block original objective norms
    Vec a_row_norm;              // per-row max original block norm
};

/// HKM primal-dual predictor-corrector for the dense block SDP.
inline IpmResult solve_real_sdp(const RealBlockSdp& P, const ScaleInfo& S, double tol) {
    const int m = P.n_cons();
    const int B = P.n_blocks();
    double nu = 0;
    for (int j = 0; j < B; ++j) nu += P.dims[j];

    IpmResult res;
    res.status.kind = SolveStatus::Kind::MaxIterations;
    double best_metric = 1e300;
    int stall_count = 0;
    bool force_center = false;
    BlockVals best_X;
    Vec best_y;
    SolveStatus best_status;

    double normC = 0, normA_max = 0;
    for (int j = 0; j < B; ++j) normC = std::hypot(normC, P.C[j].norm());
    for (int i = 0; i < m; ++i) {
        double na = 0;
        for (int j = 0; j < B; ++j)
            if (P.A[i][j].size() > 0) na = std::hypot(na, P.A[i][j].norm());
        normA_max = std::max(normA_max, na);
    }
    const double bmax = m > 0 ? P.b.cwiseAbs().maxCoeff() : 0.0;
    const double init = std::max({10.0, std::sqrt(nu), 2.0 * bmax, normC});

    BlockVals X(B), Z(B);
    for (int j = 0; j < B; ++j) {
        X[j] = init * Mat::Identity(P.dims[j], P.dims[j]);
        Z[j] = init * Mat::Identity(P.dims[j], P.dims[j]);
    }
    Vec y = Vec::Zero(m);

    Mat a_norm(m, B);  // scaled per-entry norms, fixed over the run
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < B; ++j)
            a_norm(i, j) = P.A[i][j].size() > 0 ? P.A[i][j].norm() : 0.0;

    const int max_iter = 100;
    for (int iter = 0; iter < max_iter; ++iter) {
        const Vec Ax = apply_A(P, X);
        Vec rp = P.b - Ax;
        BlockVals Aty = apply_At(P, y);
        BlockVals Rd(B);
        double gap = 0;
        for (int j = 0; j < B; ++j) {
            Rd[j] = P.C[j] - Aty[j] - Z[j];
            gap += bdot(X[j], Z[j]);
        }
        const double mu = gap / nu;

        // Residuals and objectives in the caller's units. The denominators
        // carry the constituent term magnitudes so that rows dominated by
        // cancellation are judged against what double precision can deliver.
        Vec ynorm_blocks(B);
        for (int j = 0; j < B; ++j) ynorm_blocks[j] = X[j].norm();
        double rel_p = 0;
        for (int i = 0; i < m; ++i) {
            const double ax = S.p_ratio[i] * Ax[i];
            double mag = 0;
            for (int j = 0; j < B; ++j) mag += a_norm(i, j) * ynorm_blocks[j];
            mag *= S.p_ratio[i];
            rel_p = std::max(rel_p, std::abs(S.b_orig[i] - ax) /
                                        (1.0 + std::abs(S.b_orig[i]) + mag));
        }
        double rel_d = 0;
        for (int j = 0; j < B; ++j) {
            double mag = S.c_norm[j] + S.z_scale[j] * Z[j].norm();
            for (int i = 0; i < m; ++i) mag += S.z_scale[j] * std::abs(y[i]) * a_norm(i, j);
            rel_d = std::max(rel_d, S.z_scale[j] * Rd[j].norm() / (1.0 + mag));
        }
        double pobj = 0;
        for (int j = 0; j < B; ++j) pobj += bdot(P.C[j], X[j]);
        pobj *= S.obj_scale;
        const double dobj = S.obj_scale * P.b.dot(y);
        const double rel_g = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

        res.status.iterations = iter;
        res.status.primal_residual = rel_p;
        res.status.dual_residual = rel_d;
        res.status.duality_gap = rel_g;
        res.status.objective = pobj;
        res.status.dual_objective = dobj;
#ifdef MAISAC_SDP_TRACE
        std::fprintf(stderr, "it %2d mu=%.3e rp=%.3e rd=%.3e gap=%.3e |y|=%.3e pobj=%.3e dobj=%.3e\n",
                     iter, mu, rel_p, rel_d, rel_g, y.lpNorm<Eigen::Infinity>(), pobj, dobj);
#endif
        if (rel_p <= tol && rel_d <= tol &&
            (rel_g <= tol || S.obj_scale * mu <= tol * 1e-2 * (1.0 + std::abs(pobj)))) {
            res.status.kind = SolveStatus::Kind::Optimal;
            res.X = X;
            res.y = y;
            return res;
        }
        // Degenerate problems (empty-interior feasible sets, unattained duals)
        // flatten out or diverge before the target tolerance; keep the best
        // iterate and hand it back with its residuals once progress ceases.
        // The bookkeeping metric lives in equilibrated space where it cannot
        // be gamed by iterates of very large norm.
        double rd_scaled = 0;
        for (int j = 0; j < B; ++j) rd_scaled = std::hypot(rd_scaled, Rd[j].norm());
        const double metric =
            std::max({(P.b - Ax).norm() / (1.0 + P.b.norm()), rd_scaled / (1.0 + normC),
                      mu / (1.0 + std::abs(pobj) / std::max(S.obj_scale, 1e-300))});
        if (metric <= best_metric) {
            if (metric < 0.95 * best_metric) stall_count = 0;
            best_metric = metric;
            best_X = X;
            best_y = y;
            best_status = res.status;
        }
        const bool diverged = metric > 1e3 * best_metric && best_metric < 1e-2;
        if (diverged || ++stall_count >= 30) {
            res.X = best_X.empty() ? X : best_X;
            res.y = best_X.empty() ? y : best_y;
            if (!best_X.empty()) {
                res.status = best_status;
                res.status.kind = SolveStatus::Kind::MaxIterations;
            }
            return res;
        }

        // Farkas-style primal infeasibility certificate in original units:
        // y with A*(y) <= 0 and b'y > 0. An approximate certificate with
        // lambda_max(A*(y)) = d only excludes feasible X of trace below
        // (b'y)/d, so the test must clear the magnitude the iterate actually
        // reaches; otherwise large genuine solutions get branded infeasible.
        Vec y_orig = (S.y_scale.array() * y.array()).matrix();
        const double ynorm = y_orig.lpNorm<Eigen::Infinity>();
        if (ynorm > 1e2) {
            Vec yh = y_orig / ynorm;
            Vec yh_scaled = (yh.array() / S.y_scale.array()).matrix();
            BlockVals Scomb = apply_At(P, yh_scaled);
            double lmax = -1e300;
            double comb_scale = 0.0;
            for (int j = 0; j < B; ++j) {
                Eigen::SelfAdjointEigenSolver<Mat> es(
                    0.5 * S.z_scale[j] * (Scomb[j] + Scomb[j].transpose()), Eigen::EigenvaluesOnly);
                lmax = std::max(lmax, es.eigenvalues().maxCoeff());
            }
            for (int i = 0; i < m; ++i) comb_scale += std::abs(yh[i]) * S.a_row_norm[i];
            const double bty = S.b_orig.dot(yh);
            double tr_orig = 0;
            for (int j = 0; j < B; ++j)
                tr_orig += S.obj_scale / std::max(S.z_scale[j], 1e-300) * X[j].trace();
            const double excluded = 1e3 * (1.0 + std::abs(tr_orig));
#ifdef MAISAC_SDP_TRACE
            std::fprintf(stderr, "  cert check: |y|=%.3e bty=%.3e lmax=%.3e comb=%.3e tr=%.3e\n",
                         ynorm, bty, lmax, comb_scale, tr_orig);
#endif
            if (comb_scale > 0 &&
                bty > 1e-8 * (comb_scale + S.b_orig.lpNorm<Eigen::Infinity>()) &&
                lmax <= 1e-9 * comb_scale && std::max(lmax, 0.0) * excluded < 0.5 * bty) {
                res.status.kind = SolveStatus::Kind::Infeasible;
                res.X = X;
                res.y = y;
                return res;
            }
        }

        // Factor Z blocks.
        std::vector<Eigen::LLT<Mat>> zllt(B);
        bool fail = false;
        for (int j = 0; j < B; ++j) {
            zllt[j].compute(Z[j]);
            if (zllt[j].info() != Eigen::Success) fail = true;
        }
        if (fail) {
            res.status.kind = SolveStatus::Kind::NumericalFailure;
            res.X = X;
            res.y = y;
            return res;
        }
        auto zinv_times = [&](int j, const Mat& M) { return zllt[j].solve(M).eval(); };

        // Schur complement M_ik = sum_j tr(A_ij Z^-1 A_kj X).
        std::vector<BlockVals> V(m);  // V[k][j] = Z^-1 A_kj X
        for (int k = 0; k < m; ++k) {
            V[k].resize(B);
            for (int j = 0; j < B; ++j) {
                if (P.A[k][j].size() > 0)
                    V[k][j] = zinv_times(j, P.A[k][j]) * X[j];
                else
                    V[k][j].resize(0, 0);
            }
        }
        Mat M = Mat::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int k = 0; k < m; ++k) {
                double v = 0;
                for (int j = 0; j < B; ++j)
                    if (P.A[i][j].size() > 0 && V[k][j].size() > 0)
                        v += (P.A[i][j] * V[k][j]).trace();
                M(i, k) = v;
            }
        M = 0.5 * (M + M.transpose()).eval();

        auto schur_solve = [&](const Vec& rhs, Vec& out) -> bool {
            Mat Mreg = M;
            double ridge = 0.0;
            for (int attempt = 0; attempt < 6; ++attempt) {
                Eigen::LDLT<Mat> ldlt(Mreg);
                if (ldlt.info() == Eigen::Success) {
                    out = ldlt.solve(rhs);
                    if (out.allFinite()) {
                        out += ldlt.solve(rhs - M * out);  // one refinement pass
                        return out.allFinite();
                    }
                }
                ridge = (ridge == 0.0) ? 1e-13 * (1.0 + M.trace() / std::max(1, m)) : ridge * 100;
                Mreg = M;
                Mreg.diagonal().array() += ridge;
            }
            return false;
        };

        // Common pieces.
        BlockVals ZinvRdX(B), Zinv(B);
        for (int j = 0; j < B; ++j) {
            ZinvRdX[j] = zinv_times(j, Rd[j]) * X[j];
            Zinv[j] = zinv_times(j, Mat::Identity(P.dims[j], P.dims[j]));
        }
        const Vec A_zrdx = apply_A(P, ZinvRdX);
        const Vec A_zinv = apply_A(P, Zinv);

        // Predictor (sigma = 0).
        Vec rhs_aff = P.b + A_zrdx;  // = rp + A(X) + A(Z^-1 Rd X)
        Vec dy_aff;
        if (!schur_solve(rhs_aff, dy_aff)) {
            res.status.kind = SolveStatus::Kind::NumericalFailure;
            res.X = X;
            res.y = y;
            return res;
        }
        BlockVals At_dy = apply_At(P, dy_aff);
        BlockVals dZ_aff(B), dX_aff(B);
        for (int j = 0; j < B; ++j) {
            dZ_aff[j] = Rd[j] - At_dy[j];
            Mat d = -X[j] - zinv_times(j, dZ_aff[j]) * X[j];
            dX_aff[j] = 0.5 * (d + d.transpose());
        }
        const double ap_aff = std::min(1.0, 0.99 * max_psd_step(X, dX_aff));
        const double ad_aff = std::min(1.0, 0.99 * max_psd_step(Z, dZ_aff));
        double gap_aff = 0;
        for (int j = 0; j < B; ++j)
            gap_aff += bdot(X[j] + ap_aff * dX_aff[j], Z[j] + ad_aff * dZ_aff[j]);
        double sigma = std::pow(std::min(1.0, std::max(gap_aff / std::max(gap, 1e-300), 0.0)), 3);
        sigma = std::min(std::max(sigma, 1e-6), 0.9);
        if (force_center) {
            sigma = 0.9;
            force_center = false;
        }

        // Corrector.
        BlockVals corr(B);
        for (int j = 0; j < B; ++j)
            corr[j] = zinv_times(j, sigma * mu * Mat::Identity(P.dims[j], P.dims[j]) -
                                        dZ_aff[j] * dX_aff[j]);
        Vec rhs_corr = P.b + A_zrdx - apply_A(P, corr);
        Vec dy;
        if (!schur_solve(rhs_corr, dy)) {
            res.status.kind = SolveStatus::Kind::NumericalFailure;
            res.X = X;
            res.y = y;
            return res;
        }
        At_dy = apply_At(P, dy);
        BlockVals dZ(B), dX(B);
        bool bad = false;
        for (int j = 0; j < B; ++j) {
            dZ[j] = Rd[j] - At_dy[j];
            Mat d = corr[j] - X[j] - zinv_times(j, dZ[j]) * X[j];
            dX[j] = 0.5 * (d + d.transpose());
            if (!dX[j].allFinite() || !dZ[j].allFinite()) bad = true;
        }
        if (bad) {
            res.status.kind = SolveStatus::Kind::NumericalFailure;
            res.X = X;
            res.y = y;
            return res;
        }
        const double ap = std::min(1.0, 0.98 * max_psd_step(X, dX));
        const double ad = std::min(1.0, 0.98 * max_psd_step(Z, dZ));
        if (std::min(ap, ad) < 0.05) force_center = true;
#ifdef MAISAC_SDP_TRACE
        std::fprintf(stderr, "    sigma=%.3e ap=%.3e ad=%.3e\n", sigma, ap, ad);
#endif
        for (int j = 0; j < B; ++j) {
            X[j] += ap * dX[j];
            Z[j] += ad * dZ[j];
        }
        y += ad * dy;
    }
    if (!best_X.empty()) {
        res.status = best_status;
        res.status.kind = SolveStatus::Kind::MaxIterations;
        res.X = best_X;
        res.y = best_y;
    } else {
        res.X = X;
        res.y = y;
    }
    return res;
}

}  // namespace detail

/// Writes the problem in a plain text form usable for debugging against
/// external reference solvers.
inline void dump_sdp(const SdpProblem& prob, std::ostream& os) {
    os << "blocks";
    for (int d : prob.block_dims) os << ' ' << d;
    os << "\nscalars " << prob.n_scalars << "\nsense " << (prob.maximize ? "max" : "min") << '\n';
    auto dump_mats = [&](const std::vector<CMat>& mats, const Eigen::VectorXd& sc) {
        for (std::size_t j = 0; j < mats.size(); ++j) {
            if (mats[j].size() == 0) continue;
            os << "  block " << j << '\n';
            for (Eigen::Index r = 0; r < mats[j].rows(); ++r) {
                os << "   ";
                for (Eigen::Index c = 0; c < mats[j].cols(); ++c)
                    os << ' ' << mats[j](r, c).real() << (mats[j](r, c).imag() < 0 ? "-" : "+")
                       << std::abs(mats[j](r, c).imag()) << 'i';
                os << '\n';
            }
        }
        if (sc.size() > 0) {
            os << "  scalar_coefs";
            for (Eigen::Index i = 0; i < sc.size(); ++i) os << ' ' << sc[i];
            os << '\n';
        }
    };
    os << "objective\n";
    dump_mats(prob.objective_blocks, prob.objective_scalars);
    for (std::size_t i = 0; i < prob.constraints.size(); ++i) {
        const auto& c = prob.constraints[i];
        os << "constraint " << i << ' '
           << (c.sense == Sense::Eq ? "==" : (c.sense == Sense::LessEq ? "<=" : ">=")) << ' '
           << c.rhs << '\n';
        dump_mats(c.block_mats, c.scalar_coefs);
    }
}

/// Solves the complex Hermitian SDP via its real symmetric embedding with a
/// dense HKM interior-point method. Ruiz equilibration tames the wild scale
/// spread of the Charnes-Cooper data.
inline SdpSolution solve_sdp(const SdpProblem& prob, double tol = 1e-7) {
    using detail::Mat;
    using detail::Vec;

    const int nb = static_cast<int>(prob.block_dims.size());
    const int ns = prob.n_scalars;
    const int m = static_cast<int>(prob.constraints.size());

    auto fetch_block = [&](const std::vector<CMat>& mats, int j) -> CMat {
        if (j >= static_cast<int>(mats.size()) || mats[j].size() == 0)
            return CMat::Zero(prob.block_dims[j], prob.block_dims[j]);
        const CMat& A = mats[j];
        if (A.rows() != prob.block_dims[j] || A.cols() != prob.block_dims[j])
            throw std::invalid_argument("solve_sdp: block matrix dimension mismatch");
        const double scale = std::max(1.0, A.norm());
        if ((A - A.adjoint()).norm() > 1e-10 * scale)
            throw std::invalid_argument("solve_sdp: constraint/objective matrix not Hermitian");
        return 0.5 * (A + A.adjoint());
    };
    auto fetch_scalar = [&](const Eigen::VectorXd& v, int s) -> double {
        return s < v.size() ? v[s] : 0.0;
    };

    // Count slacks.
    int n_slack = 0;
    for (const auto& c : prob.constraints)
        if (c.sense != Sense::Eq) ++n_slack;

    detail::RealBlockSdp P;
    const int total_blocks = nb + ns + n_slack;
    P.dims.resize(total_blocks);
    for (int j = 0; j < nb; ++j) P.dims[j] = 2 * prob.block_dims[j];
    for (int j = nb; j < total_blocks; ++j) P.dims[j] = 1;

    const double obj_sign = prob.maximize ? -1.0 : 1.0;
    P.C.resize(total_blocks);
    for (int j = 0; j < nb; ++j)
        P.C[j] = obj_sign * detail::embed_half(fetch_block(prob.objective_blocks, j));
    for (int s = 0; s < ns; ++s)
        P.C[nb + s] = obj_sign * Mat::Constant(1, 1, fetch_scalar(prob.objective_scalars, s));
    for (int j = nb + ns; j < total_blocks; ++j) P.C[j] = Mat::Zero(1, 1);

    P.A.resize(m);
    P.b.resize(m);
    int slack_at = nb + ns;
    for (int i = 0; i < m; ++i) {
        const auto& c = prob.constraints[i];
        P.A[i].resize(total_blocks);
        for (int j = 0; j < nb; ++j) P.A[i][j] = detail::embed_half(fetch_block(c.block_mats, j));
        for (int s = 0; s < ns; ++s)
            P.A[i][nb + s] = Mat::Constant(1, 1, fetch_scalar(c.scalar_coefs, s));
        for (int j = nb + ns; j < total_blocks; ++j) P.A[i][j] = Mat::Zero(1, 1);
        if (c.sense == Sense::LessEq)
            P.A[i][slack_at++](0, 0) = 1.0;
        else if (c.sense == Sense::GreaterEq)
            P.A[i][slack_at++](0, 0) = -1.0;
        P.b[i] = c.rhs;
    }

    // Original-unit reference data for termination tests and certificates.
    detail::ScaleInfo si0;
    si0.b_orig = P.b;
    si0.c_norm.resize(total_blocks);
    for (int j = 0; j < total_blocks; ++j) si0.c_norm[j] = P.C[j].norm();
    si0.a_row_norm.resize(m);
    for (int i = 0; i < m; ++i) {
        double na = 0;
        for (int j = 0; j < total_blocks; ++j)
            if (P.A[i][j].size() > 0) na = std::max(na, P.A[i][j].norm());
        si0.a_row_norm[i] = na;
    }

    // Matrix-norm equilibration alone can leave solution components at very
    // different magnitudes, hiding order-one violations under the scaled
    // numerical radar. Re-solve with block scales taken from the previous
    // attempt's iterate until the original-unit residuals check out.
    Vec beta = Vec::Ones(total_blocks);
    detail::IpmResult ipm;
    Vec col_total = Vec::Ones(total_blocks);
    double sigma_b = 1.0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        detail::RealBlockSdp Ps = P;
        detail::ScaleInfo si = si0;
        Vec row_scale = Vec::Ones(m);
        Vec col_scale = beta;
        for (int j = 0; j < total_blocks; ++j) {
            Ps.C[j] *= beta[j];
            for (int i = 0; i < m; ++i) Ps.A[i][j] *= beta[j];
        }
        // First attempt: full Ruiz. Refinement attempts keep the block scales
        // pinned to the previous solution magnitudes and only balance rows,
        // otherwise the norm equilibration would wash the solution scale out.
        const bool col_ruiz = attempt == 0;
        for (int pass = 0; pass < 10; ++pass) {
            for (int i = 0; i < m; ++i) {
                double rmax = 0;
                for (int j = 0; j < total_blocks; ++j)
                    if (Ps.A[i][j].size() > 0) rmax = std::max(rmax, Ps.A[i][j].norm());
                if (rmax > 0) {
                    const double f = col_ruiz ? 1.0 / std::sqrt(rmax) : 1.0 / rmax;
                    for (int j = 0; j < total_blocks; ++j) Ps.A[i][j] *= f;
                    Ps.b[i] *= f;
                    row_scale[i] *= f;
                }
            }
            if (!col_ruiz) break;
            for (int j = 0; j < total_blocks; ++j) {
                double cmax = Ps.C[j].norm();
                for (int i = 0; i < m; ++i) cmax = std::max(cmax, Ps.A[i][j].norm());
                if (cmax > 0) {
                    const double f = 1.0 / std::sqrt(cmax);
                    for (int i = 0; i < m; ++i) Ps.A[i][j] *= f;
                    Ps.C[j] *= f;
                    col_scale[j] *= f;
                }
            }
        }
        sigma_b = m > 0 ? Ps.b.cwiseAbs().maxCoeff() : 1.0;
        if (sigma_b <= 0) sigma_b = 1.0;
        Ps.b /= sigma_b;
        double sigma_c = 0;
        for (int j = 0; j < total_blocks; ++j) sigma_c = std::max(sigma_c, Ps.C[j].norm());
        if (sigma_c <= 0) sigma_c = 1.0;
        for (int j = 0; j < total_blocks; ++j) Ps.C[j] /= sigma_c;

        si.p_ratio.resize(m);
        si.y_scale.resize(m);
        for (int i = 0; i < m; ++i) {
            si.p_ratio[i] = sigma_b / row_scale[i];
            si.y_scale[i] = sigma_c * row_scale[i];
        }
        si.z_scale.resize(total_blocks);
        for (int j = 0; j < total_blocks; ++j) si.z_scale[j] = sigma_c / col_scale[j];
        si.obj_scale = sigma_b * sigma_c;

        ipm = detail::solve_real_sdp(Ps, si, tol);
        col_total = col_scale;
        if (ipm.status.kind == SolveStatus::Kind::Optimal ||
            ipm.status.kind == SolveStatus::Kind::Infeasible)
            break;
        for (int j = 0; j < total_blocks; ++j) {
            const double mag = sigma_b * col_scale[j] / beta[j] * ipm.X[j].norm();
            beta[j] = std::max(mag, 1e-8);
        }
    }

    // Undo scaling: X_j = sigma_b * col_scale_j * Y_j.
    SdpSolution sol;
    sol.blocks.resize(nb);
    for (int j = 0; j < nb; ++j)
        sol.blocks[j] = sigma_b * col_total[j] * detail::unembed(ipm.X[j]);
    sol.scalars.resize(ns);
    for (int s = 0; s < ns; ++s)
        sol.scalars[s] = std::max(0.0, sigma_b * col_total[nb + s] * ipm.X[nb + s](0, 0));

    sol.status = ipm.status;
    // Objective and duality data in the caller's orientation; the IPM already
    // reports both in original units (minimization orientation).
    double pobj = 0;
    for (int j = 0; j < nb; ++j)
        pobj += (fetch_block(prob.objective_blocks, j) * sol.blocks[j]).trace().real();
    for (int s = 0; s < ns; ++s) pobj += fetch_scalar(prob.objective_scalars, s) * sol.scalars[s];
    sol.status.objective = pobj;
    sol.status.dual_objective = obj_sign * ipm.status.dual_objective;
    return sol;
}

}  // namespace maisac::convex
