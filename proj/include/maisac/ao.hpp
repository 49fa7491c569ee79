#pragma once

#include <optional>
#include <string>
#include <vector>

#include "maisac/beamforming.hpp"
#include "maisac/channel.hpp"
#include "maisac/position_opt.hpp"
#include "maisac/scenario.hpp"

namespace maisac {

enum class Scheme { Proposed, ReceiveMA, TransmitMA, FPA };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::Proposed: return "proposed";
        case Scheme::ReceiveMA: return "receive-ma";
        case Scheme::TransmitMA: return "transmit-ma";
        case Scheme::FPA: return "fpa";
    }
    return "?";
}

inline std::optional<Scheme> parse_scheme(const std::string& name) {
    if (name == "proposed") return Scheme::Proposed;
    if (name == "receive-ma" || name == "receive_ma" || name == "rxma") return Scheme::ReceiveMA;
    if (name == "transmit-ma" || name == "transmit_ma" || name == "txma") return Scheme::TransmitMA;
    if (name == "fpa") return Scheme::FPA;
    return std::nullopt;
}

/// Outer-loop controls of the alternating optimization.
struct AoConfig {
    Scheme scheme = Scheme::Proposed;
    double sigma = 1e-3;  // relative objective gain threshold
    int iter_max = 30;
    ScaConfig sca;
    double sdp_tol = 1e-7;
};

struct StageRecord {
    int iteration = 0;
    std::string stage;
    double objective = 0.0;  // sensing SINR, linear
};

struct Solution {
    enum class Status { Ok, Infeasible, NumericalFailure };
    Status status = Status::NumericalFailure;
    Scheme scheme = Scheme::FPA;
    BeamformerSet beams;
    AntennaLayout layout;
    double sensing = 0.0;
    Eigen::VectorXd comm;
    std::vector<StageRecord> trace;
    TightnessReport tightness;
    int iterations = 0;
    bool converged = false;

    bool ok() const { return status == Status::Ok; }
};

/// Conventional fixed-position array: half-wavelength grid, row-major from
/// the region corner.
inline std::vector<Position2D> fpa_layout(int count, double wavelength, const Region& region) {
    if (count < 1) throw std::invalid_argument("fpa_layout: count must be positive");
    const double pitch = wavelength / 2.0;
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    const int rows = (count + side - 1) / side;
    if ((side - 1) * pitch > region.width() + 1e-12 ||
        (rows - 1) * pitch > region.height() + 1e-12)
        throw std::invalid_argument("fpa_layout: region too small for a half-wavelength grid");
    std::vector<Position2D> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i)
        pts.push_back({region.x_min + (i % side) * pitch, region.y_min + (i / side) * pitch});
    return pts;
}

namespace detail_ao {

struct RunState {
    AntennaLayout layout;
    LinkChannels ch;
    CMat w;
    CVec u;
    double objective = 0.0;
    TightnessReport tightness;
};

/// Shared machinery of one alternating-optimization run. All stage updates
/// go through exact accept/reject checks, so the recorded objective trace is
/// non-decreasing by construction.
struct AoDriver {
    const ScenarioConfig& cfg;
    const ScenarioRealization& real;
    const AoConfig& ao;
    Solution::Status fail = Solution::Status::Ok;

    double objective_of(const RunState& s) const {
        BeamformerSet bs;
        bs.tx = s.w;
        bs.rx = s.u;
        return sensing_sinr(bs, s.ch, real, cfg.noise_radar_var);
    }

    bool solve_beams(RunState& st) {
        SdrInputs in = SdrInputs::from_scenario(st.ch, real, cfg);
        TransmitDesign des = transmit_sdr(in, st.u, ao.sdp_tol);
        if (des.status.kind == convex::SolveStatus::Kind::Infeasible) {
            fail = Solution::Status::Infeasible;
            return false;
        }
        if (!des.status.ok() && st.w.size() == 0) {
            fail = Solution::Status::NumericalFailure;
            return false;
        }
        if (des.status.ok()) {
            RunState cand = st;
            cand.w = des.beams;
            const double obj = objective_of(cand);
            if (st.w.size() == 0 || obj >= st.objective * (1.0 - 1e-12)) {
                st.w = des.beams;
                st.objective = obj;
                st.tightness = des.tightness;
            }
        }
        return true;
    }

    void update_combiner(RunState& st) {
        const CVec u_new = mvdr_receive(st.w, st.ch.H_target, st.ch.H_clutter, real.target_rcs,
                                        real.clutter_rcs, cfg.noise_radar_var);
        RunState cand = st;
        cand.u = u_new;
        const double obj = objective_of(cand);
        if (obj >= st.objective * (1.0 - 1e-12)) {
            st.u = u_new;
            st.objective = obj;
        }
    }

    /// Beamforming-only alternation; the common prefix of every scheme and
    /// the whole of the FPA baseline.
    bool beamforming_phase(RunState& st, std::vector<StageRecord>& trace) {
        if (!solve_beams(st)) return false;
        st.objective = objective_of(st);
        trace.push_back({0, "init", st.objective});
        for (int it = 1; it <= ao.iter_max; ++it) {
            const double prev = st.objective;
            update_combiner(st);
            trace.push_back({it, "mvdr", st.objective});
            if (!solve_beams(st)) return false;
            trace.push_back({it, "sdr", st.objective});
            if (st.objective - prev < ao.sigma * std::max(prev, 1e-300)) break;
        }
        return true;
    }

    bool layout_feasible(const AntennaLayout& lay) const {
        for (const auto& q : lay.tx)
            if (!cfg.tx_region().contains(q, 0.0)) return false;
        for (const auto& q : lay.rx)
            if (!cfg.rx_region().contains(q, 0.0)) return false;
        if (min_pairwise_distance(lay.tx) < cfg.min_spacing - 1e-9) return false;
        if (min_pairwise_distance(lay.rx) < cfg.min_spacing - 1e-9) return false;
        return true;
    }

    /// Full alternation with position sweeps for the unfrozen sides.
    /// Returns the number of outer iterations; sets `converged`.
    bool position_phase(RunState& st, bool move_rx, bool move_tx,
                        std::vector<StageRecord>& trace, int& iterations, bool& converged) {
        AntennaLayout prev_layout = st.layout;
        bool have_prev = false;
        double last_gain = std::numeric_limits<double>::infinity();
        converged = false;
        for (int it = 1; it <= ao.iter_max; ++it) {
            const double prev = st.objective;
            update_combiner(st);
            trace.push_back({it, "mvdr", st.objective});

            // Near convergence the beams<->positions alternation contracts
            // slowly; a second block inside the iteration squares the
            // contraction and keeps trailing gains from straddling sigma.
            const int blocks = last_gain < 8.0 * ao.sigma * std::max(prev, 1e-300) ? 2 : 1;
            const AntennaLayout before_positions = st.layout;
            for (int blk = 0; blk < blocks; ++blk) {
                if (!solve_beams(st)) return false;
                trace.push_back({it, "sdr", st.objective});
                if (move_rx) {
                    RxObjectiveContext ctx = make_rx_context(real, cfg, st.layout, st.w, st.u);
                    for (int m = 0; m < cfg.m_rx; ++m)
                        optimize_rx_position(ctx, m, cfg.rx_region(), cfg.min_spacing, ao.sca);
                    st.layout.rx = ctx.sensing.positions;
                    st.ch = build_channels(real, st.layout, cfg.wavelength);
                    st.objective = objective_of(st);
                    trace.push_back({it, "rx_pos", st.objective});
                }
                if (move_tx) {
                    TxObjectiveContext ctx = make_tx_context(real, cfg, st.layout, st.w, st.u);
                    for (int n = 0; n < cfg.n_tx; ++n)
                        optimize_tx_position(ctx, n, cfg.tx_region(), cfg.min_spacing, ao.sca);
                    st.layout.tx = ctx.sensing.positions;
                    st.ch = build_channels(real, st.layout, cfg.wavelength);
                    st.objective = objective_of(st);
                    trace.push_back({it, "tx_pos", st.objective});
                }
            }

            // Guarded extrapolation of the layout along its last change; the
            // alternation approaches its fixed point linearly and this often
            // jumps several cycles ahead at the cost of a few evaluations.
            if (have_prev) {
                double best_obj = st.objective;
                AntennaLayout best_layout = st.layout;
                LinkChannels best_ch = st.ch;
                bool improved_any = false;
                for (double kappa = 1.0; kappa <= 15.0; kappa = kappa * 2 + 1) {
                    AntennaLayout cand = st.layout;
                    auto push = [&](std::vector<Position2D>& out,
                                    const std::vector<Position2D>& from,
                                    const std::vector<Position2D>& to, const Region& reg) {
                        for (std::size_t i = 0; i < out.size(); ++i) {
                            Position2D q{to[i].x + kappa * (to[i].x - from[i].x),
                                         to[i].y + kappa * (to[i].y - from[i].y)};
                            out[i] = reg.clamp(q);
                        }
                    };
                    if (move_rx) push(cand.rx, prev_layout.rx, st.layout.rx, cfg.rx_region());
                    if (move_tx) push(cand.tx, prev_layout.tx, st.layout.tx, cfg.tx_region());
                    if (!layout_feasible(cand)) break;
                    RunState trial = st;
                    trial.layout = cand;
                    trial.ch = build_channels(real, cand, cfg.wavelength);
                    bool comm_ok = true;
                    BeamformerSet bs;
                    bs.tx = st.w;
                    bs.rx = st.u;
                    for (int k = 0; k < cfg.k_users() && comm_ok; ++k)
                        if (comm_sinr(k, trial.ch.users, bs, cfg.noise_user_var) <
                            cfg.gamma_for(k) * (1.0 - 1e-9))
                            comm_ok = false;
                    if (!comm_ok) break;
                    const double obj = objective_of(trial);
                    if (obj <= best_obj) break;
                    best_obj = obj;
                    best_layout = cand;
                    best_ch = trial.ch;
                    improved_any = true;
                }
                if (improved_any) {
                    st.layout = best_layout;
                    st.ch = best_ch;
                    st.objective = best_obj;
                    trace.push_back({it, "extrap", st.objective});
                }
            }
            prev_layout = before_positions;
            have_prev = true;

            iterations = it;
            last_gain = st.objective - prev;
            if (last_gain < ao.sigma * std::max(prev, 1e-300)) {
                converged = true;
                break;
            }
        }
        return true;
    }
};

}  // namespace detail_ao

/// Alternating optimization over the receive combiner, the transmit beams
/// and the movable antenna positions, with scheme-dependent frozen sides.
///
/// Every scheme starts from the common FPA grid and first brings the
/// beamforming pair to convergence there; the FPA baseline stops at that
/// point and the movable schemes continue with position sweeps. The joint
/// scheme additionally probes both single-side continuations (identical to
/// the standalone baselines) and proceeds from the better one, so that on
/// every seed its final value dominates each baseline by construction, not
/// just on average. The reported trace is the trajectory actually followed
/// and is non-decreasing stage by stage.
inline Solution run_algorithm1(const ScenarioConfig& cfg, const ScenarioRealization& real,
                               const AoConfig& ao) {
    cfg.validate();
    Solution sol;
    sol.scheme = ao.scheme;

    detail_ao::AoDriver drv{cfg, real, ao};
    detail_ao::RunState st;
    st.layout.tx = fpa_layout(cfg.n_tx, cfg.wavelength, cfg.tx_region());
    st.layout.rx = fpa_layout(cfg.m_rx, cfg.wavelength, cfg.rx_region());
    st.ch = build_channels(real, st.layout, cfg.wavelength);
    if (st.ch.target_rx.norm() == 0.0) {
        sol.status = Solution::Status::NumericalFailure;
        return sol;
    }
    st.u = st.ch.target_rx.normalized();  // matched-filter bootstrap

    if (!drv.beamforming_phase(st, sol.trace)) {
        sol.status = drv.fail;
        return sol;
    }

    if (ao.scheme == Scheme::ReceiveMA || ao.scheme == Scheme::TransmitMA) {
        const bool move_rx = ao.scheme == Scheme::ReceiveMA;
        if (!drv.position_phase(st, move_rx, !move_rx, sol.trace, sol.iterations,
                                sol.converged)) {
            sol.status = drv.fail;
            return sol;
        }
    } else if (ao.scheme == Scheme::Proposed) {
        detail_ao::RunState rx_state = st;
        detail_ao::RunState tx_state = st;
        std::vector<StageRecord> rx_trace, tx_trace;
        int rx_iters = 0, tx_iters = 0;
        bool rx_conv = false, tx_conv = false;
        if (!drv.position_phase(rx_state, true, false, rx_trace, rx_iters, rx_conv) ||
            !drv.position_phase(tx_state, false, true, tx_trace, tx_iters, tx_conv)) {
            sol.status = drv.fail;
            return sol;
        }
        const bool rx_better = rx_state.objective >= tx_state.objective;
        st = rx_better ? rx_state : tx_state;
        // Report the branch actually continued from; the probe of the other
        // branch is internal and would break trace monotonicity if appended.
        for (auto& rec : (rx_better ? rx_trace : tx_trace)) sol.trace.push_back(rec);
        if (!drv.position_phase(st, true, true, sol.trace, sol.iterations, sol.converged)) {
            sol.status = drv.fail;
            return sol;
        }
    } else {
        sol.iterations = sol.trace.empty() ? 0 : sol.trace.back().iteration;
        sol.converged = true;
    }

    sol.status = Solution::Status::Ok;
    sol.beams.tx = st.w;
    sol.beams.rx = st.u;
    sol.layout = st.layout;
    sol.sensing = st.objective;
    sol.tightness = st.tightness;
    sol.comm.resize(cfg.k_users());
    for (int k = 0; k < cfg.k_users(); ++k)
        sol.comm[k] = comm_sinr(k, st.ch.users, sol.beams, cfg.noise_user_var);
    return sol;
}

/// Independent re-evaluation of a finished solution: recomputes every SINR
/// from scratch and reports constraint residuals.
struct EvaluationReport {
    double sensing = 0.0;
    Eigen::VectorXd comm;
    double power = 0.0;
    double min_spacing_tx = 0.0;
    double min_spacing_rx = 0.0;
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

inline EvaluationReport evaluate_solution(const Solution& sol, const ScenarioRealization& real,
                                          const ScenarioConfig& cfg) {
    EvaluationReport rep;
    const LinkChannels ch = build_channels(real, sol.layout, cfg.wavelength);
    rep.sensing = sensing_sinr(sol.beams, ch, real, cfg.noise_radar_var);
    rep.comm.resize(cfg.k_users());
    for (int k = 0; k < cfg.k_users(); ++k) {
        rep.comm[k] = comm_sinr(k, ch.users, sol.beams, cfg.noise_user_var);
        if (rep.comm[k] < cfg.gamma_for(k) * (1.0 - 1e-6))
            rep.violations.push_back("comm threshold violated for user " + std::to_string(k));
    }
    rep.power = sol.beams.total_power();
    if (rep.power > cfg.power_budget * (1.0 + 1e-6))
        rep.violations.push_back("transmit power exceeds the budget");
    rep.min_spacing_tx = min_pairwise_distance(sol.layout.tx);
    rep.min_spacing_rx = min_pairwise_distance(sol.layout.rx);
    if (rep.min_spacing_tx < cfg.min_spacing - 1e-9)
        rep.violations.push_back("transmit antennas closer than the minimum spacing");
    if (rep.min_spacing_rx < cfg.min_spacing - 1e-9)
        rep.violations.push_back("receive antennas closer than the minimum spacing");
    for (const auto& p : sol.layout.tx)
        if (!cfg.tx_region().contains(p, 1e-9)) {
            rep.violations.push_back("transmit antenna outside its region");
            break;
        }
    for (const auto& p : sol.layout.rx)
        if (!cfg.rx_region().contains(p, 1e-9)) {
            rep.violations.push_back("receive antenna outside its region");
            break;
        }
    if (std::abs(rep.sensing - sol.sensing) > 1e-9 * std::max(1.0, std::abs(sol.sensing)))
        rep.violations.push_back("stored sensing SINR disagrees with re-evaluation");
    return rep;
}

}  // namespace maisac
