#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maisac/geometry.hpp"
#include "maisac/rng.hpp"

namespace maisac {

using cplx = std::complex<double>;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }
/// dBm and linear mW share the same conversion; all powers are carried in mW.
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

/// Multipath description of one link side: per-path angles plus the
/// complex path-response coefficients referenced to the region origin.
struct PathSet {
    Eigen::ArrayXd elevation;  // phi, radians
    Eigen::ArrayXd azimuth;    // theta, radians
    Eigen::VectorXcd coeff;    // g, path-response vector

    int count() const { return static_cast<int>(coeff.size()); }

    void validate() const {
        if (elevation.size() != coeff.size() || azimuth.size() != coeff.size())
            throw std::invalid_argument("PathSet: angle/coefficient lengths disagree");
    }
};

/// Full scenario description: node geometry, channel statistics, budgets
/// and movable-region parameters. Every knob is tunable; the defaults are
/// the desk-scale benchmark configuration.
struct ScenarioConfig {
    // Node geometry (3D, meters).
    Eigen::Vector3d tx_pos{0.0, 0.0, 5.0};
    Eigen::Vector3d rx_pos{0.0, 20.0, 5.0};
    Eigen::Vector3d target_pos{0.0, 10.0, 5.0};
    std::vector<Eigen::Vector3d> clutter_pos{{10.0, 10.0, 5.0}, {-10.0, 10.0, 5.0}};
    std::vector<Eigen::Vector3d> user_pos{{15.0, 10.0, 0.0}, {-15.0, 10.0, 0.0}};

    // Array sizes.
    int n_tx = 6;
    int m_rx = 4;

    // Paths per link (first path is LoS, the rest NLoS).
    int paths_user = 4;
    int paths_target_tx = 4;
    int paths_target_rx = 4;
    int paths_clutter_tx = 4;
    int paths_clutter_rx = 4;

    // Large-scale fading: reference gain at unit distance and per-class exponents.
    double beta0 = 1e-3;  // -30 dB
    double alpha_user = 2.5;
    double alpha_target = 2.2;
    double alpha_clutter = 2.3;
    double kappa = 1.0;  // LoS-to-NLoS power ratio

    // Powers (linear mW) and RCS variance.
    double noise_user_var = 1e-8;   // sigma_k^2, -80 dBm
    double noise_radar_var = 1e-8;  // sigma_r^2, -80 dBm
    double rcs_var = 1.0;           // nu^2
    double power_budget = dbm_to_mw(24.0);
    std::vector<double> gamma_th{1.0, 1.0};  // linear per-user SINR thresholds

    // Movable-array geometry.
    double wavelength = 0.1;
    double min_spacing = 0.05;  // D = lambda/2
    double region_side = 0.3;   // A = 3*lambda

    int k_users() const { return static_cast<int>(user_pos.size()); }
    int l_clutter() const { return static_cast<int>(clutter_pos.size()); }
    Region tx_region() const { return Region::square(region_side); }
    Region rx_region() const { return Region::square(region_side); }

    double gamma_for(int k) const {
        if (gamma_th.empty()) return 0.0;
        return gamma_th[static_cast<std::size_t>(k) < gamma_th.size() ? k : gamma_th.size() - 1];
    }

    void validate() const {
        if (k_users() < 1) throw std::invalid_argument("ScenarioConfig: need at least one user");
        if (n_tx < 1 || m_rx < 1) throw std::invalid_argument("ScenarioConfig: array sizes must be positive");
        if (n_tx < k_users())
            throw std::invalid_argument("ScenarioConfig: need at least one beam per user (N >= K)");
        if (beta0 <= 0 || noise_user_var <= 0 || noise_radar_var <= 0 || rcs_var <= 0 ||
            power_budget <= 0 || wavelength <= 0)
            throw std::invalid_argument("ScenarioConfig: powers, variances and wavelength must be positive");
        if (min_spacing <= 0 || region_side <= 0)
            throw std::invalid_argument("ScenarioConfig: spacing/region must be positive");
        for (double g : gamma_th)
            if (g < 0) throw std::invalid_argument("ScenarioConfig: thresholds must be non-negative");
        const int side_n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n_tx))));
        const int side_m = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m_rx))));
        const int steps = std::max(side_n, side_m) - 1;
        if (region_side + 1e-12 < min_spacing * steps)
            throw std::invalid_argument("ScenarioConfig: region too small for the FPA grid start");
    }
};

/// One random channel draw: a deterministic function of (config, seed).
struct ScenarioRealization {
    std::vector<PathSet> user_paths;    // K entries, departure domain
    PathSet target_tx;                  // departure domain
    PathSet target_rx;                  // arrival domain
    std::vector<PathSet> clutter_tx;    // L entries, departure domain
    std::vector<PathSet> clutter_rx;    // L entries, arrival domain
    cplx target_rcs{0.0, 0.0};          // alpha_d
    std::vector<cplx> clutter_rcs;      // alpha_l
    std::uint64_t seed = 0;
};

namespace detail {

/// Draws one link's path set. Angle domains follow the channel model:
/// departure angles over [-pi/2, pi/2], arrival angles over [0, pi].
/// Path 1 is LoS with variance beta0*d^-alpha*kappa/(kappa+1); paths 2..L
/// are NLoS with variance beta0*d^-alpha/((kappa+1)(L-1)). Sampling order
/// is fixed (per path: elevation, azimuth; then all coefficients) so that
/// seeds reproduce bitwise.
inline PathSet sample_path_set(Rng& rng, int n_paths, bool departure, double dist,
                               double alpha_exp, double beta0, double kappa) {
    if (n_paths < 2)
        throw std::invalid_argument("sample_realization: need >= 2 paths per link (NLoS variance undefined)");
    PathSet ps;
    ps.elevation.resize(n_paths);
    ps.azimuth.resize(n_paths);
    ps.coeff.resize(n_paths);
    const double lo = departure ? -M_PI / 2.0 : 0.0;
    const double hi = departure ? M_PI / 2.0 : M_PI;
    for (int p = 0; p < n_paths; ++p) {
        ps.elevation[p] = rng.uniform(lo, hi);
        ps.azimuth[p] = rng.uniform(lo, hi);
    }
    const double gain = beta0 * std::pow(dist, -alpha_exp);
    const double var_los = gain * kappa / (kappa + 1.0);
    const double var_nlos = gain / ((kappa + 1.0) * (n_paths - 1));
    for (int p = 0; p < n_paths; ++p)
        ps.coeff[p] = rng.complex_normal(p == 0 ? var_los : var_nlos);
    return ps;
}

}  // namespace detail

/// Samples one scenario realization. Order: users (0..K-1), target Tx side,
/// target Rx side, per clutter (Tx side then Rx side), target RCS, clutter RCS.
inline ScenarioRealization sample_realization(const ScenarioConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    ScenarioRealization r;
    r.seed = seed;

    const int K = cfg.k_users();
    const int L = cfg.l_clutter();
    r.user_paths.reserve(K);
    for (int k = 0; k < K; ++k) {
        const double d = (cfg.user_pos[k] - cfg.tx_pos).norm();
        r.user_paths.push_back(detail::sample_path_set(rng, cfg.paths_user, true, d,
                                                       cfg.alpha_user, cfg.beta0, cfg.kappa));
    }
    const double d_target_tx = (cfg.target_pos - cfg.tx_pos).norm();
    const double d_target_rx = (cfg.target_pos - cfg.rx_pos).norm();
    r.target_tx = detail::sample_path_set(rng, cfg.paths_target_tx, true, d_target_tx,
                                          cfg.alpha_target, cfg.beta0, cfg.kappa);
    r.target_rx = detail::sample_path_set(rng, cfg.paths_target_rx, false, d_target_rx,
                                          cfg.alpha_target, cfg.beta0, cfg.kappa);
    r.clutter_tx.reserve(L);
    r.clutter_rx.reserve(L);
    for (int l = 0; l < L; ++l) {
        const double d_tx = (cfg.clutter_pos[l] - cfg.tx_pos).norm();
        const double d_rx = (cfg.clutter_pos[l] - cfg.rx_pos).norm();
        r.clutter_tx.push_back(detail::sample_path_set(rng, cfg.paths_clutter_tx, true, d_tx,
                                                       cfg.alpha_clutter, cfg.beta0, cfg.kappa));
        r.clutter_rx.push_back(detail::sample_path_set(rng, cfg.paths_clutter_rx, false, d_rx,
                                                       cfg.alpha_clutter, cfg.beta0, cfg.kappa));
    }
    r.target_rcs = rng.complex_normal(cfg.rcs_var);
    r.clutter_rcs.reserve(L);
    for (int l = 0; l < L; ++l) r.clutter_rcs.push_back(rng.complex_normal(cfg.rcs_var));
    return r;
}

}  // namespace maisac
