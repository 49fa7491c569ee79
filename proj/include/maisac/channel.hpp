#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "maisac/geometry.hpp"
#include "maisac/scenario.hpp"

namespace maisac {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Propagation phase difference of one path between an antenna position
/// and the region reference point: x*sin(phi)*cos(theta) + y*cos(phi).
inline double phase_difference(const Position2D& pos, double elevation, double azimuth) {
    return pos.x * std::sin(elevation) * std::cos(azimuth) + pos.y * std::cos(elevation);
}

/// Field response vector: per-path unit-modulus phase response at one position.
inline CVec field_response_vector(const Position2D& pos, const PathSet& paths, double wavelength) {
    if (wavelength <= 0) throw std::invalid_argument("field_response_vector: wavelength must be positive");
    const double k0 = 2.0 * M_PI / wavelength;
    CVec f(paths.count());
    for (int p = 0; p < paths.count(); ++p) {
        const double rho = phase_difference(pos, paths.elevation[p], paths.azimuth[p]);
        f[p] = std::polar(1.0, k0 * rho);
    }
    return f;
}

/// Field response matrix: one FRV column per antenna (paths x antennas).
inline CMat field_response_matrix(const std::vector<Position2D>& positions, const PathSet& paths,
                                  double wavelength) {
    CMat F(paths.count(), static_cast<Eigen::Index>(positions.size()));
    for (std::size_t a = 0; a < positions.size(); ++a)
        F.col(static_cast<Eigen::Index>(a)) = field_response_vector(positions[a], paths, wavelength);
    return F;
}

/// Channel vector of one link side: F^H(positions) * g, one entry per antenna.
inline CVec channel_vector(const std::vector<Position2D>& positions, const PathSet& paths,
                           double wavelength) {
    if (positions.empty()) throw std::invalid_argument("channel_vector: empty position list");
    paths.validate();
    return field_response_matrix(positions, paths, wavelength).adjoint() * paths.coeff;
}

/// Rank-1 cascaded target/clutter matrix H_q = h_rx * h_tx^H (M x N).
inline CMat effective_target_matrix(const CVec& rx_channel, const CVec& tx_channel) {
    if (rx_channel.size() == 0 || tx_channel.size() == 0)
        throw std::invalid_argument("effective_target_matrix: empty channel vector");
    return rx_channel * tx_channel.adjoint();
}

/// Transmit beams (columns of tx, comm beams first) and the receive combiner.
struct BeamformerSet {
    CMat tx;   // N x N_beams; column n is w_n
    CVec rx;   // u_r, length M

    int beam_count() const { return static_cast<int>(tx.cols()); }
    double total_power() const { return tx.squaredNorm(); }
};

/// Downlink SINR of user k under the current transmit beams.
inline double comm_sinr(int k, const std::vector<CVec>& user_channels, const BeamformerSet& beams,
                        double noise_var) {
    const CVec& h = user_channels.at(k);
    double signal = 0.0, interference = 0.0;
    for (int n = 0; n < beams.beam_count(); ++n) {
        const double p = std::norm(h.dot(beams.tx.col(n)));  // |h^H w_n|^2
        if (n == k)
            signal = p;
        else
            interference += p;
    }
    return signal / (interference + noise_var);
}

/// Radar echo SINR of the desired target after receive combining.
inline double sensing_sinr(const BeamformerSet& beams, const CMat& H_target,
                           const std::vector<CMat>& H_clutter, cplx alpha_target,
                           const std::vector<cplx>& alpha_clutter, double noise_var) {
    if (beams.rx.size() == 0 || beams.rx.norm() == 0.0)
        throw std::invalid_argument("sensing_sinr: receive combiner must be nonzero");
    const CVec ut_H_d = H_target.adjoint() * beams.rx;  // (u^H H_d)^H
    double num = 0.0;
    for (int n = 0; n < beams.beam_count(); ++n)
        num += std::norm(alpha_target) * std::norm(ut_H_d.dot(beams.tx.col(n)));
    double den = noise_var * beams.rx.squaredNorm();
    for (std::size_t l = 0; l < H_clutter.size(); ++l) {
        const CVec ut_H_l = H_clutter[l].adjoint() * beams.rx;
        for (int n = 0; n < beams.beam_count(); ++n)
            den += std::norm(alpha_clutter[l]) * std::norm(ut_H_l.dot(beams.tx.col(n)));
    }
    return num / den;
}

/// All channel quantities derived from a realization and an antenna layout.
struct LinkChannels {
    std::vector<CVec> users;      // h_k(t), length N each
    CVec target_tx;               // h_{t,d}(t)
    CVec target_rx;               // h_{r,d}(r)
    std::vector<CVec> clutter_tx; // h_{t,l}(t)
    std::vector<CVec> clutter_rx; // h_{r,l}(r)
    CMat H_target;                // M x N
    std::vector<CMat> H_clutter;  // M x N each
};

inline LinkChannels build_channels(const ScenarioRealization& real, const AntennaLayout& layout,
                                   double wavelength) {
    LinkChannels ch;
    ch.users.reserve(real.user_paths.size());
    for (const auto& up : real.user_paths)
        ch.users.push_back(channel_vector(layout.tx, up, wavelength));
    ch.target_tx = channel_vector(layout.tx, real.target_tx, wavelength);
    ch.target_rx = channel_vector(layout.rx, real.target_rx, wavelength);
    ch.H_target = effective_target_matrix(ch.target_rx, ch.target_tx);
    const std::size_t L = real.clutter_tx.size();
    ch.clutter_tx.reserve(L);
    ch.clutter_rx.reserve(L);
    ch.H_clutter.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        ch.clutter_tx.push_back(channel_vector(layout.tx, real.clutter_tx[l], wavelength));
        ch.clutter_rx.push_back(channel_vector(layout.rx, real.clutter_rx[l], wavelength));
        ch.H_clutter.push_back(effective_target_matrix(ch.clutter_rx[l], ch.clutter_tx[l]));
    }
    return ch;
}

inline double sensing_sinr(const BeamformerSet& beams, const LinkChannels& ch,
                           const ScenarioRealization& real, double noise_var) {
    return sensing_sinr(beams, ch.H_target, ch.H_clutter, real.target_rcs, real.clutter_rcs,
                        noise_var);
}

}  // namespace maisac
