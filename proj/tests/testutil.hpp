#pragma once

// Shared helpers for the unit and acceptance suites. Everything here is
// test-only and independent of the library's own solution paths.

#include <cmath>
#include <vector>

#include "maisac/beamforming.hpp"
#include "maisac/channel.hpp"
#include "maisac/rng.hpp"
#include "maisac/scenario.hpp"

namespace testutil {

using namespace maisac;

inline std::vector<Position2D> grid_layout(int count, double pitch) {
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    std::vector<Position2D> pts;
    for (int i = 0; i < count; ++i)
        pts.push_back({(i % side) * pitch, (i / side) * pitch});
    return pts;
}

struct DeskInstance {
    ScenarioConfig cfg;
    ScenarioRealization real;
    AntennaLayout layout;
    LinkChannels ch;
    CVec u;  // MVDR combiner for uniform identity beams
};

/// Desk-scale instance: FPA grids on both sides, an identity beam stack to
/// seed the combiner, then one MVDR pass.
inline DeskInstance make_desk_instance(std::uint64_t seed, int n_tx = 6, int m_rx = 4) {
    DeskInstance di;
    di.cfg.n_tx = n_tx;
    di.cfg.m_rx = m_rx;
    di.cfg.validate();
    di.real = sample_realization(di.cfg, seed);
    di.layout.tx = grid_layout(n_tx, di.cfg.min_spacing);
    di.layout.rx = grid_layout(m_rx, di.cfg.min_spacing);
    di.ch = build_channels(di.real, di.layout, di.cfg.wavelength);
    CMat w0 = std::sqrt(di.cfg.power_budget / n_tx) * CMat::Identity(n_tx, n_tx);
    di.u = mvdr_receive(w0, di.ch.H_target, di.ch.H_clutter, di.real.target_rcs,
                        di.real.clutter_rcs, di.cfg.noise_radar_var);
    return di;
}

inline double sensing_of(const DeskInstance& di, const CMat& beams, const CVec& u) {
    BeamformerSet bs;
    bs.tx = beams;
    bs.rx = u;
    return sensing_sinr(bs, di.ch, di.real, di.cfg.noise_radar_var);
}

}  // namespace testutil
