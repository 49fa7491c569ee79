#include <catch2/catch_amalgamated.hpp>

#include "maisac/beamforming.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace maisac;
using testutil::DeskInstance;
using testutil::make_desk_instance;

TEST_CASE("mvdr reduces to a matched filter without clutter") {
    testutil::DeskInstance di = make_desk_instance(1);
    CMat w0 = std::sqrt(di.cfg.power_budget / di.cfg.n_tx) * CMat::Identity(di.cfg.n_tx, di.cfg.n_tx);
    CVec u = mvdr_receive(w0, di.ch.H_target, {}, di.real.target_rcs, {}, di.cfg.noise_radar_var);
    // d'_d is proportional to h_r, so u must align with the target receive channel.
    const CVec hr = di.ch.target_rx;
    const double cosang = std::abs(u.dot(hr)) / (u.norm() * hr.norm());
    CHECK(cosang == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("mvdr dominates random combiners and the generalized eigen bound") {
    Rng rng(31);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        DeskInstance di = make_desk_instance(seed + 10);
        CMat w(di.cfg.n_tx, di.cfg.n_tx);
        for (int c = 0; c < di.cfg.n_tx; ++c)
            for (int r = 0; r < di.cfg.n_tx; ++r) w(r, c) = rng.complex_normal(1.0);
        w *= std::sqrt(di.cfg.power_budget) / w.norm();
        CVec u = mvdr_receive(w, di.ch.H_target, di.ch.H_clutter, di.real.target_rcs,
                              di.real.clutter_rcs, di.cfg.noise_radar_var);
        const double best = testutil::sensing_of(di, w, u);

        for (int trial = 0; trial < 2000; ++trial) {
            CVec ur(di.cfg.m_rx);
            for (int i = 0; i < di.cfg.m_rx; ++i) ur[i] = rng.complex_normal(1.0);
            ur.normalize();
            CHECK(testutil::sensing_of(di, w, ur) <= best * (1 + 1e-10));
        }

        // Rayleigh-quotient maximum: A = |a_d|^2 sum_n (H w_n)(H w_n)^H against
        // C = sum_l R'_l + s^2 I, solved by generalized eigendecomposition.
        const int M = di.cfg.m_rx;
        CMat A = CMat::Zero(M, M);
        const CMat HW = di.ch.H_target * w;
        for (int n = 0; n < di.cfg.n_tx; ++n)
            A += std::norm(di.real.target_rcs) * HW.col(n) * HW.col(n).adjoint();
        CMat C = di.cfg.noise_radar_var * CMat::Identity(M, M);
        for (int l = 0; l < di.cfg.l_clutter(); ++l) {
            const CMat HWl = di.ch.H_clutter[l] * w;
            C += std::norm(di.real.clutter_rcs[l]) * (HWl * HWl.adjoint());
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<CMat> ges(A, C);
        const double lam_max = ges.eigenvalues().maxCoeff();
        CHECK(best == Catch::Approx(lam_max).epsilon(1e-8));
    }
}

TEST_CASE("transmit sdr closed form without users or clutter") {
    DeskInstance di = make_desk_instance(3);
    SdrInputs in;
    in.H_target = di.ch.H_target;
    in.alpha_target = di.real.target_rcs;
    in.noise_radar = di.cfg.noise_radar_var;
    in.noise_user = di.cfg.noise_user_var;
    in.power_budget = di.cfg.power_budget;
    in.n_beams = di.cfg.n_tx;

    auto des = transmit_sdr(in, di.u);
    REQUIRE(des.status.ok());
    const CVec un = di.u.normalized();
    const double lam = (di.ch.H_target.adjoint() * un).squaredNorm();
    const double want = std::norm(di.real.target_rcs) * di.cfg.power_budget * lam / di.cfg.noise_radar_var;
    CHECK(des.sdr_objective == Catch::Approx(want).epsilon(1e-5));

    BeamformerSet bs;
    bs.tx = des.beams;
    bs.rx = di.u;
    const double achieved = sensing_sinr(bs, di.ch.H_target, {}, di.real.target_rcs, {},
                                         di.cfg.noise_radar_var);
    CHECK(achieved == Catch::Approx(want).epsilon(1e-4));
    CHECK(des.beams.squaredNorm() <= di.cfg.power_budget * (1 + 1e-9));
}

TEST_CASE("transmit sdr satisfies P3 constraints and is tight on desk instances") {
    int tight = 0;
    const int n_inst = 25;
    for (int i = 0; i < n_inst; ++i) {
        DeskInstance di = make_desk_instance(100 + i);
        SdrInputs in = SdrInputs::from_scenario(di.ch, di.real, di.cfg);
        auto des = transmit_sdr(in, di.u);
        REQUIRE(des.status.ok());
        CHECK(des.status.duality_gap < 1e-6);
        CHECK(des.beams.squaredNorm() <= di.cfg.power_budget * (1 + 1e-6));
        BeamformerSet bs;
        bs.tx = des.beams;
        bs.rx = di.u;
        for (int k = 0; k < di.cfg.k_users(); ++k)
            CHECK(comm_sinr(k, di.ch.users, bs, di.cfg.noise_user_var) >=
                  di.cfg.gamma_for(k) * (1 - 1e-6));
        if (des.tightness.max_ratio() < 1e-3) ++tight;
        // Achieved sensing SINR matches the relaxation value when tight.
        const double achieved = testutil::sensing_of(di, des.beams, di.u);
        if (des.tightness.max_ratio() < 1e-3)
            CHECK(achieved == Catch::Approx(des.sdr_objective).epsilon(1e-4));
    }
    CHECK(tight >= n_inst - 1);
}

TEST_CASE("transmit sdr matches the rank-1 grid oracle on N=2 K=1 instances") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        DeskInstance di = make_desk_instance(40 + seed, /*n_tx=*/2, /*m_rx=*/3);
        di.cfg.user_pos.resize(1);
        di.cfg.gamma_th.assign(1, 1.0);
        di.real = sample_realization(di.cfg, 40 + seed);
        di.ch = build_channels(di.real, di.layout, di.cfg.wavelength);
        CMat w0 = std::sqrt(di.cfg.power_budget / 2) * CMat::Identity(2, 2);
        di.u = mvdr_receive(w0, di.ch.H_target, di.ch.H_clutter, di.real.target_rcs,
                            di.real.clutter_rcs, di.cfg.noise_radar_var);

        SdrInputs in = SdrInputs::from_scenario(di.ch, di.real, di.cfg);
        auto des = transmit_sdr(in, di.u);
        REQUIRE(des.status.ok());

        auto oracle = oracles::make_rank1_oracle(di.ch.H_target, di.ch.H_clutter, di.u,
                                                 di.real.target_rcs, di.real.clutter_rcs,
                                                 di.cfg.noise_radar_var, di.ch.users[0],
                                                 di.cfg.gamma_for(0), di.cfg.noise_user_var,
                                                 di.cfg.power_budget);
        const double grid_best = oracle.search(40, 48);
        CHECK(des.sdr_objective == Catch::Approx(grid_best).epsilon(1e-3));
        const double achieved = testutil::sensing_of(di, des.beams, di.u);
        CHECK(achieved >= grid_best * (1 - 1e-3));
    }
}

TEST_CASE("transmit sdr objective is monotone in the power budget") {
    DeskInstance di = make_desk_instance(7);
    double prev = -1.0;
    for (double dbm : {18.0, 20.0, 22.0, 24.0, 25.0}) {
        SdrInputs in = SdrInputs::from_scenario(di.ch, di.real, di.cfg);
        in.power_budget = dbm_to_mw(dbm);
        auto des = transmit_sdr(in, di.u);
        REQUIRE(des.status.ok());
        CHECK(des.sdr_objective >= prev - 1e-9 * std::abs(prev));
        prev = des.sdr_objective;
    }
}

TEST_CASE("transmit sdr reports infeasible thresholds") {
    DeskInstance di = make_desk_instance(9);
    SdrInputs in = SdrInputs::from_scenario(di.ch, di.real, di.cfg);
    in.gamma.assign(in.gamma.size(), 1e6);
    in.power_budget = 1e-6;
    auto des = transmit_sdr(in, di.u);
    CHECK(des.status.kind == convex::SolveStatus::Kind::Infeasible);
}

TEST_CASE("verify rank1 ratio extremes") {
    Rng rng(77);
    CVec v(4);
    for (int i = 0; i < 4; ++i) v[i] = rng.complex_normal(1.0);
    TightnessReport rep = verify_rank1({v * v.adjoint()});
    CHECK(rep.eig_ratio[0] == Catch::Approx(0.0).margin(1e-12));
    rep = verify_rank1({CMat::Identity(3, 3)});
    CHECK(rep.eig_ratio[0] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("proposition-1 power-min crosscheck") {
    SECTION("round trip on desk instances") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            DeskInstance di = make_desk_instance(200 + seed);
            SdrInputs in = SdrInputs::from_scenario(di.ch, di.real, di.cfg);
            auto des = transmit_sdr(in, di.u);
            REQUIRE(des.status.ok());
            auto pm = power_min_crosscheck(des.sdr_objective * (1 - 1e-9), in, di.u);
            REQUIRE(pm.status.ok());
            CHECK(pm.power <= di.cfg.power_budget * (1 + 1e-4));
            CHECK(pm.achieved == Catch::Approx(des.sdr_objective).epsilon(1e-4));
        }
    }
    SECTION("super-optimal target is rejected") {
        DeskInstance di = make_desk_instance(300);
        SdrInputs in = SdrInputs::from_scenario(di.ch, di.real, di.cfg);
        auto des = transmit_sdr(in, di.u);
        REQUIRE(des.status.ok());
        auto pm = power_min_crosscheck(des.sdr_objective * 1.1, in, di.u);
        const bool rejected = pm.status.kind == convex::SolveStatus::Kind::Infeasible ||
                              (pm.status.ok() && pm.power > di.cfg.power_budget);
        CHECK(rejected);
    }
    SECTION("sensing-only case spends the full budget") {
        DeskInstance di = make_desk_instance(400);
        SdrInputs in;
        in.H_target = di.ch.H_target;
        in.alpha_target = di.real.target_rcs;
        in.noise_radar = di.cfg.noise_radar_var;
        in.noise_user = di.cfg.noise_user_var;
        in.power_budget = di.cfg.power_budget;
        in.n_beams = di.cfg.n_tx;
        auto des = transmit_sdr(in, di.u);
        REQUIRE(des.status.ok());
        auto pm = power_min_crosscheck(des.sdr_objective, in, di.u);
        REQUIRE(pm.status.ok());
        CHECK(pm.power == Catch::Approx(di.cfg.power_budget).epsilon(1e-4));
    }
}
