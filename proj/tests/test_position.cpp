#include <catch2/catch_amalgamated.hpp>

#include "maisac/position_opt.hpp"
#include "testutil.hpp"

using namespace maisac;
using testutil::DeskInstance;
using testutil::make_desk_instance;

namespace {

struct PreparedContexts {
    DeskInstance di;
    CMat beams;
    RxObjectiveContext rx;
    TxObjectiveContext tx;
};

PreparedContexts prepare(std::uint64_t seed, int n_tx = 6, int m_rx = 4) {
    PreparedContexts pc{make_desk_instance(seed, n_tx, m_rx), {}, {}, {}};
    Rng rng(seed * 7 + 1);
    pc.beams.resize(n_tx, n_tx);
    for (int c = 0; c < n_tx; ++c)
        for (int r = 0; r < n_tx; ++r) pc.beams(r, c) = rng.complex_normal(1.0);
    pc.beams *= std::sqrt(pc.di.cfg.power_budget) / pc.beams.norm();
    pc.rx = make_rx_context(pc.di.real, pc.di.cfg, pc.di.layout, pc.beams, pc.di.u);
    pc.tx = make_tx_context(pc.di.real, pc.di.cfg, pc.di.layout, pc.beams, pc.di.u);
    return pc;
}

Position2D random_point(Rng& rng, const Region& reg) {
    return {rng.uniform(reg.x_min, reg.x_max), rng.uniform(reg.y_min, reg.y_max)};
}

}  // namespace

TEST_CASE("f/g equals the sensing SINR for both sides") {
    Rng rng(5);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto pc = prepare(seed);
        const Region reg = pc.di.cfg.rx_region();
        for (int trial = 0; trial < 5; ++trial) {
            const int m = static_cast<int>(rng.uniform() * pc.di.cfg.m_rx);
            const Position2D p = random_point(rng, reg);
            FgValue v = eval_fg(pc.rx.sensing, m, p);

            AntennaLayout lay = pc.di.layout;
            lay.rx[m] = p;
            auto ch = build_channels(pc.di.real, lay, pc.di.cfg.wavelength);
            BeamformerSet bs;
            bs.tx = pc.beams;
            bs.rx = pc.di.u;
            const double want = sensing_sinr(bs, ch, pc.di.real, pc.di.cfg.noise_radar_var);
            CHECK(v.ratio() == Catch::Approx(want).epsilon(1e-10));
        }
        for (int trial = 0; trial < 5; ++trial) {
            const int n = static_cast<int>(rng.uniform() * pc.di.cfg.n_tx);
            const Position2D p = random_point(rng, pc.di.cfg.tx_region());
            FgValue v = eval_fg(pc.tx.sensing, n, p);

            AntennaLayout lay = pc.di.layout;
            lay.tx[n] = p;
            auto ch = build_channels(pc.di.real, lay, pc.di.cfg.wavelength);
            BeamformerSet bs;
            bs.tx = pc.beams;
            bs.rx = pc.di.u;
            const double want = sensing_sinr(bs, ch, pc.di.real, pc.di.cfg.noise_radar_var);
            CHECK(v.ratio() == Catch::Approx(want).epsilon(1e-10));
        }
    }
}

TEST_CASE("comm terms equal the exact user SINR") {
    Rng rng(6);
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto pc = prepare(seed);
        for (int trial = 0; trial < 4; ++trial) {
            const int n = static_cast<int>(rng.uniform() * pc.di.cfg.n_tx);
            const Position2D p = random_point(rng, pc.di.cfg.tx_region());
            AntennaLayout lay = pc.di.layout;
            lay.tx[n] = p;
            auto ch = build_channels(pc.di.real, lay, pc.di.cfg.wavelength);
            BeamformerSet bs;
            bs.tx = pc.beams;
            bs.rx = pc.di.u;
            for (int k = 0; k < pc.di.cfg.k_users(); ++k) {
                const FgValue v = eval_fg(pc.tx.comm[k].obj, n, p);
                const double want = comm_sinr(k, ch.users, bs, pc.di.cfg.noise_user_var);
                CHECK(v.ratio() == Catch::Approx(want).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("cosine-expansion evaluation matches the complex route") {
    Rng rng(7);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto pc = prepare(seed);
        for (int trial = 0; trial < 4; ++trial) {
            const int m = static_cast<int>(rng.uniform() * pc.di.cfg.m_rx);
            const Position2D p = random_point(rng, pc.di.cfg.rx_region());
            const FgValue a = eval_fg(pc.rx.sensing, m, p);
            const FgValue b = eval_fg_cos(pc.rx.sensing, m, p);
            CHECK(b.f == Catch::Approx(a.f).epsilon(1e-10));
            CHECK(b.g == Catch::Approx(a.g).epsilon(1e-10));

            const int n = static_cast<int>(rng.uniform() * pc.di.cfg.n_tx);
            const Position2D q = random_point(rng, pc.di.cfg.tx_region());
            const FgValue c = eval_fg(pc.tx.sensing, n, q);
            const FgValue d = eval_fg_cos(pc.tx.sensing, n, q);
            CHECK(d.f == Catch::Approx(c.f).epsilon(1e-10));
            CHECK(d.g == Catch::Approx(c.g).epsilon(1e-10));
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(8);
    const double h = 1e-6;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 10 && checked < 100; ++seed) {
        auto pc = prepare(seed);
        for (int trial = 0; trial < 10 && checked < 100; ++trial, ++checked) {
            const bool rx_side = trial % 2 == 0;
            PositionObjective& obj = rx_side ? pc.rx.sensing : pc.tx.sensing;
            const Region reg = rx_side ? pc.di.cfg.rx_region() : pc.di.cfg.tx_region();
            const int idx = static_cast<int>(
                rng.uniform() * (rx_side ? pc.di.cfg.m_rx : pc.di.cfg.n_tx));
            const Position2D p = random_point(rng, reg);
            Vec2 gf, gg;
            grad_fg(obj, idx, p, gf, gg);
            auto fd = [&](bool on_f, int axis) {
                Position2D pp = p, pm = p;
                (axis == 0 ? pp.x : pp.y) += h;
                (axis == 0 ? pm.x : pm.y) -= h;
                const FgValue vp = eval_fg(obj, idx, pp);
                const FgValue vm = eval_fg(obj, idx, pm);
                return ((on_f ? vp.f : vp.g) - (on_f ? vm.f : vm.g)) / (2 * h);
            };
            const double scale_f = std::max(gf.norm(), 1e-12);
            CHECK(std::abs(fd(true, 0) - gf.x()) <= 1e-5 * scale_f);
            CHECK(std::abs(fd(true, 1) - gf.y()) <= 1e-5 * scale_f);
            const double scale_g = std::max(gg.norm(), 1e-12);
            CHECK(std::abs(fd(false, 0) - gg.x()) <= 1e-5 * scale_g);
            CHECK(std::abs(fd(false, 1) - gg.y()) <= 1e-5 * scale_g);
        }
    }
    CHECK(checked == 100);
}

TEST_CASE("gradient of g vanishes without clutter") {
    auto pc = prepare(3);
    pc.rx.sensing.den.clear();  // no clutter terms; only the noise constant
    Vec2 gf, gg;
    grad_fg(pc.rx.sensing, 1, Position2D{0.1, 0.2}, gf, gg);
    CHECK(gg.norm() == 0.0);
}

TEST_CASE("hessian bounds dominate finite-difference hessians") {
    Rng rng(9);
    const double h = 1e-5;
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 10 && checked < 100; ++seed) {
        auto pc = prepare(seed);
        for (int trial = 0; trial < 10 && checked < 100; ++trial, ++checked) {
            const bool rx_side = trial % 2 == 0;
            PositionObjective& obj = rx_side ? pc.rx.sensing : pc.tx.sensing;
            const Region reg = rx_side ? pc.di.cfg.rx_region() : pc.di.cfg.tx_region();
            const int idx = static_cast<int>(
                rng.uniform() * (rx_side ? pc.di.cfg.m_rx : pc.di.cfg.n_tx));
            const Position2D p = random_point(rng, reg);
            const auto [df, dg] = hessian_bounds(obj, idx);

            auto hess = [&](bool on_f) {
                auto val = [&](double ox, double oy) {
                    const FgValue v = eval_fg(obj, idx, Position2D{p.x + ox, p.y + oy});
                    return on_f ? v.f : v.g;
                };
                Eigen::Matrix2d H;
                const double c = val(0, 0);
                H(0, 0) = (val(h, 0) - 2 * c + val(-h, 0)) / (h * h);
                H(1, 1) = (val(0, h) - 2 * c + val(0, -h)) / (h * h);
                H(0, 1) = H(1, 0) =
                    (val(h, h) - val(h, -h) - val(-h, h) + val(-h, -h)) / (4 * h * h);
                return H;
            };
            const double nf = hess(true).cwiseAbs().norm();
            const double ng = hess(false).cwiseAbs().norm();
            CHECK(nf <= df * (1 + 1e-6) + 1e-9);
            CHECK(ng <= dg * (1 + 1e-6) + 1e-9);
        }
    }
}

TEST_CASE("taylor surrogates are tight at the expansion point and globally valid") {
    Rng rng(10);
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto pc = prepare(seed);
        const Region reg = pc.di.cfg.rx_region();
        const int m = 1;
        const Position2D p0 = random_point(rng, reg);
        const FgValue v0 = eval_fg(pc.rx.sensing, m, p0);
        Vec2 gf, gg;
        grad_fg(pc.rx.sensing, m, p0, gf, gg);
        const auto [df, dg] = hessian_bounds(pc.rx.sensing, m);
        const Surrogate lo = lower_surrogate(v0.f, gf, df, p0.vec());
        const Surrogate up = upper_surrogate(v0.g, gg, dg, p0.vec());

        CHECK(lo.at(p0.vec()) == Catch::Approx(v0.f).epsilon(1e-12));
        CHECK(up.at(p0.vec()) == Catch::Approx(v0.g).epsilon(1e-12));

        for (int trial = 0; trial < 1000; ++trial) {
            const Position2D p = random_point(rng, reg);
            const FgValue v = eval_fg(pc.rx.sensing, m, p);
            CHECK(lo.at(p.vec()) <= v.f + 1e-9 * std::max(1.0, std::abs(v.f)));
            CHECK(up.at(p.vec()) >= v.g - 1e-9 * std::max(1.0, std::abs(v.g)));
        }
    }
}

TEST_CASE("distance linearization") {
    SECTION("anchor equals the variable point") {
        DistanceCut cut = distance_linearization({0.3, 0.3}, {0.1, 0.3}, 0.05);
        CHECK(cut.satisfied(Vec2(0.3, 0.3)));  // reads ||anchor-other|| >= D
    }
    SECTION("satisfaction implies the true distance") {
        Rng rng(11);
        for (int trial = 0; trial < 10000; ++trial) {
            const Position2D anchor{rng.uniform(0, 1), rng.uniform(0, 1)};
            const Position2D other{rng.uniform(0, 1), rng.uniform(0, 1)};
            if (distance(anchor, other) < 1e-6) continue;
            const double D = rng.uniform(0.01, 0.3);
            DistanceCut cut = distance_linearization(anchor, other, D);
            const Vec2 p(rng.uniform(-1, 2), rng.uniform(-1, 2));
            if (cut.satisfied(p)) CHECK((p - other.vec()).norm() >= D - 1e-12);
        }
    }
    SECTION("degenerate anchor") {
        CHECK_THROWS_AS(distance_linearization({0.1, 0.1}, {0.1, 0.1}, 0.05),
                        std::invalid_argument);
    }
}

TEST_CASE("rx position SCA ascends and respects constraints") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto pc = prepare(seed);
        const Region reg = pc.di.cfg.rx_region();
        ScaConfig cfg;
        for (int m = 0; m < pc.di.cfg.m_rx; ++m) {
            const FgValue before = eval_fg(pc.rx.sensing, m, pc.rx.sensing.positions[m]);
            ScaState st;
            const Position2D out = optimize_rx_position(pc.rx, m, reg, pc.di.cfg.min_spacing,
                                                        cfg, &st);
            const FgValue after = eval_fg(pc.rx.sensing, m, out);
            CHECK(after.ratio() >= before.ratio() * (1 - 1e-9));
            CHECK(reg.contains(out, 1e-12));
            for (int b = 0; b < pc.di.cfg.m_rx; ++b)
                if (b != m)
                    CHECK(distance(out, pc.rx.sensing.positions[b]) >=
                          pc.di.cfg.min_spacing - 1e-9);
            for (std::size_t i = 1; i < st.trace.size(); ++i)
                CHECK(st.trace[i] >= st.trace[i - 1] * (1 - 1e-12));
        }
    }
}

TEST_CASE("rx position SCA reaches the grid optimum or a local maximum (M=1)") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto pc = prepare(seed + 30, 6, 1);
        const Region reg = pc.di.cfg.rx_region();
        ScaConfig cfg;
        cfg.max_iter = 30;
        cfg.rel_tol = 1e-10;
        // Emulate the outer loop: sweep until the antenna settles.
        for (int pass = 0; pass < 80; ++pass) {
            const Position2D prev = pc.rx.sensing.positions[0];
            optimize_rx_position(pc.rx, 0, reg, pc.di.cfg.min_spacing, cfg);
            if (distance(prev, pc.rx.sensing.positions[0]) < 1e-9) break;
        }
        const Position2D out = pc.rx.sensing.positions[0];
        const double got = eval_fg(pc.rx.sensing, 0, out).ratio();

        double grid_best = 0.0;
        const int G = 80;
        for (int i = 0; i <= G; ++i)
            for (int j = 0; j <= G; ++j) {
                const Position2D p{reg.x_min + reg.width() * i / G,
                                   reg.y_min + reg.height() * j / G};
                grid_best = std::max(grid_best, eval_fg(pc.rx.sensing, 0, p).ratio());
            }
        Vec2 gf, gg;
        grad_fg(pc.rx.sensing, 0, out, gf, gg);
        const FgValue v = eval_fg(pc.rx.sensing, 0, out);
        Vec2 grad_ratio = (gf - v.ratio() * gg) / v.g;
        // Project the ascent direction onto the feasible cone of the region
        // box; stationarity on an active edge means the outward component.
        const double edge = 1e-9;
        if (out.x <= reg.x_min + edge) grad_ratio.x() = std::max(grad_ratio.x(), 0.0);
        if (out.x >= reg.x_max - edge) grad_ratio.x() = std::min(grad_ratio.x(), 0.0);
        if (out.y <= reg.y_min + edge) grad_ratio.y() = std::max(grad_ratio.y(), 0.0);
        if (out.y >= reg.y_max - edge) grad_ratio.y() = std::min(grad_ratio.y(), 0.0);
        // Natural gradient magnitude of the lambda-periodic ratio landscape.
        const double scale = 2 * M_PI * std::max(1.0, std::abs(v.ratio())) / pc.di.cfg.wavelength;
        const bool near_grid = got >= grid_best * 0.9;
        const bool local_max = grad_ratio.norm() <= 1e-4 * scale;
        CHECK((near_grid || local_max));
    }
}

TEST_CASE("tx position SCA keeps users feasible and ascends") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        auto pc = prepare(seed);
        // Thresholds pinned below the current SINRs so the start is feasible.
        for (int k = 0; k < pc.di.cfg.k_users(); ++k) {
            const FgValue v = eval_fg(pc.tx.comm[k].obj, 0, pc.tx.sensing.positions[0]);
            pc.tx.comm[k].gamma = 0.5 * v.ratio();
        }
        const Region reg = pc.di.cfg.tx_region();
        ScaConfig cfg;
        for (int n = 0; n < pc.di.cfg.n_tx; ++n) {
            const FgValue before = eval_fg(pc.tx.sensing, n, pc.tx.sensing.positions[n]);
            const Position2D out = optimize_tx_position(pc.tx, n, reg, pc.di.cfg.min_spacing,
                                                        cfg);
            const FgValue after = eval_fg(pc.tx.sensing, n, out);
            CHECK(after.ratio() >= before.ratio() * (1 - 1e-9));
            CHECK(reg.contains(out, 1e-12));
            for (int k = 0; k < pc.di.cfg.k_users(); ++k) {
                const FgValue ck = eval_fg(pc.tx.comm[k].obj, n, out);
                CHECK(ck.ratio() >= pc.tx.comm[k].gamma * (1 - 1e-9));
            }
        }
    }
}

TEST_CASE("stationary interior start barely moves") {
    // Sweep to stationarity first, then assert re-running stays put.
    auto pc = prepare(77, 6, 2);
    const Region reg = pc.di.cfg.rx_region();
    ScaConfig cfg;
    cfg.max_iter = 30;
    cfg.rel_tol = 1e-12;
    Position2D prev = pc.rx.sensing.positions[0];
    for (int pass = 0; pass < 200; ++pass) {
        optimize_rx_position(pc.rx, 0, reg, pc.di.cfg.min_spacing, cfg);
        const Position2D now = pc.rx.sensing.positions[0];
        if (distance(prev, now) < 1e-10) break;
        prev = now;
    }
    const Position2D first = pc.rx.sensing.positions[0];
    optimize_rx_position(pc.rx, 0, reg, pc.di.cfg.min_spacing, cfg);
    const Position2D second = pc.rx.sensing.positions[0];
    CHECK(distance(first, second) <= 1e-4 * pc.di.cfg.wavelength);
}
