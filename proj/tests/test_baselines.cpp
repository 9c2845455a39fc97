#include <doctest.h>

#include <Eigen/SVD>

#include "ddsr/baselines.hpp"
#include "helpers.hpp"

using namespace ddsr;

namespace {

std::pair<int, int> argmax(const RMat& g) {
    Index i = 0, j = 0;
    g.maxCoeff(&i, &j);
    return {static_cast<int>(i), static_cast<int>(j)};
}

double cell_distance(int i, int grid, double f) { return wrap_distance(static_cast<double>(i) / grid, f) * grid; }

} // namespace

TEST_CASE("spatial smoothing layout") {
    Scene s;
    s.targets.push_back({{1.0, 0.3}, 0.2, 0.4});
    SUBCASE("degenerate 2x2 smoothing") {
        const auto m = simulate(s, testing::config(2, 2), Constellation::qpsk(), 0.0, 1);
        MusicConfig c = MusicConfig::defaults_for(2, 2, MusicConfig::kAutoSignalDim);
        c.M_sub = c.N_sub = 1;
        const CMat Y = spatial_smooth(m, c);
        REQUIRE(Y.rows() == 1);
        REQUIRE(Y.cols() == 4);
        const CVec R = m.r_bar.cwiseQuotient(m.s_tilde());
        // anchors (m0, n0) in column m0 * 2 + n0, sample index n0 * M + m0
        CHECK(std::abs(Y(0, 0) - R[0]) < 1e-15);
        CHECK(std::abs(Y(0, 1) - R[2]) < 1e-15);
        CHECK(std::abs(Y(0, 2) - R[1]) < 1e-15);
        CHECK(std::abs(Y(0, 3) - R[3]) < 1e-15);
    }
    SUBCASE("index oracle") {
        const int M = 4, N = 5;
        const auto m = simulate(s, testing::config(M, N), Constellation::qpsk(), 0.0, 2);
        MusicConfig c = MusicConfig::defaults_for(M, N, 1);
        c.M_sub = M - 1;
        c.N_sub = N - 1;
        const CMat Y = spatial_smooth(m, c);
        REQUIRE(Y.cols() == 4);
        const CVec R = m.r_bar.cwiseQuotient(m.s_tilde());
        for (int m0 = 0; m0 < 2; ++m0)
            for (int n0 = 0; n0 < 2; ++n0)
                for (int nn = 0; nn < N - 1; ++nn)
                    for (int mm = 0; mm < M - 1; ++mm)
                        CHECK(Y(nn * (M - 1) + mm, m0 * 2 + n0) == R[(n0 + nn) * M + (m0 + mm)]);
    }
    SUBCASE("single noiseless path is rank one") {
        const auto m = testing::clean_measurement(s, 6, 6, Constellation::qpsk(), 3);
        for (int ms : {2, 3, 4})
            for (int ns : {2, 3, 5}) {
                MusicConfig c = MusicConfig::defaults_for(6, 6, 1);
                c.M_sub = ms;
                c.N_sub = ns;
                const RVec sv = Eigen::JacobiSVD<CMat>(spatial_smooth(m, c)).singularValues();
                CHECK(sv[1] < 1e-10 * sv[0]);
            }
    }
    SUBCASE("zero symbol rejected") {
        auto m = simulate(s, testing::config(4, 4), Constellation::qpsk(), 0.0, 4);
        m.S_hat(1, 1) = 0.0;
        CHECK_THROWS_AS(spatial_smooth(m, MusicConfig::defaults_for(4, 4, 1)), DomainError);
    }
    MusicConfig bad = MusicConfig::defaults_for(4, 4, 1);
    bad.M_sub = 4;
    CHECK_THROWS_AS(bad.validate(4, 4), ConfigError);
}

TEST_CASE("MUSIC spectrum") {
    const int M = 8, N = 8;
    Scene one;
    one.targets.push_back({{1.0, 0.0}, 0.23, 0.61});
    const auto m1 = testing::clean_measurement(one, M, N, Constellation::qpsk(), 5);
    const auto c1 = MusicConfig::defaults_for(M, N, 1);
    const CMat Y1 = spatial_smooth(m1, c1);
    const RMat f1 = music_spectrum(Y1, c1);
    const auto [i, j] = argmax(f1);
    CHECK(cell_distance(i, c1.grid_phi, 0.23) <= 1.0);
    CHECK(cell_distance(j, c1.grid_psi, 0.61) <= 1.0);

    // scale invariance of the argmax
    CHECK(argmax(music_spectrum(Y1 * cplx(-3.0, 0.5), c1)) == argmax(f1));

    Scene two = one;
    two.targets.push_back({{0.0, 0.8}, 0.71, 0.12});
    const auto m2 = testing::clean_measurement(two, M, N, Constellation::qpsk(), 6);
    const auto c2 = MusicConfig::defaults_for(M, N, 2);
    const auto est = music_estimate(m2, c2);
    CHECK(est.algorithm == "2D-MUSIC");
    REQUIRE(est.paths.size() == 2);
    for (const auto& t : two.targets) {
        bool hit = false;
        for (const auto& p : est.paths) {
            hit = hit || (wrap_distance(p.phi, t.phi) <= 1.0 / c2.grid_phi && wrap_distance(p.psi, t.psi) <= 1.0 / c2.grid_psi);
        }
        CHECK(hit);
    }

    MusicConfig zero = c1;
    zero.K_signal = 0;
    CHECK_THROWS_AS(zero.validate(M, N), ConfigError);
    CHECK_THROWS_AS(music_spectrum(Y1, c1, 0), ConfigError);

    // auto dimension finds the planted order on clean data
    CHECK(eigen_gap_dimension(Eigen::JacobiSVD<CMat>(spatial_smooth(m2, c2)).singularValues()) == 2);
}

TEST_CASE("grid dictionary operator") {
    Rng rng(7);
    const CVec s = testing::random_cvec(12, rng);
    const GridDictionary A(s, 3, 4, 6, 8);
    const CVec x = testing::random_cvec(A.columns(), rng), y = testing::random_cvec(12, rng);
    CHECK(std::abs(y.dot(A.apply(x)) - A.adjoint(y).dot(x)) < 1e-10);
    // column j * M_grid + i is s .* a(i / M_grid, j / N_grid)
    CVec e = CVec::Zero(A.columns());
    e[2 * 6 + 5] = 1.0;
    CHECK((A.apply(e) - s.cwiseProduct(atom(5.0 / 6, 2.0 / 8, 3, 4))).norm() < 1e-12);
    const auto f = A.frequency(2 * 6 + 5);
    CHECK(f.phi == doctest::Approx(5.0 / 6));
    CHECK(f.psi == doctest::Approx(0.25));
}

TEST_CASE("CS-L1") {
    const int M = 8, N = 8;
    SUBCASE("on-grid exact support and certificate") {
        Scene s;
        s.targets.push_back({{1.0, 0.5}, 5.0 / 32, 9.0 / 32});
        const auto m = testing::clean_measurement(s, M, N, Constellation::qpsk(), 8);
        CsL1Config c = CsL1Config::defaults_for(M, N, 0.0);
        c.gamma = 0.01 * m.r_bar.norm();
        const auto res = csl1_solve(m, c);
        REQUIRE(res.estimate.paths.size() == 1);
        CHECK(res.estimate.paths[0].phi == doctest::Approx(5.0 / 32));
        CHECK(res.estimate.paths[0].psi == doctest::Approx(9.0 / 32));
        CHECK(std::abs(res.estimate.paths[0].alpha - cplx(1.0, 0.5)) < 0.1 * std::abs(cplx(1.0, 0.5)));
        const auto cert = l1_certificate(m, c, res.coefficients);
        CHECK(cert.max_correlation <= c.gamma * (1.0 + 1e-3));
        CHECK(cert.support_deviation <= 1e-3 * c.gamma);
    }
    SUBCASE("large gamma gives the zero solution") {
        Scene s;
        s.targets.push_back({{1.0, 0.0}, 0.3, 0.3});
        const auto m = testing::clean_measurement(s, M, N, Constellation::qpsk(), 9);
        CsL1Config c = CsL1Config::defaults_for(M, N, 0.0);
        const GridDictionary A(m.s_tilde(), M, N, c.M_grid, c.N_grid);
        c.gamma = A.adjoint(m.r_bar).cwiseAbs().maxCoeff() * 1.0001;
        const auto res = csl1_solve(m, c);
        CHECK(res.coefficients.norm() == 0.0);
        CHECK(res.estimate.paths.empty());
    }
    SUBCASE("off-grid paths split") {
        Scene s;
        s.targets.push_back({{1.0, 0.0}, 0.3 + 0.5 / 32, 0.6 + 0.5 / 32});
        const auto m = testing::clean_measurement(s, M, N, Constellation::qpsk(), 10);
        CsL1Config c = CsL1Config::defaults_for(M, N, 0.0);
        c.gamma = 0.01 * m.r_bar.norm();
        const auto est = csl1_estimate(m, c);
        int near = 0;
        for (const auto& p : est.paths) {
            near += wrap_distance(p.phi, s.targets[0].phi) < 2.0 / 32 && wrap_distance(p.psi, s.targets[0].psi) < 2.0 / 32;
        }
        CHECK(near >= 2);
    }
    CsL1Config bad = CsL1Config::defaults_for(M, N, 0.1);
    bad.M_grid = M - 1;
    CHECK_THROWS_AS(bad.validate(M, N), ConfigError);
    CHECK(CsL1Config::defaults_for(M, N, 0.1).gamma == doctest::Approx(0.2 * std::sqrt(2.0 * std::log(1024.0))));
}
