#include "ddsr/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ddsr {

namespace {

bool rel_close(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

void check_unit_interval(double x, const char* what) {
    if (!(x >= 0.0 && x < 1.0)) {
        std::ostringstream os;
        os << what << " = " << x << " outside [0,1)";
        throw DomainError(os.str());
    }
}

CVec steering(double f, int len) {
    CVec v(len);
    for (int i = 0; i < len; ++i) {
        v[i] = std::polar(1.0, kTwoPi * i * f);
    }
    return v;
}

} // namespace

RadarConfig RadarConfig::create(int M, int N, double delta_f, double T, double T_cp,
                                double f_c, double noise_power_db) {
    RadarConfig c;
    c.M = M;
    c.N = N;
    c.delta_f = delta_f;
    c.T = T;
    c.T_cp = T_cp;
    c.T_bar = T + T_cp;
    c.f_c = f_c;
    c.noise_power_db = noise_power_db;
    c.validate();
    return c;
}

void RadarConfig::validate() const {
    if (M < 2 || N < 2) {
        throw ConfigError("RadarConfig: M and N must be >= 2");
    }
    if (!(delta_f > 0.0) || !(T > 0.0) || !(T_cp >= 0.0) || !(f_c > 0.0)) {
        throw ConfigError("RadarConfig: delta_f, T, f_c must be positive and T_cp >= 0");
    }
    if (!rel_close(delta_f * T, 1.0, 1e-12)) {
        throw ConfigError("RadarConfig: delta_f must equal 1/T");
    }
    if (!rel_close(T_bar, T + T_cp, 1e-12)) {
        throw ConfigError("RadarConfig: T_bar must equal T + T_cp");
    }
    if (std::isnan(noise_power_db) || noise_power_db == std::numeric_limits<double>::infinity()) {
        throw ConfigError("RadarConfig: noise_power_db must be finite or -inf (noiseless)");
    }
}

double RadarConfig::sigma2() const { return std::pow(10.0, noise_power_db / 10.0); }

std::vector<Path> Scene::all_paths() const {
    std::vector<Path> out = targets;
    out.insert(out.end(), clutter.begin(), clutter.end());
    return out;
}

void Scene::validate() const {
    if (size() == 0) {
        throw ConfigError("Scene: at least one path required");
    }
    for (const auto& p : all_paths()) {
        check_unit_interval(p.phi, "phi");
        check_unit_interval(p.psi, "psi");
    }
}

Constellation Constellation::bpsk() {
    return {"BPSK", {cplx(1.0, 0.0), cplx(-1.0, 0.0)}, 1};
}

Constellation Constellation::qpsk() {
    // label = b0 + 2*b1, symbol = ((1-2 b0) + i (1-2 b1)) / sqrt(2)
    const double s = 1.0 / std::sqrt(2.0);
    return {"QPSK", {cplx(s, s), cplx(-s, s), cplx(s, -s), cplx(-s, -s)}, 2};
}

Constellation Constellation::from_name(const std::string& name) {
    std::string up = name;
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char ch) { return std::toupper(ch); });
    if (up == "BPSK") return bpsk();
    if (up == "QPSK") return qpsk();
    throw ConfigError("unknown constellation '" + name + "' (expected BPSK or QPSK)");
}

int Constellation::nearest_label(cplx symbol) const {
    int best = 0;
    double best_d = std::abs(symbol - points[0]);
    for (int i = 1; i < static_cast<int>(points.size()); ++i) {
        const double d = std::abs(symbol - points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

CVec steering_b(double phi, int M) {
    check_unit_interval(phi, "phi");
    return steering(phi, M);
}

CVec steering_g(double psi, int N) {
    check_unit_interval(psi, "psi");
    return steering(psi, N);
}

CVec atom(double phi, double psi, int M, int N) {
    check_unit_interval(phi, "phi");
    check_unit_interval(psi, "psi");
    CVec a(static_cast<Index>(M) * N);
    for (int n = 0; n < N; ++n) {
        for (int m = 0; m < M; ++m) {
            a[static_cast<Index>(n) * M + m] = std::polar(1.0, kTwoPi * (m * phi - n * psi));
        }
    }
    return a;
}

CVec synthesize_clean(const Scene& scene, const RadarConfig& config) {
    scene.validate();
    CVec z = CVec::Zero(config.size());
    for (const auto& p : scene.all_paths()) {
        z += p.alpha * atom(p.phi, p.psi, config.M, config.N);
    }
    return z;
}

CMat generate_symbols(const RadarConfig& config, const Constellation& constellation,
                      std::uint64_t seed) {
    if (constellation.points.empty()) {
        throw ConfigError("empty constellation");
    }
    Rng rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(constellation.points.size()) - 1);
    CMat S(config.M, config.N);
    for (Index j = 0; j < S.size(); ++j) {
        S.data()[j] = constellation.points[pick(rng)];
    }
    return S;
}

DemodErrors inject_demod_errors(const CMat& S, double ber, const Constellation& constellation,
                                std::uint64_t seed) {
    if (!(ber >= 0.0 && ber <= 0.5)) {
        throw DomainError("ber must lie in [0, 0.5]");
    }
    DemodErrors out{S, {}};
    if (ber == 0.0) {
        return out;
    }
    Rng rng(seed);
    std::bernoulli_distribution flip(ber);
    for (Index j = 0; j < S.size(); ++j) {
        int label = constellation.nearest_label(S.data()[j]);
        const int original = label;
        for (int b = 0; b < constellation.bits_per_symbol; ++b) {
            if (flip(rng)) {
                label = constellation.flip_bit(label, b);
            }
        }
        if (label != original) {
            out.S_hat.data()[j] = constellation.points[label];
            out.error_mask.push_back(j);
        }
    }
    return out;
}

CVec Measurement::s_tilde() const {
    return Eigen::Map<const CVec>(S_hat.data(), S_hat.size());
}

void Measurement::validate() const {
    config.validate();
    if (S_hat.rows() != config.M || S_hat.cols() != config.N) {
        throw ConfigError("Measurement: S_hat must be M x N");
    }
    if (r_bar.size() != config.size()) {
        throw ConfigError("Measurement: r_bar must have length M*N");
    }
    for (Index j = 0; j < S_hat.size(); ++j) {
        if (S_hat.data()[j] == cplx(0.0, 0.0)) {
            throw DomainError("Measurement: S_hat has a zero entry at index " + std::to_string(j));
        }
    }
    if (!r_bar.allFinite() || !S_hat.allFinite()) {
        throw NumericError("Measurement: non-finite data");
    }
}

Measurement measure(const Scene& scene, const CMat& S, const CMat& S_hat,
                    const RadarConfig& config, std::uint64_t seed) {
    config.validate();
    if (S.rows() != config.M || S.cols() != config.N || S_hat.rows() != S.rows() ||
        S_hat.cols() != S.cols()) {
        throw ConfigError("measure: S and S_hat must both be M x N");
    }
    for (Index j = 0; j < S_hat.size(); ++j) {
        if (S_hat.data()[j] == cplx(0.0, 0.0)) {
            throw DomainError("measure: S_hat has a zero entry at index " + std::to_string(j));
        }
    }
    const Index n = config.size();
    const CVec z = synthesize_clean(scene, config);
    const double sigma2 = config.sigma2();

    Rng rng(seed);
    CVec v = CVec::Zero(n);
    if (sigma2 > 0.0) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
        for (Index j = 0; j < n; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            v[j] = cplx(re, im);
        }
    }

    const Eigen::Map<const CVec> s(S.data(), n);
    const Eigen::Map<const CVec> s_hat(S_hat.data(), n);

    Measurement m;
    m.config = config;
    m.S_hat = S_hat;
    m.r_bar = s.cwiseProduct(z) + v;
    m.z_bar_true = z;
    m.e_bar_true = (s - s_hat).cwiseProduct(z);
    m.v_bar_true = v;
    m.sigma2 = sigma2;
    m.truth = scene;
    for (Index j = 0; j < n; ++j) {
        if (s[j] != s_hat[j]) {
            m.error_mask.push_back(j);
        }
    }
    return m;
}

Measurement simulate(const Scene& scene, const RadarConfig& config,
                     const Constellation& constellation, double ber, std::uint64_t seed) {
    const CMat S = generate_symbols(config, constellation, derive_seed(seed, 1));
    DemodErrors demod = inject_demod_errors(S, ber, constellation, derive_seed(seed, 2));
    Measurement m = measure(scene, S, demod.S_hat, config, derive_seed(seed, 3));
    m.metadata = SimMetadata{seed, ber, constellation.name};
    return m;
}

NormalizedFreq physical_to_normalized(double range_m, double velocity_mps,
                                      const RadarConfig& config) {
    if (!(range_m >= 0.0)) {
        throw DomainError("range must be non-negative");
    }
    const double tau = range_m / kSpeedOfLight;
    const double doppler = velocity_mps * config.f_c / kSpeedOfLight;
    NormalizedFreq out;
    out.psi = config.delta_f * tau;
    out.phi = wrap_unit(doppler * config.T_bar);
    if (!(out.psi < 1.0)) {
        throw DomainError("range exceeds the unambiguous delay interval");
    }
    return out;
}

PhysicalCoord normalized_to_physical(double phi, double psi, const RadarConfig& config) {
    const double signed_phi = phi > 0.5 ? phi - 1.0 : phi;
    PhysicalCoord out;
    out.range_m = psi / config.delta_f * kSpeedOfLight;
    out.velocity_mps = signed_phi / config.T_bar * kSpeedOfLight / config.f_c;
    return out;
}

} // namespace ddsr
