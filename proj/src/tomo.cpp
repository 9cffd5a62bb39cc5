#include "eploop/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <vector>

#include "eploop/errors.hpp"
#include "eploop/parallel.hpp"

namespace eploop {

namespace {

// Bloch rows (I, X, Y, Z) of the four single-photon analyser states.
constexpr std::array<std::array<double, 4>, 4> kS{{
    {1.0, 0.0, 0.0, 1.0},
    {1.0, 0.0, 0.0, -1.0},
    {1.0, 1.0, 0.0, 0.0},
    {1.0, 0.0, -1.0, 0.0},
}};

// Exact inverse of kS.
constexpr std::array<std::array<double, 4>, 4> kSInv{{
    {0.5, 0.5, 0.0, 0.0},
    {-0.5, -0.5, 1.0, 0.0},
    {0.5, 0.5, 0.0, -1.0},
    {0.5, -0.5, 0.0, 0.0},
}};

const std::array<CMat2, 4>& paulis() {
    static const std::array<CMat2, 4> p{CMat2::identity(), CMat2{0.0, 1.0, 1.0, 0.0}, CMat2{0.0, -kI, kI, 0.0},
                                        CMat2{1.0, 0.0, 0.0, -1.0}};
    return p;
}

std::mt19937_64 seeded(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    return std::mt19937_64(seq);
}

std::uint64_t poisson(std::mt19937_64& rng, double mean) {
    if (!(mean > 0.0)) return 0;
    std::poisson_distribution<std::uint64_t> dist(mean);
    return dist(rng);
}

void check_inverse_residual() {
    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) s += kS[i][k] * kSInv[k][j];
            worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    if (worst > 1e-8) throw IllConditioned("measurement matrix inversion residual above 1e-8");
}

}  // namespace

char to_char(PolBasis b) {
    static constexpr char names[] = {'H', 'V', 'D', 'R'};
    return names[static_cast<int>(b)];
}

std::optional<PolBasis> parse_pol_basis(std::string_view s) {
    if (s.size() != 1) return std::nullopt;
    switch (s[0]) {
        case 'H': return PolBasis::H;
        case 'V': return PolBasis::V;
        case 'D': return PolBasis::D;
        case 'R': return PolBasis::R;
        default: return std::nullopt;
    }
}

CVec2 pol_state(PolBasis b) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (b) {
        case PolBasis::H: return CVec2{1.0, 0.0};
        case PolBasis::V: return CVec2{0.0, 1.0};
        case PolBasis::D: return CVec2{r, r};
        case PolBasis::R: return CVec2{r, -kI * r};
    }
    return {};
}

std::array<BasisPair, 16> basis_pairs() {
    std::array<BasisPair, 16> out;
    for (std::size_t i = 0; i < 16; ++i) out[i] = {static_cast<PolBasis>(i / 4), static_cast<PolBasis>(i % 4)};
    return out;
}

std::array<CMat4, 16> basis_projectors() {
    std::array<CMat4, 16> out;
    const auto pairs = basis_pairs();
    for (std::size_t i = 0; i < 16; ++i) {
        const CVec4 v = kron(pol_state(pairs[i].a), pol_state(pairs[i].b));
        out[i] = CMat4::outer(v, v);
    }
    return out;
}

Mat16 measurement_matrix() {
    Mat16 m{};
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t i = 0; i < 4; ++i)
                for (std::size_t j = 0; j < 4; ++j) m[4 * a + b][4 * i + j] = 0.25 * kS[a][i] * kS[b][j];
    return m;
}

Mat16 measurement_matrix_inverse() {
    Mat16 m{};
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t a = 0; a < 4; ++a)
                for (std::size_t b = 0; b < 4; ++b) m[4 * i + j][4 * a + b] = 4.0 * kSInv[i][a] * kSInv[j][b];
    return m;
}

double measurement_condition_number() {
    auto norm_inf = [](const Mat16& m) {
        double best = 0.0;
        for (const auto& row : m) {
            double s = 0.0;
            for (double v : row) s += std::abs(v);
            best = std::max(best, s);
        }
        return best;
    };
    return norm_inf(measurement_matrix()) * norm_inf(measurement_matrix_inverse());
}

std::array<double, 16> probabilities(const DensityMatrix& rho) {
    std::array<double, 16> p{};
    const auto proj = basis_projectors();
    for (std::size_t i = 0; i < 16; ++i) p[i] = (proj[i] * rho.matrix()).trace().real();
    return p;
}

CountsTable simulate_counts(const DensityMatrix& rho, const TomoConfig& cfg) {
    if (cfg.counts_per_basis < 1) throw ConfigError("counts_per_basis must be at least 1");
    const auto p = probabilities(rho);
    const auto pairs = basis_pairs();
    auto rng = seeded(cfg.seed);
    CountsTable t;
    for (std::size_t i = 0; i < 16; ++i) {
        const double mean = static_cast<double>(cfg.counts_per_basis) * std::max(p[i], 0.0);
        t.records[i] = {pairs[i], poisson(rng, mean)};
    }
    return t;
}

CountsTable expected_counts(const DensityMatrix& rho, const TomoConfig& cfg) {
    const auto p = probabilities(rho);
    const auto pairs = basis_pairs();
    CountsTable t;
    for (std::size_t i = 0; i < 16; ++i) {
        const double mean = static_cast<double>(cfg.counts_per_basis) * std::max(p[i], 0.0);
        t.records[i] = {pairs[i], static_cast<std::uint64_t>(std::llround(mean))};
    }
    return t;
}

DensityMatrix reconstruct_from_probabilities(const std::array<double, 16>& p, bool psd_projection, PsdMethod method) {
    check_inverse_residual();
    const Mat16 inv = measurement_matrix_inverse();
    std::array<double, 16> r{};
    for (std::size_t k = 0; k < 16; ++k)
        for (std::size_t l = 0; l < 16; ++l) r[k] += inv[k][l] * p[l];

    CMat4 rho;
    const auto& s = paulis();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) rho = rho + Complex{0.25 * r[4 * i + j]} * kron(s[i], s[j]);
    rho = 0.5 * (rho + rho.adjoint());

    const double tr = rho.trace().real();
    if (!(tr > 0.0)) throw IllConditioned("reconstructed trace is not positive");
    rho = Complex{1.0 / tr} * rho;

    if (!psd_projection) return DensityMatrix(rho, DensityMatrix::Check::SkipPositivity);

    const HermitianEigen eig = hermitian_eig4(rho);
    std::array<double, 4> w = eig.values;  // ascending
    if (method == PsdMethod::Nearest) {
        double carried = 0.0;
        std::size_t i = 0;
        while (i < 4 && w[i] + carried / static_cast<double>(4 - i) < 0.0) {
            carried += w[i];
            w[i] = 0.0;
            ++i;
        }
        for (std::size_t j = i; j < 4; ++j) w[j] += carried / static_cast<double>(4 - i);
    } else {
        double total = 0.0;
        for (double& v : w) {
            v = std::max(v, 0.0);
            total += v;
        }
        for (double& v : w) v /= total;
    }
    CMat4 projected;
    for (std::size_t k = 0; k < 4; ++k) projected = projected + Complex{w[k]} * CMat4::outer(eig.vectors[k], eig.vectors[k]);
    projected = 0.5 * (projected + projected.adjoint());
    projected = Complex{1.0 / projected.trace().real()} * projected;
    return DensityMatrix(projected);
}

DensityMatrix reconstruct(const CountsTable& counts, const TomoConfig& cfg) {
    if (cfg.counts_per_basis < 1) throw ConfigError("counts_per_basis must be at least 1");
    const auto pairs = basis_pairs();
    std::array<double, 16> p{};
    for (const auto& rec : counts.records) {
        for (std::size_t i = 0; i < 16; ++i) {
            if (pairs[i] == rec.basis) p[i] = static_cast<double>(rec.count) / static_cast<double>(cfg.counts_per_basis);
        }
    }
    return reconstruct_from_probabilities(p, cfg.psd_projection, cfg.psd_method);
}

BootstrapSummary bootstrap_error(const CountsTable& counts, const TomoConfig& cfg, std::size_t resamples,
                                 const std::optional<DensityMatrix>& reference) {
    if (resamples < 2) throw DomainError("bootstrap needs at least 2 resamples");
    TomoConfig psd = cfg;
    psd.psd_projection = true;

    std::vector<std::array<double, 5>> scores(resamples);
    parallel_for(resamples, [&](std::size_t i) {
        auto rng = seeded(cfg.seed + i);
        CountsTable t = counts;
        for (auto& rec : t.records) rec.count = poisson(rng, static_cast<double>(rec.count));
        const DensityMatrix rho = reconstruct(t, psd);
        for (BellLabel l : kAllBellLabels)
            scores[i][index_of(l)] = fidelity(DensityMatrix::from_state(bell_state(l)), rho);
        scores[i][4] = reference ? fidelity(*reference, rho) : 0.0;
    });

    BootstrapSummary out;
    std::array<double, 5> mean{}, sd{};
    const double n = static_cast<double>(resamples);
    for (const auto& s : scores)
        for (std::size_t k = 0; k < 5; ++k) mean[k] += s[k] / n;
    for (const auto& s : scores)
        for (std::size_t k = 0; k < 5; ++k) sd[k] += (s[k] - mean[k]) * (s[k] - mean[k]) / (n - 1.0);
    for (std::size_t k = 0; k < 4; ++k) {
        out.bell_fidelity_mean[k] = mean[k];
        out.bell_fidelity_sd[k] = std::sqrt(sd[k]);
    }
    if (reference) {
        out.reference_fidelity_mean = mean[4];
        out.reference_fidelity_sd = std::sqrt(sd[4]);
    }
    return out;
}

void write_counts_csv(std::ostream& os, const CountsTable& counts) {
    os << "basis_a,basis_b,count\n";
    for (const auto& rec : counts.records) os << to_char(rec.basis.a) << ',' << to_char(rec.basis.b) << ',' << rec.count << '\n';
}

CountsTable read_counts_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("counts CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "basis_a,basis_b,count") throw ConfigError("counts CSV header must be basis_a,basis_b,count");

    const auto pairs = basis_pairs();
    CountsTable t;
    std::array<bool, 16> seen{};
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b, c;
        if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c))
            throw ConfigError("malformed counts row: " + line);
        const auto pa = parse_pol_basis(a), pb = parse_pol_basis(b);
        if (!pa || !pb) throw ConfigError("unknown basis in row: " + line);
        std::uint64_t count = 0;
        try {
            std::size_t used = 0;
            if (c.empty() || c[0] == '-') throw std::invalid_argument("negative");
            count = std::stoull(c, &used);
            if (used != c.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("invalid count in row: " + line);
        }
        const std::size_t idx = 4 * static_cast<std::size_t>(*pa) + static_cast<std::size_t>(*pb);
        if (seen[idx]) throw ConfigError("duplicate basis in row: " + line);
        seen[idx] = true;
        t.records[idx] = {pairs[idx], count};
    }
    for (bool s : seen)
        if (!s) throw ConfigError("counts CSV must list all 16 bases");
    return t;
}

}  // namespace eploop
