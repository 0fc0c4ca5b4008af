#include "otfs/channel.hpp"

#include "otfs/rng.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace otfs::channel {
namespace {

constexpr double kSpeedOfLight = 3e8;

// Adds a sum-of-sinusoids Rayleigh process of average power `power` to `col`.
void add_jakes(cplx* col, std::size_t len, double power, double fd, double fs, std::size_t S, Rng& rng)
{
    std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
    const double amp = std::sqrt(power / static_cast<double>(S));
    for (std::size_t s = 0; s < S; ++s) {
        const double theta = U(rng);
        const double phi = U(rng);
        const double w = 2.0 * std::numbers::pi * fd * std::cos(theta) / fs;
        for (std::size_t n = 0; n < len; ++n)
            col[n] += std::polar(amp, w * static_cast<double>(n) + phi);
    }
}

void add_los(cplx* col, std::size_t len, double power, double fd, double fs, Rng& rng)
{
    std::uniform_real_distribution<double> U(0.0, 2.0 * std::numbers::pi);
    const double theta = U(rng);
    const double phi = U(rng);
    const double w = 2.0 * std::numbers::pi * fd * std::cos(theta) / fs;
    const double amp = std::sqrt(power);
    for (std::size_t n = 0; n < len; ++n)
        col[n] += std::polar(amp, w * static_cast<double>(n) + phi);
}

}  // namespace

Profile parse_profile(const std::string& s)
{
    if (s == "tdl-e")
        return Profile::tdl_e;
    if (s == "rayleigh-uniform")
        return Profile::rayleigh_uniform;
    throw InvalidConfig("unknown channel profile: " + s);
}

std::string to_string(Profile p) { return p == Profile::tdl_e ? "tdl-e" : "rayleigh-uniform"; }

double ChannelConfig::max_doppler_hz() const { return speed_kmh / 3.6 * carrier_hz / kSpeedOfLight; }

double ChannelConfig::effective_delay_spread_s() const
{
    if (delay_spread_s > 0.0)
        return delay_spread_s;
    const double dmax = tdl_e_table().back().delay_norm;
    return static_cast<double>(L - 1) / (dmax * sample_rate_hz());
}

void ChannelConfig::validate() const
{
    if (L < 1)
        throw InvalidConfig("channel: L must be at least 1");
    if (speed_kmh < 0.0)
        throw InvalidConfig("channel: speed must be non-negative");
    if (!(carrier_hz > 0.0) || !(subcarrier_hz > 0.0) || fft_size == 0)
        throw InvalidConfig("channel: frequencies must be positive");
    if (sinusoid_count == 0)
        throw InvalidConfig("channel: sinusoid_count must be positive");
    if (profile == Profile::tdl_e && delay_spread_s < 0.0)
        throw InvalidConfig("channel: delay spread must be non-negative");
}

const std::vector<TdlTap>& tdl_e_table()
{
    static const std::vector<TdlTap> table = {
        {0.0000, -22.03, -0.03}, {0.5133, -15.8, {}}, {0.5440, -18.1, {}}, {0.5630, -19.8, {}},
        {0.5440, -22.9, {}},     {0.7112, -22.4, {}}, {1.9092, -18.6, {}}, {1.9293, -20.8, {}},
        {1.9589, -22.6, {}},     {2.6426, -22.3, {}}, {3.7136, -25.6, {}}, {5.4524, -20.2, {}},
        {12.0034, -29.8, {}},    {20.6519, -29.2, {}},
    };
    return table;
}

NoiseSpec NoiseSpec::from_snr_db(double snr_db)
{
    NoiseSpec n;
    n.snr_db = snr_db;
    n.variance = std::pow(10.0, -snr_db / 10.0);
    return n;
}

std::vector<std::size_t> tdl_e_delay_bins(const ChannelConfig& cfg)
{
    const double scale = cfg.effective_delay_spread_s() * cfg.sample_rate_hz();
    std::vector<std::size_t> bins;
    for (auto& t : tdl_e_table()) {
        const double b = std::round(t.delay_norm * scale);
        if (b > static_cast<double>(cfg.L - 1))
            throw InvalidConfig("channel: delay spread maps beyond L-1 samples");
        bins.push_back(static_cast<std::size_t>(b));
    }
    return bins;
}

ChannelTaps generate_channel(const ChannelConfig& cfg, std::size_t frame_len, std::uint64_t seed)
{
    cfg.validate();
    if (frame_len < 1)
        throw InvalidInput("generate_channel: frame_len must be positive");

    ChannelTaps h(frame_len, cfg.L);
    h.max_doppler_hz = cfg.max_doppler_hz();
    const double fs = cfg.sample_rate_hz();
    const double fd = h.max_doppler_hz;
    Rng rng(seed);

    if (cfg.profile == Profile::rayleigh_uniform) {
        const double p = 1.0 / static_cast<double>(cfg.L);
        for (std::size_t l = 0; l < cfg.L; ++l) {
            add_jakes(h.column(l), frame_len, p, fd, fs, cfg.sinusoid_count, rng);
            h.tap_power[l] = p;
        }
        return h;
    }

    const auto& table = tdl_e_table();
    const auto bins = tdl_e_delay_bins(cfg);
    double total = 0.0;
    for (auto& t : table)
        total += std::pow(10.0, t.scattered_db / 10.0) + (t.los_db ? std::pow(10.0, *t.los_db / 10.0) : 0.0);

    for (std::size_t k = 0; k < table.size(); ++k) {
        const auto& t = table[k];
        const double ps = std::pow(10.0, t.scattered_db / 10.0) / total;
        add_jakes(h.column(bins[k]), frame_len, ps, fd, fs, cfg.sinusoid_count, rng);
        h.tap_power[bins[k]] += ps;
        if (t.los_db) {
            const double pl = std::pow(10.0, *t.los_db / 10.0) / total;
            add_los(h.column(bins[k]), frame_len, pl, fd, fs, rng);
            h.tap_power[bins[k]] += pl;
        }
    }
    return h;
}

CVec apply_channel_noiseless(const ChannelTaps& taps, const CVec& x_T)
{
    const std::size_t MN = taps.MN;
    if (x_T.size() != MN)
        throw InvalidInput("apply_channel: frame length mismatch");
    CVec y(MN, cplx{0.0, 0.0});
    for (std::size_t l = 0; l < taps.L; ++l) {
        const cplx* h = taps.column(l);
        for (std::size_t n = 0; n < MN; ++n)
            y[n] += h[n] * x_T[(n + MN - l % MN) % MN];
    }
    return y;
}

CVec apply_channel(const ChannelTaps& taps, const CVec& x_T, const NoiseSpec& noise, std::uint64_t seed)
{
    CVec y = apply_channel_noiseless(taps, x_T);
    if (noise.variance > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> g(0.0, std::sqrt(noise.variance / 2.0));
        for (auto& v : y) {
            const double re = g(rng);
            const double im = g(rng);
            v += cplx{re, im};
        }
    }
    return y;
}

Eigen::MatrixXcd build_channel_matrix(const ChannelTaps& taps)
{
    const std::size_t MN = taps.MN;
    if (MN > kOracleMaxDim)
        throw InvalidInput("build_channel_matrix: frame exceeds oracle guard bound");
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(MN, MN);
    for (std::size_t n = 0; n < MN; ++n)
        for (std::size_t l = 0; l < taps.L; ++l)
            H(n, (n + MN - l % MN) % MN) += taps(n, l);
    return H;
}

double channel_mse(const ChannelTaps& truth, const ChannelTaps& estimate)
{
    if (truth.MN != estimate.MN || truth.L != estimate.L)
        throw InvalidInput("channel_mse: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.taps.size(); ++i)
        s += std::norm(truth.taps[i] - estimate.taps[i]);
    return s / static_cast<double>(truth.MN * truth.L);
}

void write_csv(std::ostream& os, const ChannelTaps& taps)
{
    os << "n,l,re,im\n";
    os.precision(17);
    for (std::size_t n = 0; n < taps.MN; ++n)
        for (std::size_t l = 0; l < taps.L; ++l)
            os << n << ',' << l << ',' << taps(n, l).real() << ',' << taps(n, l).imag() << '\n';
}

}  // namespace otfs::channel
