#pragma once

#include "otfs/types.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>

namespace otfs::channel {

enum class Profile { tdl_e, rayleigh_uniform };

Profile parse_profile(const std::string& s);
std::string to_string(Profile p);

struct ChannelConfig {
    Profile profile = Profile::tdl_e;
    double speed_kmh = 125.0;
    double carrier_hz = 4e9;
    double subcarrier_hz = 15e3;
    std::size_t fft_size = 128;  // M; the sample rate is fft_size * subcarrier_hz
    std::size_t L = 14;
    double delay_spread_s = 0.0;  // tdl-e only; 0 maps the largest delay to sample L-1
    std::size_t sinusoid_count = 32;
    std::uint64_t seed = 1;

    double sample_rate_hz() const { return static_cast<double>(fft_size) * subcarrier_hz; }
    double max_doppler_hz() const;
    double effective_delay_spread_s() const;
    void validate() const;
};

// One row of the 3GPP TR 38.901 TDL-E table. Tap 1 carries a specular
// component at los_db alongside its scattered part.
struct TdlTap {
    double delay_norm;
    double scattered_db;
    std::optional<double> los_db;
};

const std::vector<TdlTap>& tdl_e_table();

// h(n, l) stored column-major: taps[n + l*MN].
struct ChannelTaps {
    std::size_t MN = 0;
    std::size_t L = 0;
    CVec taps;
    double max_doppler_hz = 0.0;
    RVec tap_power;  // average power per delay bin

    ChannelTaps() = default;
    ChannelTaps(std::size_t mn, std::size_t l) : MN(mn), L(l), taps(mn * l), tap_power(l, 0.0) {}

    cplx& operator()(std::size_t n, std::size_t l) { return taps[n + l * MN]; }
    const cplx& operator()(std::size_t n, std::size_t l) const { return taps[n + l * MN]; }
    const cplx* column(std::size_t l) const { return taps.data() + l * MN; }
    cplx* column(std::size_t l) { return taps.data() + l * MN; }
};

struct NoiseSpec {
    double variance = 0.1;
    double snr_db = 10.0;

    static NoiseSpec from_snr_db(double snr_db);
};

// Delay bin of every TDL-E row after rounding to the sample grid.
std::vector<std::size_t> tdl_e_delay_bins(const ChannelConfig& cfg);

ChannelTaps generate_channel(const ChannelConfig& cfg, std::size_t frame_len, std::uint64_t seed);

CVec apply_channel(const ChannelTaps& taps, const CVec& x_T, const NoiseSpec& noise, std::uint64_t seed);
CVec apply_channel_noiseless(const ChannelTaps& taps, const CVec& x_T);

Eigen::MatrixXcd build_channel_matrix(const ChannelTaps& taps);

double channel_mse(const ChannelTaps& truth, const ChannelTaps& estimate);

void write_csv(std::ostream& os, const ChannelTaps& taps);

}  // namespace otfs::channel
