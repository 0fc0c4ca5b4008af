#include "otfs/channel.hpp"
#include "otfs/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace otfs;
using namespace otfs::channel;

namespace {

CVec random_cvec(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CVec v(n);
    for (auto& x : v)
        x = {g(rng), g(rng)};
    return v;
}

ChannelConfig small_cfg(std::size_t M, std::size_t L, Profile p = Profile::rayleigh_uniform)
{
    ChannelConfig c;
    c.profile = p;
    c.fft_size = M;
    c.L = L;
    return c;
}

}  // namespace

TEST_CASE("max Doppler from speed and carrier")
{
    ChannelConfig c;
    c.speed_kmh = 500.0;
    c.carrier_hz = 4e9;
    const double v = 500.0 / 3.6;
    CHECK(std::abs(c.max_doppler_hz() - v * 4e9 / 3e8) < 1e-9);
    CHECK(std::abs(c.max_doppler_hz() - 1851.85) < 0.01);
    auto h = generate_channel(c, 2048, 1);
    CHECK(h.max_doppler_hz == doctest::Approx(c.max_doppler_hz()));
}

TEST_CASE("TDL-E table has 14 taps with a Rician first tap")
{
    const auto& t = tdl_e_table();
    CHECK(t.size() == 14);
    REQUIRE(t[0].los_db.has_value());
    CHECK(*t[0].los_db - t[0].scattered_db == doctest::Approx(22.0));
    for (std::size_t k = 1; k < t.size(); ++k)
        CHECK_FALSE(t[k].los_db.has_value());
    CHECK(t.back().delay_norm == doctest::Approx(20.6519));
}

TEST_CASE("TDL-E delay quantisation and merging")
{
    ChannelConfig c;  // M = 128, L = 14, auto delay spread
    auto bins = tdl_e_delay_bins(c);
    CHECK(bins.back() == 13);
    std::set<std::size_t> uniq(bins.begin(), bins.end());
    CHECK(uniq == std::set<std::size_t>{0, 1, 2, 3, 8, 13});
    CHECK(c.effective_delay_spread_s() == doctest::Approx(13.0 / (20.6519 * 1.92e6)));

    auto h = generate_channel(c, 2048, 4);
    double total = 0.0;
    for (std::size_t l = 0; l < h.L; ++l) {
        total += h.tap_power[l];
        CHECK((h.tap_power[l] > 0.0) == (uniq.count(l) == 1));
    }
    CHECK(std::abs(total - 1.0) < 1e-6);

    ChannelConfig bad = c;
    bad.delay_spread_s = 2.0 * c.effective_delay_spread_s();
    CHECK_THROWS_AS(generate_channel(bad, 2048, 1), InvalidConfig);
}

TEST_CASE("static Rayleigh tap is constant in time and Rayleigh across seeds")
{
    auto c = small_cfg(8, 1);
    c.speed_kmh = 0.0;
    double p = 0.0;
    const int seeds = 2000;
    for (int s = 0; s < seeds; ++s) {
        auto h = generate_channel(c, 64, static_cast<std::uint64_t>(s));
        for (std::size_t n = 1; n < 64; ++n)
            CHECK(std::abs(h(n, 0) - h(0, 0)) < 1e-12);
        p += std::norm(h(0, 0));
    }
    CHECK(std::abs(p / seeds - 1.0) < 0.08);
}

TEST_CASE("Jakes autocorrelation follows J0")
{
    auto c = small_cfg(128, 1);
    c.speed_kmh = 500.0;
    const double fd = c.max_doppler_hz();
    const double fs = c.sample_rate_hz();
    const std::size_t len = 2048;
    const int seeds = 200;
    for (std::size_t lag : {0, 100, 200, 400, 500}) {
        const double fdt = fd * static_cast<double>(lag) / fs;
        if (fdt > 0.5)
            continue;
        cplx acc = 0.0;
        std::size_t cnt = 0;
        for (int s = 0; s < seeds; ++s) {
            auto h = generate_channel(c, len, static_cast<std::uint64_t>(1000 + s));
            for (std::size_t n = 0; n + lag < len; n += 16) {
                acc += h(n + lag, 0) * std::conj(h(n, 0));
                ++cnt;
            }
        }
        const double r = (acc / static_cast<double>(cnt)).real();
        const double j0 = std::cyl_bessel_j(0.0, 2.0 * M_PI * fdt);
        CHECK(std::abs(r - j0) < 0.1);
    }
}

TEST_CASE("generation is deterministic in the seed")
{
    ChannelConfig c;
    auto a = generate_channel(c, 2048, 77);
    auto b = generate_channel(c, 2048, 77);
    auto d = generate_channel(c, 2048, 78);
    CHECK(a.taps == b.taps);
    CHECK(a.taps != d.taps);
}

TEST_CASE("apply_channel")
{
    SUBCASE("identity channel")
    {
        ChannelTaps h(32, 1);
        for (std::size_t n = 0; n < 32; ++n)
            h(n, 0) = 1.0;
        auto x = random_cvec(32, 1);
        auto y = apply_channel(h, x, {0.0, 300.0}, 5);
        CHECK(y == x);
    }
    SUBCASE("matches the dense channel matrix")
    {
        auto c = small_cfg(8, 3);
        c.speed_kmh = 500.0;
        auto h = generate_channel(c, 32, 9);
        auto x = random_cvec(32, 2);
        auto y = apply_channel_noiseless(h, x);
        Eigen::VectorXcd ref = build_channel_matrix(h) * Eigen::Map<const Eigen::VectorXcd>(x.data(), 32);
        double err = 0.0;
        for (std::size_t i = 0; i < 32; ++i)
            err = std::max(err, std::abs(y[i] - ref(static_cast<Eigen::Index>(i))));
        CHECK(err < 1e-10);
    }
    SUBCASE("pure noise variance")
    {
        ChannelTaps h(2048, 1);
        auto y = apply_channel(h, CVec(2048), NoiseSpec{0.1, 10.0}, 3);
        double p = 0.0;
        for (auto& v : y)
            p += std::norm(v);
        CHECK(std::abs(p / 2048.0 - 0.1) < 0.005);
    }
    SUBCASE("length mismatch")
    {
        ChannelTaps h(8, 1);
        CHECK_THROWS_AS(apply_channel_noiseless(h, CVec(7)), InvalidInput);
    }
}

TEST_CASE("channel matrix structure")
{
    ChannelTaps d(6, 1);
    for (std::size_t n = 0; n < 6; ++n)
        d(n, 0) = cplx(double(n) + 1.0, 0.5);
    auto H1 = build_channel_matrix(d);
    CHECK((H1 - Eigen::MatrixXcd(H1.diagonal().asDiagonal())).norm() == 0.0);

    ChannelTaps h(4, 2);
    for (auto& v : h.taps)
        v = 1.0;
    auto H = build_channel_matrix(h);
    Eigen::MatrixXcd E = Eigen::MatrixXcd::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
        E(i, i) = 1.0;
        E(i, (i + 3) % 4) = 1.0;
    }
    CHECK((H - E).norm() == 0.0);
    CHECK(H(0, 3) == cplx(1.0));

    ChannelTaps big(4097, 1);
    CHECK_THROWS_AS(build_channel_matrix(big), InvalidInput);
}

TEST_CASE("channel_mse")
{
    ChannelConfig c;
    auto h = generate_channel(c, 2048, 12);
    CHECK(channel_mse(h, h) == 0.0);

    ChannelTaps zero(h.MN, h.L);
    double direct = 0.0;
    for (auto& v : h.taps)
        direct += std::norm(v);
    direct /= static_cast<double>(h.MN * h.L);
    CHECK(channel_mse(h, zero) == doctest::Approx(direct));

    double avg = 0.0;
    for (int s = 0; s < 50; ++s)
        avg += channel_mse(generate_channel(c, 2048, 500 + s), zero);
    CHECK(std::abs(avg / 50.0 - 1.0 / 14.0) < 0.2 / 14.0);

    auto off = h;
    for (auto& v : off.taps)
        v += 0.01;
    CHECK(channel_mse(h, off) == doctest::Approx(1e-4));

    CHECK_THROWS_AS(channel_mse(h, ChannelTaps(2048, 3)), InvalidInput);
}

TEST_CASE("noise from SNR and CSV export")
{
    CHECK(NoiseSpec::from_snr_db(10.0).variance == doctest::Approx(0.1));
    ChannelTaps h(2, 2);
    h(1, 1) = cplx(0.5, -0.25);
    std::ostringstream os;
    write_csv(os, h);
    CHECK(os.str().rfind("n,l,re,im\n", 0) == 0);
    CHECK(os.str().find("1,1,0.5,-0.25") != std::string::npos);
}

TEST_CASE("config validation and profile names")
{
    CHECK(parse_profile("tdl-e") == Profile::tdl_e);
    CHECK(to_string(Profile::rayleigh_uniform) == "rayleigh-uniform");
    CHECK_THROWS_AS(parse_profile("tdl-x"), InvalidConfig);
    ChannelConfig c;
    c.L = 0;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
    c = {};
    c.speed_kmh = -1.0;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
    c = {};
    c.carrier_hz = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidConfig);
}
