#include "otfs/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace otfs;
using namespace otfs::harness;

namespace {

SimConfig tiny()
{
    SimConfig c;
    c.modem.M = 8;
    c.modem.N = 4;
    c.channel.profile = channel::Profile::rayleigh_uniform;
    c.channel.L = 3;
    c.receiver.Q_initial = 3;
    c.receiver.Q_main = 3;
    c.receiver.max_iters = 4;
    c.schemes = {pilots::Scheme::sp_dd, pilots::Scheme::sp_dd_d};
    c.beta = {2, 4};
    c.rho_F = {0.2};
    c.snr_db = {5.0, 15.0};
    c.N_MC = 3;
    c.seed = 42;
    return c;
}

}  // namespace

TEST_CASE("points expand with sp-dd fixed at beta 1")
{
    auto pts = expand_points(tiny());
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].scheme == pilots::Scheme::sp_dd);
    CHECK(pts[0].beta == 1);
    CHECK(pts[1].beta == 2);
    CHECK(pts[2].beta == 4);
}

TEST_CASE("trial seeds are distinct and reproducible")
{
    auto a = trial_seeds(1, 0, 0);
    auto b = trial_seeds(1, 0, 1);
    auto c = trial_seeds(1, 1, 0);
    CHECK(a.channel != b.channel);
    CHECK(a.channel != c.channel);
    CHECK(a.bits != a.noise);
    CHECK(trial_seeds(1, 0, 0).noise == a.noise);
}

TEST_CASE("sweep is deterministic and row counts follow the mode")
{
    auto cfg = tiny();
    cfg.threads = 2;
    auto r1 = sweep(cfg, SweepMode::convergence);
    cfg.threads = 1;
    auto r2 = sweep(cfg, SweepMode::convergence);
    REQUIRE(r1.size() == 2 * 3 * 4);
    REQUIRE(r2.size() == r1.size());
    for (std::size_t i = 0; i < r1.size(); ++i) {
        CHECK(r1[i].ber == r2[i].ber);
        CHECK(r1[i].mse == r2[i].mse);
        CHECK(r1[i].trials == 3);
    }
    CHECK(r1[3].iteration == 4);

    auto fin = sweep(cfg, SweepMode::final);
    REQUIRE(fin.size() == 6);
    CHECK(fin[0].ber == r1[3].ber);
    CHECK(fin[0].iteration == 4);
}

TEST_CASE("aggregate means and standard errors")
{
    std::vector<TrialResult> t(4);
    const double v[4] = {0.0, 0.1, 0.2, 0.3};
    for (int i = 0; i < 4; ++i) {
        t[i].ber = {v[i]};
        t[i].mse = {2.0 * v[i]};
        t[i].wallclock_s = 1.0;
    }
    TrialResult bad;
    bad.failed = true;
    t.push_back(bad);
    auto rows = aggregate(t, {pilots::Scheme::sp_dd_d, 8, 0.1}, 10.0, SweepMode::final);
    REQUIRE(rows.size() == 1);
    const auto& r = rows[0];
    CHECK(r.trials == 4);
    CHECK(r.failed == 1);
    CHECK(r.ber == doctest::Approx(0.15));
    // sample sd of {0,.1,.2,.3} is sqrt(1/60)
    CHECK(r.ber_stderr == doctest::Approx(std::sqrt(1.0 / 60.0) / 2.0));
    CHECK(r.mse_stderr == doctest::Approx(std::sqrt(1.0 / 15.0) / 2.0));
    CHECK(r.wallclock_s == doctest::Approx(0.8));
}

TEST_CASE("standard error shrinks with the number of trials")
{
    auto cfg = tiny();
    cfg.schemes = {pilots::Scheme::sp_dd};
    cfg.snr_db = {0.0};
    cfg.threads = 1;
    cfg.N_MC = 8;
    auto few = sweep(cfg, SweepMode::final);
    cfg.N_MC = 32;
    auto many = sweep(cfg, SweepMode::final);
    CHECK(many[0].mse_stderr < few[0].mse_stderr);
}

TEST_CASE("known channel at high SNR decodes without errors")
{
    SimConfig cfg;
    cfg.snr_db = {60.0};
    cfg.known_channel = true;
    cfg.receiver.max_iters = 20;
    cfg.N_MC = 3;
    cfg.threads = 1;
    auto rows = sweep(cfg, SweepMode::final);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].ber == 0.0);
    CHECK(rows[0].trials == 3);
}

TEST_CASE("CSV header and rows")
{
    ResultRow r;
    r.snr_db = 10;
    r.scheme = "sp-dd-d";
    r.beta = 8;
    r.rho_F = 0.1;
    r.iteration = 70;
    r.trials = 300;
    std::ostringstream os;
    write_csv(os, {r});
    std::istringstream is(os.str());
    std::string header, line;
    std::getline(is, header);
    std::getline(is, line);
    CHECK(header == "snr_db,scheme,beta,rho_F,iteration,ber,ber_stderr,mse,mse_stderr,trials,wallclock_s");
    CHECK(line.rfind("10,sp-dd-d,8,0.1,70,", 0) == 0);
}

TEST_CASE("config parsing")
{
    auto c = parse_config(R"({
        "modem": {"M": 64, "N": 8},
        "channel": {"profile": "tdl-e", "speed_kmh": 500, "L": 10},
        "schemes": ["sp-dd", "sp-dd-d"],
        "beta": [1, 8],
        "rho_F": 0.1,
        "receiver": {"Q_main": 7, "eta": 0.3, "first_damping": "bypass"},
        "snr_db": [0, 5, 10],
        "N_MC": 12,
        "seed": 9
    })");
    CHECK(c.modem.M == 64);
    CHECK(c.receiver.M == 64);
    CHECK(c.receiver.N == 8);
    CHECK(c.receiver.L == 10);
    CHECK(c.channel.speed_kmh == 500.0);
    CHECK(c.schemes.size() == 2);
    CHECK(c.rho_F == std::vector<double>{0.1});
    CHECK(c.receiver.Q_main == 7);
    CHECK(c.receiver.first_damping == receiver::FirstDamping::bypass);
    CHECK(c.snr_db.size() == 3);
    CHECK(c.N_MC == 12);
    CHECK(c.seed == 9);

    auto round = parse_config(dump_config(c));
    CHECK(round.receiver.eta == doctest::Approx(0.3));
    CHECK(round.beta == c.beta);

    CHECK_THROWS_AS(parse_config(R"({"modem": {"M": 8, "Nn": 4}})"), InvalidConfig);
    CHECK_THROWS_AS(parse_config(R"({"snr": [1]})"), InvalidConfig);
    CHECK_THROWS_AS(parse_config("{not json"), InvalidConfig);
    CHECK_THROWS_AS(parse_config(R"({"schemes": ["ofdm"]})"), InvalidConfig);
}
