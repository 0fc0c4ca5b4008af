#include "otfs/harness.hpp"

#include "otfs/bem.hpp"
#include "otfs/rng.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <thread>

namespace otfs::harness {

void SimConfig::validate() const
{
    modem.validate();
    channel.validate();
    if (N_MC < 1)
        throw InvalidConfig("N_MC must be at least 1");
    if (snr_db.empty())
        throw InvalidConfig("snr_db list must not be empty");
    if (schemes.empty() || beta.empty() || rho_F.empty())
        throw InvalidConfig("schemes, beta and rho_F lists must not be empty");
}

TrialSeeds trial_seeds(std::uint64_t root, std::size_t snr_index, std::size_t trial)
{
    return {derive_seed(root, {snr_index, trial, 0}), derive_seed(root, {snr_index, trial, 1}),
            derive_seed(root, {snr_index, trial, 2}), derive_seed(root, {snr_index, trial, 3})};
}

std::vector<Point> expand_points(const SimConfig& cfg)
{
    std::vector<Point> pts;
    for (auto sc : cfg.schemes) {
        for (double rf : cfg.rho_F) {
            if (sc == pilots::Scheme::sp_dd) {
                pts.push_back({sc, 1, rf});
                continue;
            }
            for (auto b : cfg.beta)
                pts.push_back({sc, b, rf});
        }
    }
    return pts;
}

TrialSetup make_trial(const SimConfig& cfg, const Point& point, double snr_db, const TrialSeeds& seeds)
{
    TrialSetup t;
    const std::size_t M = cfg.modem.M;
    const std::size_t N = cfg.modem.N;
    const std::size_t MN = M * N;

    Rng brng(seeds.bits);
    std::uniform_int_distribution<int> coin(0, 1);
    t.bits.resize(MN * cfg.modem.K);
    for (auto& b : t.bits)
        b = static_cast<std::uint8_t>(coin(brng));
    const CVec x_d = modem::map_bits(t.bits, cfg.modem);

    channel::ChannelConfig cc = cfg.channel;
    cc.fft_size = M;
    t.pilots = point.scheme == pilots::Scheme::sp_dd
                   ? pilots::random_dd_pilots(M, N, seeds.pilots, point.rho_F)
                   : pilots::designed_pilots(M, N, point.beta, seeds.pilots, point.rho_F, cc.L, cfg.pilot_base);

    const CVec x_T = modem::dd_to_time(modem::superimpose(x_d, t.pilots.x_p_dd, t.pilots.rho), M, N);
    t.taps = channel::generate_channel(cc, MN, seeds.channel);
    const auto noise = channel::NoiseSpec::from_snr_db(snr_db);
    t.y_T = channel::apply_channel(t.taps, x_T, noise, seeds.noise);

    auto& rc = t.receiver;
    rc = cfg.receiver;
    rc.M = M;
    rc.N = N;
    rc.L = cc.L;
    rc.noise_var = noise.variance;
    rc.rho = t.pilots.rho;
    rc.beta = t.pilots.beta;
    rc.scheme = t.pilots.scheme;
    return t;
}

TrialResult run_trial(const SimConfig& cfg, const Point& point, double snr_db, const TrialSeeds& seeds)
{
    const auto t0 = std::chrono::steady_clock::now();
    TrialResult res;
    const TrialSetup t = make_trial(cfg, point, snr_db, seeds);
    receiver::Truth truth{&t.taps, &t.bits};

    try {
        receiver::ReceiverOutput out;
        if (cfg.known_channel) {
            auto rc = t.receiver;
            rc.Q_initial = rc.Q_main;
            auto st = receiver::init_state(rc, t.y_T, t.pilots.x_p_dd, cfg.modem.constellation);
            const auto coeffs = bem::ls_fit(t.taps, st.basis);
            std::vector<CVec> c;
            for (std::size_t q = 0; q < st.Q; ++q)
                c.push_back(bem::to_paper_scale(coeffs, q, st.MN));
            receiver::inject_known_coeffs(st, c);
            out = receiver::run_from(st, truth);
        } else {
            out = receiver::run(t.y_T, t.pilots, t.receiver, truth, cfg.modem.constellation);
        }
        res.ber = out.diagnostics.ber;
        res.mse = out.diagnostics.mse;
    } catch (const receiver::DivergenceError& e) {
        res.failed = true;
        res.error = e.what();
    }
    res.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

std::vector<TrialResult> run_trials(const SimConfig& cfg, const Point& point, std::size_t snr_index,
                                    std::size_t trials)
{
    std::vector<TrialResult> results(trials);
    std::atomic<std::size_t> next{0};
    const double snr = cfg.snr_db.at(snr_index);
    auto worker = [&]() {
        for (std::size_t t = next++; t < trials; t = next++)
            results[t] = run_trial(cfg, point, snr, trial_seeds(cfg.seed, snr_index, t));
    };
    std::size_t nt = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    nt = std::min(nt, trials);
    if (nt <= 1) {
        worker();
        return results;
    }
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nt; ++i)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();
    return results;
}

std::vector<ResultRow> aggregate(const std::vector<TrialResult>& trials, const Point& point, double snr_db,
                                 SweepMode mode)
{
    std::size_t iters = 0;
    std::size_t ok = 0;
    double wall = 0.0;
    for (auto& t : trials) {
        wall += t.wallclock_s;
        if (t.failed)
            continue;
        ++ok;
        iters = std::max(iters, t.ber.size());
    }

    auto value_at = [](const RVec& v, std::size_t it) { return v.empty() ? 0.0 : v[std::min(it, v.size() - 1)]; };
    auto stats = [&](std::size_t it, bool ber) {
        double s = 0.0, s2 = 0.0;
        for (auto& t : trials) {
            if (t.failed)
                continue;
            const double x = value_at(ber ? t.ber : t.mse, it);
            s += x;
            s2 += x * x;
        }
        const double n = static_cast<double>(ok);
        const double mean = ok ? s / n : std::nan("");
        const double var = ok > 1 ? std::max(0.0, (s2 - n * mean * mean) / (n - 1.0)) : 0.0;
        return std::make_pair(mean, ok ? std::sqrt(var / n) : std::nan(""));
    };

    std::vector<ResultRow> rows;
    const std::size_t first = mode == SweepMode::final && iters > 0 ? iters - 1 : 0;
    for (std::size_t it = first; it < std::max<std::size_t>(iters, 1); ++it) {
        ResultRow r;
        r.snr_db = snr_db;
        r.scheme = pilots::to_string(point.scheme);
        r.beta = point.beta;
        r.rho_F = point.rho_F;
        r.iteration = it + 1;
        std::tie(r.ber, r.ber_stderr) = stats(it, true);
        std::tie(r.mse, r.mse_stderr) = stats(it, false);
        r.trials = ok;
        r.failed = trials.size() - ok;
        r.wallclock_s = trials.empty() ? 0.0 : wall / static_cast<double>(trials.size());
        rows.push_back(r);
    }
    return rows;
}

std::vector<ResultRow> sweep(const SimConfig& cfg, SweepMode mode)
{
    cfg.validate();
    std::vector<ResultRow> rows;
    for (std::size_t si = 0; si < cfg.snr_db.size(); ++si) {
        for (const auto& p : expand_points(cfg)) {
            auto trials = run_trials(cfg, p, si, cfg.N_MC);
            auto r = aggregate(trials, p, cfg.snr_db[si], mode);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }
    return rows;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows)
{
    os << "snr_db,scheme,beta,rho_F,iteration,ber,ber_stderr,mse,mse_stderr,trials,wallclock_s\n";
    os.precision(10);
    for (const auto& r : rows)
        os << r.snr_db << ',' << r.scheme << ',' << r.beta << ',' << r.rho_F << ',' << r.iteration << ',' << r.ber
           << ',' << r.ber_stderr << ',' << r.mse << ',' << r.mse_stderr << ',' << r.trials << ','
           << r.wallclock_s << '\n';
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    write_csv(f, rows);
    if (!f)
        throw std::runtime_error("write failed: " + path);
}

}  // namespace otfs::harness
