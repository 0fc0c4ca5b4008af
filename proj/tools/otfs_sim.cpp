#include "otfs/bem.hpp"
#include "otfs/channel.hpp"
#include "otfs/harness.hpp"
#include "otfs/pilots.hpp"
#include "otfs/rng.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace otfs;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out;
    std::optional<std::size_t> threads;
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config, "JSON config file (fields mirror SimConfig)");
    sub->add_option("--seed", c.seed, "root seed");
    sub->add_option("--trials", c.trials, "Monte-Carlo trials per point");
    sub->add_option("--out", c.out, "output path (stdout when empty)");
    sub->add_option("--threads", c.threads, "worker threads (0 = all cores)");
}

harness::SimConfig resolve(const Common& c)
{
    harness::SimConfig cfg = c.config.empty() ? harness::SimConfig{} : harness::load_config(c.config);
    if (c.seed)
        cfg.seed = *c.seed;
    if (c.trials)
        cfg.N_MC = *c.trials;
    if (!c.out.empty())
        cfg.out = c.out;
    if (c.threads)
        cfg.threads = *c.threads;
    cfg.channel.fft_size = cfg.modem.M;
    cfg.validate();
    return cfg;
}

// Runs `body` against the configured output file or stdout.
template <typename F>
void with_output(const std::string& path, F&& body)
{
    if (path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open output file: " + path);
    body(f);
}

void cmd_sweep(const Common& c, harness::SweepMode mode, const std::string& diag_path)
{
    auto cfg = resolve(c);
    auto rows = harness::sweep(cfg, mode);
    with_output(cfg.out, [&](std::ostream& os) { harness::write_csv(os, rows); });
    std::size_t failed = 0;
    for (auto& r : rows)
        failed = std::max(failed, r.failed);
    if (failed)
        std::cerr << "warning: " << failed << " trial(s) diverged and were excluded\n";

    if (!diag_path.empty()) {
        // diagnostics of trial 0 at the first point and SNR
        const auto pt = harness::expand_points(cfg).front();
        const auto t = harness::make_trial(cfg, pt, cfg.snr_db.front(), harness::trial_seeds(cfg.seed, 0, 0));
        auto out = receiver::run(t.y_T, t.pilots, t.receiver, {&t.taps, &t.bits}, cfg.modem.constellation);
        with_output(diag_path, [&](std::ostream& os) { receiver::write_diagnostics_csv(os, out.diagnostics); });
    }
}

void cmd_pilot_design(const Common& c)
{
    auto cfg = resolve(c);
    const auto scheme = cfg.schemes.front();
    const std::size_t M = cfg.modem.M, N = cfg.modem.N;
    const auto ps = scheme == pilots::Scheme::sp_dd
                        ? pilots::random_dd_pilots(M, N, cfg.seed, cfg.rho_F.front())
                        : pilots::designed_pilots(M, N, cfg.beta.front(), cfg.seed, cfg.rho_F.front(),
                                                  cfg.channel.L, cfg.pilot_base);
    with_output(cfg.out, [&](std::ostream& os) {
        os.precision(17);
        os << "index,domain,re,im\n";
        auto dump = [&](const CVec& v, const char* dom) {
            for (std::size_t i = 0; i < v.size(); ++i)
                os << i << ',' << dom << ',' << v[i].real() << ',' << v[i].imag() << '\n';
        };
        dump(ps.x_p_dd, "dd");
        dump(ps.x_p2, "time");
        dump(ps.x_p3, "freq");
        os << "# scheme=" << pilots::to_string(ps.scheme) << ",beta=" << ps.beta << ",P=" << ps.P
           << ",rho=" << ps.rho << ",rho_F=" << ps.rho_F << '\n';
    });
}

void cmd_bem_fit(const Common& c, const std::vector<std::size_t>& orders)
{
    auto cfg = resolve(c);
    const std::size_t trials = c.trials ? *c.trials : 20;
    const std::size_t MN = cfg.modem.MN();
    const unsigned K = cfg.receiver.K_os;
    RVec acc(orders.size(), 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto taps = channel::generate_channel(cfg.channel, MN, derive_seed(cfg.seed, {t}));
        for (std::size_t k = 0; k < orders.size(); ++k)
            acc[k] += bem::fit_residual_mse(taps, bem::gce_basis(MN, orders[k], K));
    }
    with_output(cfg.out, [&](std::ostream& os) {
        os.precision(8);
        os << "Q,K_os,residual_mse\n";
        for (std::size_t k = 0; k < orders.size(); ++k)
            os << orders[k] << ',' << K << ',' << acc[k] / static_cast<double>(trials) << '\n';
    });
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OTFS superimposed-pilot receiver simulator"};
    app.require_subcommand(1);

    Common simc, sweepc, pilotc, bemc;
    std::string diag;
    std::vector<std::size_t> orders = {1, 3, 5, 7, 9};

    auto* sim = app.add_subcommand("simulate", "per-iteration BER/MSE convergence CSV");
    add_common(sim, simc);
    sim->add_option("--diagnostics", diag, "write receiver diagnostics of trial 0 to this CSV");

    auto* ber = app.add_subcommand("ber-sweep", "final-iteration BER/MSE for every SNR");
    add_common(ber, sweepc);

    auto* pil = app.add_subcommand("pilot-design", "pilot sequences in the dd, time and freq domains");
    add_common(pil, pilotc);

    auto* fit = app.add_subcommand("bem-fit", "LS residual of the GCE-BEM fit versus Q");
    add_common(fit, bemc);
    fit->add_option("--q", orders, "BEM orders (odd)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim)
            cmd_sweep(simc, harness::SweepMode::convergence, diag);
        else if (*ber)
            cmd_sweep(sweepc, harness::SweepMode::final, "");
        else if (*pil)
            cmd_pilot_design(pilotc);
        else if (*fit)
            cmd_bem_fit(bemc, orders);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
