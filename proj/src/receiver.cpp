#include "otfs/receiver.hpp"

#include "otfs/fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace otfs::receiver {
namespace {

double mean_of(const RVec& v)
{
    double s = 0.0;
    for (double x : v)
        s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

bool all_finite(const CVec& v)
{
    for (auto& x : v)
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            return false;
    return true;
}

void check_finite(const ReceiverState& s)
{
    bool ok = all_finite(s.bwd_zT.mean) && all_finite(s.fwd_xd.mean) && std::isfinite(s.fwd_xd.var[0]);
    for (double p : s.beliefs.p)
        ok = ok && std::isfinite(p);
    if (!ok)
        throw DivergenceError("receiver: non-finite message at iteration " + std::to_string(s.iteration),
                              s.iteration);
}

}  // namespace

GaussMsg GaussMsg::scalar(std::size_t n, double v, Direction d)
{
    GaussMsg m;
    m.mean.assign(n, cplx{0.0, 0.0});
    m.var.assign(1, v);
    m.dir = d;
    return m;
}

GaussMsg GaussMsg::elementwise(std::size_t n, double v, Direction d)
{
    GaussMsg m;
    m.mean.assign(n, cplx{0.0, 0.0});
    m.var.assign(n, v);
    m.dir = d;
    return m;
}

double GaussMsg::mean_var() const { return mean_of(var); }

void ReceiverConfig::validate() const
{
    if (M < 2 || N < 2)
        throw InvalidConfig("receiver: M and N must be at least 2");
    if (L < 1 || L > M * N)
        throw InvalidConfig("receiver: L out of range");
    if (Q_initial % 2 == 0 || Q_main % 2 == 0)
        throw InvalidConfig("receiver: Q values must be odd");
    if (K_os < 1)
        throw InvalidConfig("receiver: K_os must be at least 1");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw InvalidConfig("receiver: eta must lie in [0,1]");
    if (max_iters < 1)
        throw InvalidConfig("receiver: max_iters must be at least 1");
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidConfig("receiver: rho must lie in (0,1)");
    if (beta < 1 || (M * N) % beta != 0)
        throw InvalidConfig("receiver: beta must divide MN");
    if (!(noise_var > 0.0))
        throw InvalidConfig("receiver: noise variance must be positive");
}

ReceiverState init_state(const ReceiverConfig& cfg, const CVec& y_T, const CVec& x_p_dd, const CVec& alphabet)
{
    cfg.validate();
    const std::size_t MN = cfg.MN();
    if (y_T.size() != MN || x_p_dd.size() != MN)
        throw InvalidInput("receiver: input length does not match M*N");

    ReceiverState s;
    s.cfg = cfg;
    s.MN = MN;
    s.alphabet = alphabet;
    s.y_T = y_T;
    s.x_p_dd = x_p_dd;
    s.beliefs = modem::SymbolBeliefs::uniform(MN, alphabet.size());
    s.fwd_xd = GaussMsg::scalar(MN, VAR_MAX, Direction::forward);
    s.bwd_xF = GaussMsg::scalar(MN, 1.0, Direction::backward);
    set_order(s, cfg.Q_initial);
    return s;
}

void set_order(ReceiverState& s, std::size_t Q)
{
    const std::size_t MN = s.MN;
    const std::size_t L = s.cfg.L;
    s.Q = Q;
    s.basis = bem::gce_basis(MN, Q, s.cfg.K_os);

    auto fill = [Q](std::vector<GaussMsg>& v, GaussMsg proto) { v.assign(Q, proto); };
    fill(s.fwd_zqT, GaussMsg::scalar(MN, s.cfg.noise_var, Direction::forward));
    fill(s.fwd_dqF, GaussMsg::scalar(MN, s.cfg.noise_var, Direction::forward));
    fill(s.bwd_xqF, GaussMsg::elementwise(MN, VAR_MAX, Direction::backward));
    fill(s.hat_xqF, GaussMsg::elementwise(MN, VAR_MAX, Direction::forward));
    fill(s.fwd_xqF, GaussMsg::elementwise(MN, VAR_MAX, Direction::forward));
    fill(s.bwd_cqF, GaussMsg::elementwise(MN, VAR_MAX, Direction::backward));
    fill(s.hat_cqF, GaussMsg::elementwise(MN, VAR_MAX, Direction::forward));
    fill(s.fwd_cqF, GaussMsg::scalar(MN, VAR_MAX, Direction::forward));
    fill(s.bwd_dqF, GaussMsg::elementwise(MN, VAR_MIN, Direction::backward));
    fill(s.bwd_zqT, GaussMsg::scalar(MN, VAR_MIN, Direction::backward));
    s.bwd_zT = GaussMsg::scalar(MN, VAR_MIN, Direction::backward);
    s.c_hat.assign(Q, CVec(L, cplx{0.0, 0.0}));
    s.var_c.assign(Q, VAR_MAX);
    s.damp_pre.clear();
    s.damp_ready = false;
    if (s.known_c && s.known_c->size() != Q)
        s.known_c.reset();
}

void inject_known_coeffs(ReceiverState& s, const std::vector<CVec>& c)
{
    if (c.size() != s.Q)
        throw InvalidInput("inject_known_coeffs: order mismatch");
    s.known_c = c;
    for (std::size_t q = 0; q < s.Q; ++q) {
        if (c[q].size() != s.cfg.L)
            throw InvalidInput("inject_known_coeffs: tap count mismatch");
        s.c_hat[q] = c[q];
        s.var_c[q] = VAR_MIN;
        CVec pad(s.MN, cplx{0.0, 0.0});
        std::copy(c[q].begin(), c[q].end(), pad.begin());
        s.fwd_cqF[q].mean = fft::dft(pad);
        s.fwd_cqF[q].var.assign(1, VAR_MIN);
    }
}

void part1_backward(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    const std::size_t A = s.alphabet.size();
    const double rho = s.cfg.rho;
    const double sp = std::sqrt(rho);
    const double sd = std::sqrt(1.0 - rho);

    CVec xdd(MN);
    double vsum = 0.0;
    for (std::size_t i = 0; i < MN; ++i) {
        cplx m1{0.0, 0.0};
        double e2 = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            const double p = s.beliefs.at(i, a);
            m1 += p * s.alphabet[a];
            e2 += p * std::norm(s.alphabet[a]);
        }
        double v1 = std::max(e2 - std::norm(m1), VAR_MIN);
        cplx bm = m1;
        double bv = v1;
        if (s.cfg.symbol_prior == SymbolPrior::extrinsic) {
            const double fv = s.fwd_xd.v(i);
            const double prec = 1.0 / v1 - 1.0 / fv;
            // a non-positive extrinsic precision keeps the projected belief
            if (prec > 1e-9) {
                bv = clamp_var(1.0 / prec);
                bm = bv * (m1 / v1 - s.fwd_xd.mean[i] / fv);
            }
        }
        xdd[i] = sp * s.x_p_dd[i] + sd * bm;
        vsum += (1.0 - rho) * bv;
    }
    CVec xt(MN);
    fft::idft_rows(xdd.data(), xt.data(), s.cfg.M, s.cfg.N);
    s.bwd_xF.mean.resize(MN);
    fft::dft(xt.data(), s.bwd_xF.mean.data(), MN);
    s.bwd_xF.var.assign(1, clamp_var(vsum / static_cast<double>(MN)));
    s.bwd_xF.dir = Direction::backward;
}

void part2_forward(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    for (std::size_t q = 0; q < s.Q; ++q) {
        auto& fz = s.fwd_zqT[q];
        const auto& bq = s.bwd_zqT[q];
        const cplx* b = s.basis.column(q);
        fz.mean.resize(MN);
        CVec d(MN);
        for (std::size_t n = 0; n < MN; ++n) {
            fz.mean[n] = s.y_T[n] - s.bwd_zT.mean[n] + bq.mean[n];
            d[n] = fz.mean[n] * std::conj(b[n]);
        }
        const double v = clamp_var(s.cfg.noise_var + s.bwd_zT.v(0) - bq.v(0));
        fz.var.assign(1, v);
        auto& fd = s.fwd_dqF[q];
        fd.mean.resize(MN);
        fft::dft(d.data(), fd.mean.data(), MN);
        fd.var.assign(1, v);
    }
}

bool comb_active(const ReceiverState& s)
{
    return s.iteration == 0 && s.cfg.comb_first_iter && s.cfg.scheme == pilots::Scheme::sp_dd_d &&
           s.cfg.beta > 1 && s.MN / s.cfg.beta > s.cfg.L;
}

void part4_data_round(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    const std::size_t Q = s.Q;
    const double bxv = s.bwd_xF.v(0);

    // (a) backward x_qF: backward x_F combined with the other branches' forward messages
    for (std::size_t q = 0; q < Q; ++q) {
        auto& out = s.bwd_xqF[q];
        out.mean.resize(MN);
        out.var.resize(MN);
        for (std::size_t i = 0; i < MN; ++i) {
            double prec = 1.0 / bxv;
            cplx pm = s.bwd_xF.mean[i] / bxv;
            for (std::size_t j = 0; j < Q; ++j) {
                if (j == q)
                    continue;
                const double pj = 1.0 / s.fwd_xqF[j].v(i);
                prec += pj;
                pm += s.fwd_xqF[j].mean[i] * pj;
            }
            const double v = clamp_var(1.0 / prec);
            out.var[i] = v;
            out.mean[i] = v * pm;
        }
    }

    // (b) posterior x_qF
    for (std::size_t q = 0; q < Q; ++q) {
        auto& h = s.hat_xqF[q];
        const auto& b = s.bwd_xqF[q];
        const auto& f = s.fwd_xqF[q];
        h.mean.resize(MN);
        h.var.resize(MN);
        for (std::size_t i = 0; i < MN; ++i) {
            const double v = clamp_var(1.0 / (1.0 / b.var[i] + 1.0 / f.v(i)));
            h.var[i] = v;
            h.mean[i] = v * (b.mean[i] / b.var[i] + f.mean[i] / f.v(i));
        }
    }

    // (c) backward c_qF by the mean-field rule at the product node
    const bool comb = comb_active(s);
    const std::size_t beta = s.cfg.beta;
    for (std::size_t q = 0; q < Q; ++q) {
        auto& c = s.bwd_cqF[q];
        const auto& d = s.fwd_dqF[q];
        const auto& x = s.hat_xqF[q];
        c.mean.resize(MN);
        c.var.resize(MN);
        for (std::size_t i = 0; i < MN; ++i) {
            const double den = std::norm(x.mean[i]) + x.var[i];
            c.mean[i] = d.mean[i] * std::conj(x.mean[i]) / den;
            c.var[i] = clamp_var(d.v(i) / den);
        }
        if (comb) {
            // estimate on the comb only, then interpolate through the first L delay taps
            const std::size_t P = MN / beta;
            CVec tones(P);
            double vs = 0.0;
            for (std::size_t p = 0; p < P; ++p) {
                tones[p] = c.mean[p * beta];
                vs += c.var[p * beta];
            }
            CVec g(P);
            fft::idft(tones.data(), g.data(), P);
            const double scale = std::sqrt(static_cast<double>(beta));
            CVec pad(MN, cplx{0.0, 0.0});
            for (std::size_t l = 0; l < s.cfg.L; ++l)
                pad[l] = g[l] * scale;
            fft::dft(pad.data(), c.mean.data(), MN);
            const double v = clamp_var(static_cast<double>(beta) * vs / static_cast<double>(P));
            std::fill(c.var.begin(), c.var.end(), v);
        }
    }

    // (d) posterior c_qF
    for (std::size_t q = 0; q < Q; ++q) {
        auto& h = s.hat_cqF[q];
        const auto& b = s.bwd_cqF[q];
        const auto& f = s.fwd_cqF[q];
        h.mean.resize(MN);
        h.var.resize(MN);
        for (std::size_t i = 0; i < MN; ++i) {
            const double v = clamp_var(1.0 / (1.0 / b.var[i] + 1.0 / f.v(i)));
            h.var[i] = v;
            h.mean[i] = v * (b.mean[i] / b.var[i] + f.mean[i] / f.v(i));
        }
    }

    // (e) forward x_qF by the mean-field rule
    for (std::size_t q = 0; q < Q; ++q) {
        auto& x = s.fwd_xqF[q];
        const auto& d = s.fwd_dqF[q];
        const auto& c = s.hat_cqF[q];
        x.mean.resize(MN);
        x.var.resize(MN);
        for (std::size_t i = 0; i < MN; ++i) {
            const double den = std::norm(c.mean[i]) + c.var[i];
            x.mean[i] = d.mean[i] * std::conj(c.mean[i]) / den;
            x.var[i] = clamp_var(d.v(i) / den);
        }
    }
}

void part3_coeff_update(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    const std::size_t L = s.cfg.L;
    for (std::size_t q = 0; q < s.Q; ++q) {
        if (s.known_c) {
            s.c_hat[q] = (*s.known_c)[q];
            s.var_c[q] = VAR_MIN;
        } else {
            CVec cL(MN);
            fft::idft(s.bwd_cqF[q].mean.data(), cL.data(), MN);
            s.c_hat[q].assign(cL.begin(), cL.begin() + static_cast<std::ptrdiff_t>(L));
            s.var_c[q] = clamp_var(mean_of(s.bwd_cqF[q].var));
        }
        CVec pad(MN, cplx{0.0, 0.0});
        std::copy(s.c_hat[q].begin(), s.c_hat[q].end(), pad.begin());
        auto& f = s.fwd_cqF[q];
        f.mean.resize(MN);
        fft::dft(pad.data(), f.mean.data(), MN);
        f.var.assign(1, clamp_var(static_cast<double>(L) / static_cast<double>(MN) * s.var_c[q]));
    }
}

void part4_product_backward(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    for (std::size_t q = 0; q < s.Q; ++q) {
        auto& d = s.bwd_dqF[q];
        const auto& c = s.fwd_cqF[q];
        const auto& x = s.bwd_xqF[q];
        const double vc = c.v(0);
        d.mean.resize(MN);
        d.var.resize(MN);
        for (std::size_t i = 0; i < MN; ++i) {
            d.mean[i] = c.mean[i] * x.mean[i];
            d.var[i] = clamp_var(x.var[i] * std::norm(c.mean[i]) + vc * std::norm(x.mean[i]) + vc * x.var[i]);
        }
    }
}

void part2_backward(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    const double eta = s.cfg.eta;
    if (!s.damp_ready) {
        s.damp_pre.assign(s.Q, GaussMsg::scalar(MN, VAR_MIN, Direction::backward));
    }
    auto& zT = s.bwd_zT;
    std::fill(zT.mean.begin(), zT.mean.end(), cplx{0.0, 0.0});
    double vT = 0.0;

    for (std::size_t q = 0; q < s.Q; ++q) {
        CVec zn(MN);
        fft::idft(s.bwd_dqF[q].mean.data(), zn.data(), MN);
        const double zv = clamp_var(mean_of(s.bwd_dqF[q].var));
        const cplx* b = s.basis.column(q);
        for (std::size_t n = 0; n < MN; ++n)
            zn[n] *= b[n];

        auto& z = s.bwd_zqT[q];
        auto& pre = s.damp_pre[q];
        const bool blend = s.damp_ready || s.cfg.first_damping == FirstDamping::zero_memory;
        if (!blend) {
            z.mean = zn;
            z.var.assign(1, zv);
        } else {
            const double pv = s.damp_ready ? pre.var[0] : zv;
            const double v = clamp_var(1.0 / ((1.0 - eta) / pv + eta / zv));
            z.mean.resize(MN);
            for (std::size_t n = 0; n < MN; ++n) {
                const cplx pm = s.damp_ready ? pre.mean[n] : cplx{0.0, 0.0};
                z.mean[n] = v * ((1.0 - eta) * pm / pv + eta * zn[n] / zv);
            }
            z.var.assign(1, v);
        }
        pre.mean = z.mean;
        pre.var = z.var;

        for (std::size_t n = 0; n < MN; ++n)
            zT.mean[n] += z.mean[n];
        vT += z.var[0];
    }
    s.damp_ready = true;
    zT.var.assign(1, clamp_var(vT));
}

void part1_forward(ReceiverState& s)
{
    const std::size_t MN = s.MN;
    const std::size_t A = s.alphabet.size();
    const double rho = s.cfg.rho;

    CVec xF(MN);
    double vsum = 0.0;
    for (std::size_t i = 0; i < MN; ++i) {
        double prec = 0.0;
        cplx pm{0.0, 0.0};
        for (std::size_t q = 0; q < s.Q; ++q) {
            const double p = 1.0 / s.fwd_xqF[q].v(i);
            prec += p;
            pm += s.fwd_xqF[q].mean[i] * p;
        }
        const double v = clamp_var(1.0 / prec);
        xF[i] = v * pm;
        vsum += v;
    }
    CVec xt(MN);
    fft::idft(xF.data(), xt.data(), MN);
    const double vt = clamp_var(vsum / static_cast<double>(MN));

    CVec xdd(MN);
    fft::dft_rows(xt.data(), xdd.data(), s.cfg.M, s.cfg.N);
    const double sp = std::sqrt(rho);
    const double sd = std::sqrt(1.0 - rho);
    s.fwd_xd.mean.resize(MN);
    for (std::size_t i = 0; i < MN; ++i)
        s.fwd_xd.mean[i] = (xdd[i] - sp * s.x_p_dd[i]) / sd;
    const double vd = clamp_var(vt / (1.0 - rho));
    s.fwd_xd.var.assign(1, vd);

    RVec lg(A);
    for (std::size_t i = 0; i < MN; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < A; ++a) {
            lg[a] = -std::norm(s.alphabet[a] - s.fwd_xd.mean[i]) / vd;
            mx = std::max(mx, lg[a]);
        }
        double z = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            lg[a] = std::exp(lg[a] - mx);
            z += lg[a];
        }
        for (std::size_t a = 0; a < A; ++a)
            s.beliefs.at(i, a) = lg[a] / z;
    }
}

void iterate(ReceiverState& s)
{
    part1_backward(s);
    part2_forward(s);
    part4_data_round(s);
    part3_coeff_update(s);
    part4_product_backward(s);
    part2_backward(s);
    part1_forward(s);
    check_finite(s);
    ++s.iteration;
}

modem::Decisions current_decisions(const ReceiverState& s)
{
    modem::ModemConfig mc;
    mc.M = s.cfg.M;
    mc.N = s.cfg.N;
    mc.constellation = s.alphabet;
    mc.K = 0;
    while ((std::size_t{1} << mc.K) < s.alphabet.size())
        ++mc.K;
    return modem::decide_symbols(s.beliefs, mc);
}

channel::ChannelTaps current_taps(const ReceiverState& s)
{
    return bem::reconstruct_taps(bem::from_paper_scale(s.c_hat, s.MN), s.basis);
}

double residual_norm(const ReceiverState& s)
{
    double r = 0.0;
    for (std::size_t n = 0; n < s.MN; ++n)
        r += std::norm(s.y_T[n] - s.bwd_zT.mean[n]);
    return std::sqrt(r / static_cast<double>(s.MN));
}

ReceiverOutput run_from(ReceiverState& s, const Truth& truth)
{
    ReceiverOutput out;
    auto& dg = out.diagnostics;
    std::vector<std::size_t> prev = current_decisions(s).index;
    std::size_t stable = 0;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    while (s.iteration < s.cfg.max_iters) {
        if (s.iteration == 1 && s.Q != s.cfg.Q_main)
            set_order(s, s.cfg.Q_main);
        iterate(s);

        auto dec = current_decisions(s);
        std::size_t changes = 0;
        for (std::size_t i = 0; i < dec.index.size(); ++i)
            changes += (dec.index[i] != prev[i]);
        prev = dec.index;
        dg.symbol_changes.push_back(changes);
        dg.residual_norm.push_back(residual_norm(s));
        dg.mse.push_back(truth.taps ? channel::channel_mse(*truth.taps, current_taps(s)) : nan);
        dg.ber.push_back(truth.bits ? static_cast<double>(modem::count_bit_errors(dec.bits, *truth.bits)) /
                                          static_cast<double>(truth.bits->size())
                                    : nan);

        stable = changes == 0 ? stable + 1 : 0;
        if (s.cfg.early_stop && s.iteration > 1 && stable >= s.cfg.early_stop_window)
            break;
    }

    out.iterations = s.iteration;
    out.decisions = current_decisions(s);
    out.c_hat = s.c_hat;
    out.coeffs = bem::from_paper_scale(s.c_hat, s.MN);
    out.taps = current_taps(s);
    return out;
}

ReceiverOutput run(const CVec& y_T, const pilots::PilotSet& pilots, const ReceiverConfig& cfg, const Truth& truth,
                   const CVec& alphabet)
{
    ReceiverConfig c = cfg;
    c.rho = pilots.rho;
    c.beta = pilots.beta;
    c.scheme = pilots.scheme;
    ReceiverState s = init_state(c, y_T, pilots.x_p_dd, alphabet);
    return run_from(s, truth);
}

void write_diagnostics_csv(std::ostream& os, const Diagnostics& d)
{
    os << "iter,mse,ber_running,residual_norm\n";
    os.precision(10);
    for (std::size_t i = 0; i < d.size(); ++i)
        os << (i + 1) << ',' << d.mse[i] << ',' << d.ber[i] << ',' << d.residual_norm[i] << '\n';
}

}  // namespace otfs::receiver
