#include "otfs/modem.hpp"

#include "otfs/fft.hpp"

#include <cmath>
#include <numeric>

namespace otfs::modem {

CVec qpsk_gray()
{
    const double a = 1.0 / std::sqrt(2.0);
    return {{a, a}, {a, -a}, {-a, a}, {-a, -a}};
}

void ModemConfig::validate() const
{
    if (M < 2 || N < 2)
        throw InvalidConfig("modem: M and N must be at least 2");
    if (K == 0 || K > 16 || constellation.size() != (std::size_t{1} << K))
        throw InvalidConfig("modem: constellation must have 2^K points");
    double e = 0.0;
    for (auto& a : constellation)
        e += std::norm(a);
    e /= static_cast<double>(constellation.size());
    if (std::abs(e - 1.0) > 1e-9)
        throw InvalidConfig("modem: constellation must have unit average energy");
}

DdFrame DdFrame::from_vec(CVec v, std::size_t m, std::size_t n)
{
    if (v.size() != m * n)
        throw InvalidInput("DdFrame: length does not match M*N");
    DdFrame f;
    f.M = m;
    f.N = n;
    f.data = std::move(v);
    return f;
}

SymbolBeliefs SymbolBeliefs::uniform(std::size_t count, std::size_t order)
{
    SymbolBeliefs b;
    b.count = count;
    b.order = order;
    b.p.assign(count * order, 1.0 / static_cast<double>(order));
    return b;
}

bool SymbolBeliefs::valid(double tol) const
{
    if (p.size() != count * order)
        return false;
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (std::size_t a = 0; a < order; ++a) {
            double v = at(i, a);
            if (!(v >= 0.0))
                return false;
            s += v;
        }
        if (std::abs(s - 1.0) > tol)
            return false;
    }
    return true;
}

CVec map_bits(const Bits& bits, const ModemConfig& cfg)
{
    if (bits.size() % cfg.K != 0)
        throw InvalidInput("map_bits: bit count not divisible by K");
    CVec out(bits.size() / cfg.K);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::size_t idx = 0;
        for (unsigned k = 0; k < cfg.K; ++k)
            idx = (idx << 1) | (bits[s * cfg.K + k] & 1u);
        out[s] = cfg.constellation[idx];
    }
    return out;
}

Bits label_bits(std::size_t index, unsigned K)
{
    Bits b(K);
    for (unsigned k = 0; k < K; ++k)
        b[k] = static_cast<std::uint8_t>((index >> (K - 1 - k)) & 1u);
    return b;
}

CVec superimpose(const CVec& x_d, const CVec& x_p, double rho)
{
    if (x_d.size() != x_p.size())
        throw InvalidInput("superimpose: length mismatch");
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidInput("superimpose: rho must lie in (0,1)");
    const double sp = std::sqrt(rho);
    const double sd = std::sqrt(1.0 - rho);
    CVec out(x_d.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = sp * x_p[i] + sd * x_d[i];
    return out;
}

CVec dd_to_time(const CVec& x_dd, std::size_t M, std::size_t N)
{
    if (x_dd.size() != M * N)
        throw InvalidInput("dd_to_time: length does not match M*N");
    CVec out(x_dd.size());
    fft::idft_rows(x_dd.data(), out.data(), M, N);
    return out;
}

CVec dd_to_time(const DdFrame& X) { return dd_to_time(X.data, X.M, X.N); }

DdFrame time_to_dd(const CVec& x_T, std::size_t M, std::size_t N)
{
    if (x_T.size() != M * N)
        throw InvalidInput("time_to_dd: length does not match M*N");
    DdFrame f(M, N);
    fft::dft_rows(x_T.data(), f.data.data(), M, N);
    return f;
}

Decisions decide_symbols(const SymbolBeliefs& beliefs, const ModemConfig& cfg)
{
    Decisions d;
    d.index.resize(beliefs.count);
    d.symbols.resize(beliefs.count);
    d.bits.reserve(beliefs.count * cfg.K);
    for (std::size_t i = 0; i < beliefs.count; ++i) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < beliefs.order; ++a)
            if (beliefs.at(i, a) > beliefs.at(i, best))
                best = a;
        d.index[i] = best;
        d.symbols[i] = cfg.constellation[best];
        for (unsigned k = 0; k < cfg.K; ++k)
            d.bits.push_back(static_cast<std::uint8_t>((best >> (cfg.K - 1 - k)) & 1u));
    }
    return d;
}

std::size_t count_bit_errors(const Bits& a, const Bits& b)
{
    if (a.size() != b.size())
        throw InvalidInput("count_bit_errors: length mismatch");
    std::size_t e = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        e += (a[i] != b[i]);
    return e;
}

}  // namespace otfs::modem
