#include "otfs/pilots.hpp"

#include "otfs/fft.hpp"
#include "otfs/modem.hpp"
#include "otfs/rng.hpp"

#include <cmath>
#include <numbers>

namespace otfs::pilots {
namespace {

CVec random_qpsk(std::size_t n, Rng& rng)
{
    const CVec alphabet = modem::qpsk_gray();
    std::uniform_int_distribution<int> pick(0, 3);
    CVec out(n);
    for (auto& v : out)
        v = alphabet[static_cast<std::size_t>(pick(rng))];
    return out;
}

CVec zadoff_chu(std::size_t P)
{
    // root 1; the odd-length form shifts by one so both parities stay unit-modulus with a flat spectrum
    CVec out(P);
    const double p = static_cast<double>(P);
    const double odd = static_cast<double>(P % 2);
    for (std::size_t n = 0; n < P; ++n) {
        const double k = static_cast<double>(n);
        const double arg = std::fmod(k * (k + odd), 2.0 * p);
        out[n] = std::polar(1.0, -std::numbers::pi * arg / p);
    }
    return out;
}

void check_rho_F(double rho_F, std::size_t beta)
{
    const double rho = rho_F / static_cast<double>(beta);
    if (!(rho > 0.0 && rho < 1.0))
        throw InvalidConfig("pilots: rho_F/beta must lie in (0,1)");
}

}  // namespace

Scheme parse_scheme(const std::string& s)
{
    if (s == "sp-dd")
        return Scheme::sp_dd;
    if (s == "sp-dd-d")
        return Scheme::sp_dd_d;
    throw InvalidConfig("unknown pilot scheme: " + s);
}

std::string to_string(Scheme s) { return s == Scheme::sp_dd ? "sp-dd" : "sp-dd-d"; }

BaseSequence parse_base(const std::string& s)
{
    if (s == "qpsk")
        return BaseSequence::qpsk;
    if (s == "zadoff-chu")
        return BaseSequence::zadoff_chu;
    throw InvalidConfig("unknown pilot base sequence: " + s);
}

std::string to_string(BaseSequence b) { return b == BaseSequence::qpsk ? "qpsk" : "zadoff-chu"; }

std::vector<std::size_t> comb_indices(std::size_t MN, std::size_t beta)
{
    if (beta == 0 || MN % beta != 0)
        throw InvalidConfig("comb_indices: beta must divide MN");
    std::vector<std::size_t> idx;
    idx.reserve(MN / beta);
    for (std::size_t i = 0; i < MN; i += beta)
        idx.push_back(i);
    return idx;
}

PilotSet random_dd_pilots(std::size_t M, std::size_t N, std::uint64_t seed, double rho_F)
{
    check_rho_F(rho_F, 1);
    Rng rng(seed);
    PilotSet ps;
    ps.scheme = Scheme::sp_dd;
    ps.beta = 1;
    ps.P = M * N;
    ps.x_p_dd = random_qpsk(M * N, rng);
    ps.x_p2 = modem::dd_to_time(ps.x_p_dd, M, N);
    ps.x_p1 = ps.x_p2;
    ps.x_p3 = fft::dft(ps.x_p2);
    ps.rho_F = rho_F;
    ps.rho = rho_F;
    return ps;
}

PilotSet designed_pilots(std::size_t M, std::size_t N, std::size_t beta, std::uint64_t seed, double rho_F,
                         std::size_t L, BaseSequence base)
{
    const std::size_t MN = M * N;
    if (beta == 0 || MN % beta != 0)
        throw InvalidConfig("designed_pilots: beta must divide MN");
    const std::size_t P = MN / beta;
    if (P <= L)
        throw InvalidConfig("designed_pilots: P = MN/beta must exceed L for channel estimation (P > L)");
    check_rho_F(rho_F, beta);

    PilotSet ps;
    ps.scheme = Scheme::sp_dd_d;
    ps.beta = beta;
    ps.P = P;
    if (base == BaseSequence::qpsk) {
        Rng rng(seed);
        ps.x_p1 = random_qpsk(P, rng);
    } else {
        ps.x_p1 = zadoff_chu(P);
    }
    ps.x_p2.resize(MN);
    for (std::size_t i = 0; i < MN; ++i)
        ps.x_p2[i] = ps.x_p1[i % P];
    ps.x_p3 = fft::dft(ps.x_p2);
    ps.x_p_dd = modem::time_to_dd(ps.x_p2, M, N).data;
    ps.rho_F = rho_F;
    ps.rho = rho_F / static_cast<double>(beta);
    return ps;
}

}  // namespace otfs::pilots
