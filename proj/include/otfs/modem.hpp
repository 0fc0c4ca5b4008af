#pragma once

#include "otfs/types.hpp"

namespace otfs::modem {

// Gray-labelled QPSK. Point k carries the label k written MSB first:
// the first bit selects the sign of the real part, the second the imaginary part.
CVec qpsk_gray();

struct ModemConfig {
    std::size_t M = 128;  // delay bins
    std::size_t N = 16;   // Doppler bins
    unsigned K = 2;       // bits per symbol
    CVec constellation = qpsk_gray();

    std::size_t MN() const { return M * N; }
    void validate() const;
};

// M x N delay-Doppler grid stored column-major: flat index i = m + n*M.
struct DdFrame {
    std::size_t M = 0;
    std::size_t N = 0;
    CVec data;

    DdFrame() = default;
    DdFrame(std::size_t m, std::size_t n) : M(m), N(n), data(m * n) {}
    static DdFrame from_vec(CVec v, std::size_t m, std::size_t n);

    cplx& operator()(std::size_t m, std::size_t n) { return data[m + n * M]; }
    const cplx& operator()(std::size_t m, std::size_t n) const { return data[m + n * M]; }
    const CVec& vec() const { return data; }
};

// Row-major count x order table of P_i(alpha).
struct SymbolBeliefs {
    std::size_t count = 0;
    std::size_t order = 0;
    RVec p;

    static SymbolBeliefs uniform(std::size_t count, std::size_t order);
    double& at(std::size_t i, std::size_t a) { return p[i * order + a]; }
    double at(std::size_t i, std::size_t a) const { return p[i * order + a]; }
    bool valid(double tol = 1e-12) const;
};

struct Decisions {
    std::vector<std::size_t> index;
    CVec symbols;
    Bits bits;
};

CVec map_bits(const Bits& bits, const ModemConfig& cfg);
Bits label_bits(std::size_t index, unsigned K);

CVec superimpose(const CVec& x_d, const CVec& x_p, double rho);

CVec dd_to_time(const DdFrame& X);
CVec dd_to_time(const CVec& x_dd, std::size_t M, std::size_t N);
DdFrame time_to_dd(const CVec& x_T, std::size_t M, std::size_t N);

Decisions decide_symbols(const SymbolBeliefs& beliefs, const ModemConfig& cfg);

std::size_t count_bit_errors(const Bits& a, const Bits& b);

}  // namespace otfs::modem
