#include "otfs/bem.hpp"

#include "otfs/fft.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace otfs::bem {

double BemBasis::frequency_offset(std::size_t q) const
{
    return static_cast<double>(q) - static_cast<double>(Q - 1) / 2.0;
}

BemBasis gce_basis(std::size_t frame_len, std::size_t Q, unsigned K_os)
{
    if (Q == 0 || Q % 2 == 0)
        throw InvalidConfig("gce_basis: Q must be odd");
    if (K_os < 1)
        throw InvalidConfig("gce_basis: K_os must be at least 1");
    if (frame_len == 0)
        throw InvalidInput("gce_basis: empty frame");
    BemBasis b;
    b.MN = frame_len;
    b.Q = Q;
    b.K_os = K_os;
    b.B.resize(frame_len * Q);
    const double denom = static_cast<double>(K_os) * static_cast<double>(frame_len);
    for (std::size_t q = 0; q < Q; ++q) {
        const double k = b.frequency_offset(q);
        for (std::size_t n = 0; n < frame_len; ++n) {
            // reduce n*k modulo the period before scaling to keep the phase small
            const double phase = 2.0 * std::numbers::pi * std::fmod(static_cast<double>(n) * k, denom) / denom;
            b.B[n + q * frame_len] = std::polar(1.0, phase);
        }
    }
    return b;
}

double max_modeled_doppler(std::size_t Q, unsigned K_os, double frame_duration_s)
{
    return static_cast<double>(Q - 1) / (2.0 * static_cast<double>(K_os) * frame_duration_s);
}

BemCoeffs ls_fit(const channel::ChannelTaps& taps, const BemBasis& basis)
{
    if (taps.MN != basis.MN)
        throw InvalidInput("ls_fit: frame length mismatch");
    const auto MN = static_cast<Eigen::Index>(basis.MN);
    const auto Q = static_cast<Eigen::Index>(basis.Q);
    const auto L = static_cast<Eigen::Index>(taps.L);

    Eigen::Map<const Eigen::MatrixXcd> B(basis.B.data(), MN, Q);
    Eigen::Map<const Eigen::MatrixXcd> H(taps.taps.data(), MN, L);
    Eigen::MatrixXcd G = B.adjoint() * B;
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(G);
    assert(ldlt.info() == Eigen::Success);
    Eigen::MatrixXcd X = ldlt.solve(B.adjoint() * H);  // Q x L

    BemCoeffs c(taps.L, basis.Q);
    for (Eigen::Index q = 0; q < Q; ++q)
        for (Eigen::Index l = 0; l < L; ++l)
            c(l, q) = X(q, l);
    return c;
}

channel::ChannelTaps reconstruct_taps(const BemCoeffs& coeffs, const BemBasis& basis)
{
    if (coeffs.Q != basis.Q)
        throw InvalidInput("reconstruct_taps: order mismatch");
    channel::ChannelTaps h(basis.MN, coeffs.L);
    for (std::size_t l = 0; l < coeffs.L; ++l) {
        cplx* col = h.column(l);
        for (std::size_t q = 0; q < basis.Q; ++q) {
            const cplx c = coeffs(l, q);
            const cplx* b = basis.column(q);
            for (std::size_t n = 0; n < basis.MN; ++n)
                col[n] += b[n] * c;
        }
        double p = 0.0;
        for (std::size_t n = 0; n < basis.MN; ++n)
            p += std::norm(col[n]);
        h.tap_power[l] = p / static_cast<double>(basis.MN);
    }
    return h;
}

CVec to_paper_scale(const BemCoeffs& coeffs, std::size_t q, std::size_t frame_len)
{
    const double s = std::sqrt(static_cast<double>(frame_len));
    CVec c(coeffs.L);
    for (std::size_t l = 0; l < coeffs.L; ++l)
        c[l] = coeffs(l, q) * s;
    return c;
}

BemCoeffs from_paper_scale(const std::vector<CVec>& c, std::size_t frame_len)
{
    const std::size_t Q = c.size();
    const std::size_t L = Q ? c[0].size() : 0;
    const double s = 1.0 / std::sqrt(static_cast<double>(frame_len));
    BemCoeffs out(L, Q);
    for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t l = 0; l < L; ++l)
            out(l, q) = c[q][l] * s;
    return out;
}

Eigen::MatrixXcd build_cq_matrix(const CVec& c_q, std::size_t frame_len)
{
    if (frame_len > kOracleMaxDim)
        throw InvalidInput("build_cq_matrix: frame exceeds oracle guard bound");
    if (c_q.size() > frame_len)
        throw InvalidInput("build_cq_matrix: more taps than samples");
    const auto MN = static_cast<Eigen::Index>(frame_len);
    Eigen::MatrixXcd F(MN, MN);
    const double s = 1.0 / std::sqrt(static_cast<double>(frame_len));
    for (Eigen::Index p = 0; p < MN; ++p)
        for (Eigen::Index k = 0; k < MN; ++k)
            F(p, k) = std::polar(s, -2.0 * std::numbers::pi * static_cast<double>((p * k) % MN) /
                                        static_cast<double>(MN));
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(MN);
    for (std::size_t l = 0; l < c_q.size(); ++l)
        c(static_cast<Eigen::Index>(l)) = c_q[l];
    Eigen::VectorXcd spec = F * c;
    return F.adjoint() * spec.asDiagonal() * F;
}

double fit_residual_mse(const channel::ChannelTaps& taps, const BemBasis& basis)
{
    auto fit = reconstruct_taps(ls_fit(taps, basis), basis);
    return channel::channel_mse(taps, fit);
}

}  // namespace otfs::bem
