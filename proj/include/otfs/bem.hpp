#pragma once

#include "otfs/channel.hpp"
#include "otfs/types.hpp"

#include <Eigen/Dense>

namespace otfs::bem {

// GCE basis, column-major MN x Q: B[n + q*MN] = exp(j2pi n (q-(Q-1)/2) / (K_os MN)).
struct BemBasis {
    std::size_t MN = 0;
    std::size_t Q = 0;
    unsigned K_os = 2;
    CVec B;

    cplx operator()(std::size_t n, std::size_t q) const { return B[n + q * MN]; }
    const cplx* column(std::size_t q) const { return B.data() + q * MN; }
    double frequency_offset(std::size_t q) const;  // in units of 1/(K_os MN) cycles per sample
};

// Tap-domain coefficients c'_q, column-major L x Q: h(n,l) = sum_q B(n,q) C(l,q).
// The receiver works with c_q = sqrt(MN) c'_q; see to_paper_scale.
struct BemCoeffs {
    std::size_t L = 0;
    std::size_t Q = 0;
    CVec C;

    BemCoeffs() = default;
    BemCoeffs(std::size_t l, std::size_t q) : L(l), Q(q), C(l * q) {}
    cplx& operator()(std::size_t l, std::size_t q) { return C[l + q * L]; }
    const cplx& operator()(std::size_t l, std::size_t q) const { return C[l + q * L]; }
};

BemBasis gce_basis(std::size_t frame_len, std::size_t Q, unsigned K_os);

// Largest Doppler frequency (Hz) spanned by the basis for a frame of duration T.
double max_modeled_doppler(std::size_t Q, unsigned K_os, double frame_duration_s);

BemCoeffs ls_fit(const channel::ChannelTaps& taps, const BemBasis& basis);
channel::ChannelTaps reconstruct_taps(const BemCoeffs& coeffs, const BemBasis& basis);

// Paper-scale coefficients c_q = sqrt(MN) c'_q for column q.
CVec to_paper_scale(const BemCoeffs& coeffs, std::size_t q, std::size_t frame_len);
BemCoeffs from_paper_scale(const std::vector<CVec>& c, std::size_t frame_len);

// C_q = F^H diag(F_{MN x L} c_q) F, with c_q in paper scale.
Eigen::MatrixXcd build_cq_matrix(const CVec& c_q, std::size_t frame_len);

double fit_residual_mse(const channel::ChannelTaps& taps, const BemBasis& basis);

}  // namespace otfs::bem
