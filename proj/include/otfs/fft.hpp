#pragma once

#include "otfs/types.hpp"

namespace otfs::fft {

// Unitary DFT, F(p,q) = exp(-j2pi pq/n)/sqrt(n). in and out may alias.
void dft(const cplx* in, cplx* out, std::size_t n);
void idft(const cplx* in, cplx* out, std::size_t n);

CVec dft(const CVec& x);
CVec idft(const CVec& x);

// Unitary transforms of length `n` over `howmany` sequences that are
// interleaved with stride `howmany` (element k of sequence j at j + k*howmany).
// For a column-major M x N grid this transforms along each row.
void dft_rows(const cplx* in, cplx* out, std::size_t howmany, std::size_t n);
void idft_rows(const cplx* in, cplx* out, std::size_t howmany, std::size_t n);

}  // namespace otfs::fft
