#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace otfs {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;
using Bits = std::vector<std::uint8_t>;

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InvalidConfig : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dense MN x MN matrices are only built for oracle checks on small frames.
inline constexpr std::size_t kOracleMaxDim = 4096;

}  // namespace otfs
