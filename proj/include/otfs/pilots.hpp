#pragma once

#include "otfs/types.hpp"

namespace otfs::pilots {

enum class Scheme { sp_dd, sp_dd_d };
enum class BaseSequence { qpsk, zadoff_chu };

Scheme parse_scheme(const std::string& s);
std::string to_string(Scheme s);
BaseSequence parse_base(const std::string& s);
std::string to_string(BaseSequence b);

struct PilotSet {
    Scheme scheme = Scheme::sp_dd;
    std::size_t beta = 1;
    std::size_t P = 0;
    CVec x_p1;    // base sequence, length P
    CVec x_p2;    // periodic time sequence, length MN
    CVec x_p3;    // frequency comb, F_MN x_p2
    CVec x_p_dd;  // DD-domain pilots
    double rho = 0.1;    // DD-domain power factor
    double rho_F = 0.1;  // per-tone power factor on the comb, rho_F = beta * rho
};

PilotSet random_dd_pilots(std::size_t M, std::size_t N, std::uint64_t seed, double rho_F = 0.1);

PilotSet designed_pilots(std::size_t M, std::size_t N, std::size_t beta, std::uint64_t seed, double rho_F,
                         std::size_t L, BaseSequence base = BaseSequence::qpsk);

std::vector<std::size_t> comb_indices(std::size_t MN, std::size_t beta);

}  // namespace otfs::pilots
