#pragma once

#include "otfs/bem.hpp"
#include "otfs/channel.hpp"
#include "otfs/modem.hpp"
#include "otfs/pilots.hpp"
#include "otfs/types.hpp"

#include <iosfwd>
#include <optional>

namespace otfs::receiver {

inline constexpr double VAR_MIN = 1e-12;
inline constexpr double VAR_MAX = 1e12;

inline double clamp_var(double v)
{
    return v < VAR_MIN ? VAR_MIN : (v > VAR_MAX ? VAR_MAX : v);
}

enum class Direction { forward, backward };

// Gaussian message: mean vector with either one shared variance or one per element.
struct GaussMsg {
    CVec mean;
    RVec var;
    Direction dir = Direction::forward;

    static GaussMsg scalar(std::size_t n, double v, Direction d);
    static GaussMsg elementwise(std::size_t n, double v, Direction d);

    std::size_t size() const { return mean.size(); }
    bool is_scalar() const { return var.size() == 1; }
    double v(std::size_t i) const { return var.size() == 1 ? var[0] : var[i]; }
    double mean_var() const;
};

// Prior handed from the symbol node to the DD domain in Part I backward.
enum class SymbolPrior {
    posterior,  // projected belief moments
    extrinsic   // projected belief divided by the last forward message
};

// First use of the Part II damping memory.
enum class FirstDamping {
    zero_memory,  // blend against a zero-mean memory with the new variance
    bypass        // take the raw message
};

struct ReceiverConfig {
    std::size_t M = 128;
    std::size_t N = 16;
    std::size_t L = 14;
    std::size_t Q_initial = 3;
    std::size_t Q_main = 5;
    unsigned K_os = 2;
    double eta = 0.2;  // weight on the new message in the Part II damping
    std::size_t max_iters = 70;
    double rho = 0.0125;
    std::size_t beta = 8;
    pilots::Scheme scheme = pilots::Scheme::sp_dd_d;
    double noise_var = 0.1;
    bool comb_first_iter = true;
    SymbolPrior symbol_prior = SymbolPrior::posterior;
    FirstDamping first_damping = FirstDamping::zero_memory;
    bool early_stop = false;
    std::size_t early_stop_window = 3;

    std::size_t MN() const { return M * N; }
    void validate() const;
};

struct ReceiverState {
    ReceiverConfig cfg;
    std::size_t MN = 0;
    std::size_t Q = 0;
    std::size_t iteration = 0;
    bem::BemBasis basis;
    CVec alphabet;
    CVec y_T;
    CVec x_p_dd;

    modem::SymbolBeliefs beliefs;
    GaussMsg fwd_xd;  // forward data message in the DD domain (de-superposed)
    GaussMsg bwd_xF;  // scalar variance

    std::vector<GaussMsg> fwd_zqT;  // scalar
    std::vector<GaussMsg> fwd_dqF;  // scalar
    std::vector<GaussMsg> bwd_xqF;  // elementwise
    std::vector<GaussMsg> hat_xqF;  // elementwise posterior
    std::vector<GaussMsg> fwd_xqF;  // elementwise
    std::vector<GaussMsg> bwd_cqF;  // elementwise
    std::vector<GaussMsg> hat_cqF;  // elementwise posterior
    std::vector<GaussMsg> fwd_cqF;  // scalar
    std::vector<CVec> c_hat;        // Q vectors of length L, paper scale
    RVec var_c;
    std::vector<GaussMsg> bwd_dqF;  // elementwise
    std::vector<GaussMsg> bwd_zqT;  // scalar
    GaussMsg bwd_zT;                // scalar

    std::vector<GaussMsg> damp_pre;
    bool damp_ready = false;

    // Fixed coefficients for known-channel operation, paper scale.
    std::optional<std::vector<CVec>> known_c;
};

struct Diagnostics {
    RVec mse;                  // empty entries are NaN when no truth is supplied
    RVec ber;                  // running BER against true bits, NaN without truth
    std::vector<std::size_t> symbol_changes;
    RVec residual_norm;        // ||y_T - backward z_T|| / sqrt(MN)

    std::size_t size() const { return residual_norm.size(); }
};

struct ReceiverOutput {
    modem::Decisions decisions;
    std::vector<CVec> c_hat;  // paper scale, Q_main vectors of length L
    bem::BemCoeffs coeffs;    // tap-domain coefficients
    channel::ChannelTaps taps;
    Diagnostics diagnostics;
    std::size_t iterations = 0;
};

struct Truth {
    const channel::ChannelTaps* taps = nullptr;
    const Bits* bits = nullptr;
};

struct DivergenceError : std::runtime_error {
    std::size_t iteration;
    DivergenceError(const std::string& what, std::size_t it) : std::runtime_error(what), iteration(it) {}
};

ReceiverState init_state(const ReceiverConfig& cfg, const CVec& y_T, const CVec& x_p_dd,
                         const CVec& alphabet = modem::qpsk_gray());

// Rebuilds the basis for a new order and resets every q-indexed message and
// the damping memory; beliefs are kept.
void set_order(ReceiverState& s, std::size_t Q);

// Paper-scale coefficients held fixed in every Part III update.
void inject_known_coeffs(ReceiverState& s, const std::vector<CVec>& c);

void part1_backward(ReceiverState& s);
void part2_forward(ReceiverState& s);
// Part IV steps (a)-(e): x_qF backward, x posterior, c_qF backward (comb
// restricted on the first sp-dd-d iteration), c posterior, x_qF forward.
void part4_data_round(ReceiverState& s);
void part3_coeff_update(ReceiverState& s);
// Part IV step (f): backward d_qF from the product node.
void part4_product_backward(ReceiverState& s);
void part2_backward(ReceiverState& s);
void part1_forward(ReceiverState& s);

// One full pass of the schedule.
void iterate(ReceiverState& s);

bool comb_active(const ReceiverState& s);
modem::Decisions current_decisions(const ReceiverState& s);
channel::ChannelTaps current_taps(const ReceiverState& s);
double residual_norm(const ReceiverState& s);

ReceiverOutput run(const CVec& y_T, const pilots::PilotSet& pilots, const ReceiverConfig& cfg,
                   const Truth& truth = {}, const CVec& alphabet = modem::qpsk_gray());

// Continues iterating from a prepared state (used for genie starts).
ReceiverOutput run_from(ReceiverState& s, const Truth& truth = {});

void write_diagnostics_csv(std::ostream& os, const Diagnostics& d);

}  // namespace otfs::receiver
