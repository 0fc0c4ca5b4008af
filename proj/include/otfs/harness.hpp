#pragma once

#include "otfs/channel.hpp"
#include "otfs/modem.hpp"
#include "otfs/pilots.hpp"
#include "otfs/receiver.hpp"

#include <iosfwd>
#include <string>

namespace otfs::harness {

enum class SweepMode { convergence, final };

struct SimConfig {
    modem::ModemConfig modem;
    channel::ChannelConfig channel;
    std::vector<pilots::Scheme> schemes = {pilots::Scheme::sp_dd_d};
    std::vector<std::size_t> beta = {8};
    std::vector<double> rho_F = {0.1};
    pilots::BaseSequence pilot_base = pilots::BaseSequence::qpsk;
    receiver::ReceiverConfig receiver;
    std::vector<double> snr_db = {10.0};
    std::size_t N_MC = 300;
    std::uint64_t seed = 1;
    std::string out;
    bool known_channel = false;  // genie receiver with the LS-fitted true coefficients
    std::size_t threads = 0;     // 0 = hardware concurrency

    void validate() const;
};

// One point of the scheme x beta x rho_F product. sp-dd always uses beta = 1.
struct Point {
    pilots::Scheme scheme = pilots::Scheme::sp_dd_d;
    std::size_t beta = 8;
    double rho_F = 0.1;
};

struct TrialResult {
    RVec ber;  // per iteration
    RVec mse;  // per iteration
    bool failed = false;
    std::string error;
    double wallclock_s = 0.0;
};

struct ResultRow {
    double snr_db = 0.0;
    std::string scheme;
    std::size_t beta = 1;
    double rho_F = 0.0;
    std::size_t iteration = 0;
    double ber = 0.0;
    double ber_stderr = 0.0;
    double mse = 0.0;
    double mse_stderr = 0.0;
    std::size_t trials = 0;
    double wallclock_s = 0.0;
    std::size_t failed = 0;  // not written to CSV
};

// Seeds of one trial, derived from the root seed by (snr index, trial index).
struct TrialSeeds {
    std::uint64_t bits, pilots, channel, noise;
};
TrialSeeds trial_seeds(std::uint64_t root, std::size_t snr_index, std::size_t trial);

std::vector<Point> expand_points(const SimConfig& cfg);

// Everything drawn for one trial: transmitted bits, pilots, channel, received frame.
struct TrialSetup {
    Bits bits;
    pilots::PilotSet pilots;
    channel::ChannelTaps taps;
    CVec y_T;
    receiver::ReceiverConfig receiver;
};

TrialSetup make_trial(const SimConfig& cfg, const Point& point, double snr_db, const TrialSeeds& seeds);

TrialResult run_trial(const SimConfig& cfg, const Point& point, double snr_db, const TrialSeeds& seeds);

// Trials for one (point, snr) pair, run on a worker pool; results in trial order.
std::vector<TrialResult> run_trials(const SimConfig& cfg, const Point& point, std::size_t snr_index,
                                    std::size_t trials);

std::vector<ResultRow> aggregate(const std::vector<TrialResult>& trials, const Point& point, double snr_db,
                                 SweepMode mode);

std::vector<ResultRow> sweep(const SimConfig& cfg, SweepMode mode);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

// Structured key-value config (JSON) with field names mirroring SimConfig.
SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& text);
std::string dump_config(const SimConfig& cfg);

}  // namespace otfs::harness
