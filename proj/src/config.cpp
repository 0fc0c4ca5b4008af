#include "otfs/harness.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace otfs::harness {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw InvalidConfig(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw InvalidConfig(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
void get_to(const json& j, const char* key, T& out)
{
    if (j.contains(key))
        out = j.at(key).get<T>();
}

template <typename T>
void get_list(const json& j, const char* key, std::vector<T>& out)
{
    if (!j.contains(key))
        return;
    const auto& v = j.at(key);
    out = v.is_array() ? v.get<std::vector<T>>() : std::vector<T>{v.get<T>()};
}

receiver::SymbolPrior parse_prior(const std::string& s)
{
    if (s == "posterior")
        return receiver::SymbolPrior::posterior;
    if (s == "extrinsic")
        return receiver::SymbolPrior::extrinsic;
    throw InvalidConfig("unknown symbol_prior: " + s);
}

receiver::FirstDamping parse_first_damping(const std::string& s)
{
    if (s == "zero-memory")
        return receiver::FirstDamping::zero_memory;
    if (s == "bypass")
        return receiver::FirstDamping::bypass;
    throw InvalidConfig("unknown first_damping: " + s);
}

}  // namespace

SimConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidConfig(std::string("config parse error: ") + e.what());
    }
    check_keys(j,
               {"modem", "channel", "schemes", "beta", "rho_F", "pilot_base", "receiver", "snr_db", "N_MC", "seed",
                "out", "known_channel", "threads"},
               "config");

    SimConfig c;
    try {
        if (j.contains("modem")) {
            const auto& m = j["modem"];
            check_keys(m, {"M", "N"}, "modem");
            get_to(m, "M", c.modem.M);
            get_to(m, "N", c.modem.N);
        }
        if (j.contains("channel")) {
            const auto& ch = j["channel"];
            check_keys(ch,
                       {"profile", "speed_kmh", "carrier_hz", "subcarrier_hz", "L", "delay_spread_s",
                        "sinusoid_count"},
                       "channel");
            if (ch.contains("profile"))
                c.channel.profile = channel::parse_profile(ch["profile"].get<std::string>());
            get_to(ch, "speed_kmh", c.channel.speed_kmh);
            get_to(ch, "carrier_hz", c.channel.carrier_hz);
            get_to(ch, "subcarrier_hz", c.channel.subcarrier_hz);
            get_to(ch, "L", c.channel.L);
            get_to(ch, "delay_spread_s", c.channel.delay_spread_s);
            get_to(ch, "sinusoid_count", c.channel.sinusoid_count);
        }
        if (j.contains("schemes")) {
            std::vector<std::string> names;
            get_list(j, "schemes", names);
            c.schemes.clear();
            for (auto& n : names)
                c.schemes.push_back(pilots::parse_scheme(n));
        }
        get_list(j, "beta", c.beta);
        get_list(j, "rho_F", c.rho_F);
        if (j.contains("pilot_base"))
            c.pilot_base = pilots::parse_base(j["pilot_base"].get<std::string>());
        if (j.contains("receiver")) {
            const auto& r = j["receiver"];
            check_keys(r,
                       {"Q_initial", "Q_main", "K_os", "eta", "max_iters", "comb_first_iter", "symbol_prior",
                        "first_damping", "early_stop", "early_stop_window"},
                       "receiver");
            get_to(r, "Q_initial", c.receiver.Q_initial);
            get_to(r, "Q_main", c.receiver.Q_main);
            get_to(r, "K_os", c.receiver.K_os);
            get_to(r, "eta", c.receiver.eta);
            get_to(r, "max_iters", c.receiver.max_iters);
            get_to(r, "comb_first_iter", c.receiver.comb_first_iter);
            if (r.contains("symbol_prior"))
                c.receiver.symbol_prior = parse_prior(r["symbol_prior"].get<std::string>());
            if (r.contains("first_damping"))
                c.receiver.first_damping = parse_first_damping(r["first_damping"].get<std::string>());
            get_to(r, "early_stop", c.receiver.early_stop);
            get_to(r, "early_stop_window", c.receiver.early_stop_window);
        }
        get_list(j, "snr_db", c.snr_db);
        get_to(j, "N_MC", c.N_MC);
        get_to(j, "seed", c.seed);
        get_to(j, "out", c.out);
        get_to(j, "known_channel", c.known_channel);
        get_to(j, "threads", c.threads);
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config type error: ") + e.what());
    }
    c.channel.fft_size = c.modem.M;
    c.receiver.M = c.modem.M;
    c.receiver.N = c.modem.N;
    c.receiver.L = c.channel.L;
    c.validate();
    return c;
}

SimConfig load_config(const std::string& path)
{
    std::ifstream f(path);
    if (!f)
        throw std::runtime_error("cannot open config file: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const SimConfig& c)
{
    json j;
    j["modem"] = {{"M", c.modem.M}, {"N", c.modem.N}};
    j["channel"] = {{"profile", channel::to_string(c.channel.profile)},
                    {"speed_kmh", c.channel.speed_kmh},
                    {"carrier_hz", c.channel.carrier_hz},
                    {"subcarrier_hz", c.channel.subcarrier_hz},
                    {"L", c.channel.L},
                    {"delay_spread_s", c.channel.delay_spread_s},
                    {"sinusoid_count", c.channel.sinusoid_count}};
    std::vector<std::string> names;
    for (auto s : c.schemes)
        names.push_back(pilots::to_string(s));
    j["schemes"] = names;
    j["beta"] = c.beta;
    j["rho_F"] = c.rho_F;
    j["pilot_base"] = pilots::to_string(c.pilot_base);
    const auto& r = c.receiver;
    j["receiver"] = {{"Q_initial", r.Q_initial},
                     {"Q_main", r.Q_main},
                     {"K_os", r.K_os},
                     {"eta", r.eta},
                     {"max_iters", r.max_iters},
                     {"comb_first_iter", r.comb_first_iter},
                     {"symbol_prior", r.symbol_prior == receiver::SymbolPrior::posterior ? "posterior" : "extrinsic"},
                     {"first_damping", r.first_damping == receiver::FirstDamping::zero_memory ? "zero-memory" : "bypass"},
                     {"early_stop", r.early_stop},
                     {"early_stop_window", r.early_stop_window}};
    j["snr_db"] = c.snr_db;
    j["N_MC"] = c.N_MC;
    j["seed"] = c.seed;
    j["out"] = c.out;
    j["known_channel"] = c.known_channel;
    j["threads"] = c.threads;
    return j.dump(2);
}

}  // namespace otfs::harness
