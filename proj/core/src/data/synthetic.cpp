#include "lru/data/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "lru/error.hpp"

namespace lru::data {
namespace {

constexpr double kDay = 86400.0;
constexpr double kHour = 3600.0;

std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// AR(1) noise with stationary standard deviation `sd`.
class ArNoise {
public:
    ArNoise(double phi, double sd) : phi_(phi), innov_(0.0, sd * std::sqrt(1.0 - phi * phi)) {}
    double next(std::mt19937_64& rng) {
        state_ = phi_ * state_ + innov_(rng);
        return state_;
    }

private:
    double phi_;
    std::normal_distribution<double> innov_;
    double state_ = 0.0;
};

SeriesTable make_weather(const GeneratorConfig& cfg, std::mt19937_64& rng) {
    SeriesTable w;
    w.columns = {Column{"temp_c", ColumnRole::Numeric, {}, {}}, Column{"precip_mm", ColumnRole::Numeric, {}, {}},
                 Column{"conditions", ColumnRole::Categorical, {}, {}}};
    const double first = std::floor(cfg.start_epoch / kHour) * kHour;
    const double last_session_end = cfg.start_epoch + (cfg.sessions - 1) * kDay + cfg.duration_s;
    const double last = std::floor(last_session_end / kHour) * kHour;

    std::normal_distribution<double> day_offset(0.0, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> rain(1.0 / 1.5);
    ArNoise wobble(0.8, 0.7);
    double offset = day_offset(rng);
    long current_day = static_cast<long>(std::floor(first / kDay));
    for (double h = first; h <= last; h += kHour) {
        const long day = static_cast<long>(std::floor(h / kDay));
        if (day != current_day) {
            current_day = day;
            offset = day_offset(rng);
        }
        const double hour_of_day = std::fmod(h, kDay) / kHour;
        const double temp = 12.0 + 6.0 * std::sin(2.0 * std::numbers::pi * (hour_of_day - 9.0) / 24.0) + offset +
                            cfg.noise_scale * wobble.next(rng);
        const bool raining = unit(rng) < 0.15;
        const double precip = raining ? std::round(10.0 * (0.1 + rain(rng))) / 10.0 : 0.0;
        const double cloud = unit(rng);
        std::string conditions = raining        ? "Rain"
                                 : cloud < 0.40 ? "Clear"
                                 : cloud < 0.75 ? "Partially cloudy"
                                                : "Overcast";
        w.timestamps.push_back(h);
        w.session.push_back(0);
        w.columns[0].values.push_back(std::round(temp * 10.0) / 10.0);
        w.columns[1].values.push_back(precip);
        w.columns[2].labels.push_back(std::move(conditions));
    }
    return w;
}

double ambient_at(const SeriesTable& weather, double ts) {
    const auto it = std::upper_bound(weather.timestamps.begin(), weather.timestamps.end(), ts);
    return weather.columns[0].values[static_cast<std::size_t>(it - weather.timestamps.begin()) - 1];
}

}  // namespace

SyntheticData generate_synthetic(const GeneratorConfig& cfg) {
    if (cfg.sessions < 1) fail(ErrorKind::Config, "generator needs at least one session");
    if (!(cfg.duration_s >= 1.0)) fail(ErrorKind::Config, "session duration must be at least 1 s");
    if (cfg.duration_s >= kDay) fail(ErrorKind::Config, "session duration must be shorter than a day");
    if (!(cfg.missing_rate >= 0.0 && cfg.missing_rate < 0.9)) {
        fail(ErrorKind::Config, "missing rate must lie in [0, 0.9)");
    }
    if (cfg.shift.sessions < 0 || cfg.shift.sessions > cfg.sessions) {
        fail(ErrorKind::Config, "shifted session count exceeds the session count");
    }
    if (cfg.noise_scale < 0.0) fail(ErrorKind::Config, "noise scale must be non-negative");

    SyntheticData out;
    out.manifest.seed = cfg.seed;
    out.manifest.emission_gain = cfg.shift.emission_gain;
    out.manifest.temp_offset_c = cfg.shift.temp_offset_c;

    std::mt19937_64 weather_rng(mix(cfg.seed, 0));
    out.weather = make_weather(cfg, weather_rng);
    // session-start hours alternate between wet and dry
    std::exponential_distribution<double> rain(1.0 / 1.5);
    for (int s = 0; s < cfg.sessions; ++s) {
        const double hour = std::floor((cfg.start_epoch + s * kDay) / kHour) * kHour;
        const auto h = static_cast<std::size_t>(
            std::lower_bound(out.weather.timestamps.begin(), out.weather.timestamps.end(), hour) -
            out.weather.timestamps.begin());
        const bool wet = s % 2 == 0;
        out.weather.columns[1].values[h] = wet ? std::round(10.0 * (0.1 + rain(weather_rng))) / 10.0 : 0.0;
        if (wet) {
            out.weather.columns[2].labels[h] = "Rain";
        } else if (out.weather.columns[2].labels[h] == "Rain") {
            out.weather.columns[2].labels[h] = "Overcast";
        }
    }
    const int first_shifted = cfg.sessions - cfg.shift.sessions;
    for (std::size_t h = 0; h < out.weather.rows(); ++h) {
        const double ts = out.weather.timestamps[h];
        for (int s = first_shifted; s < cfg.sessions; ++s) {
            const double start = cfg.start_epoch + s * kDay;
            if (ts + kHour > start && ts <= start + cfg.duration_s) {
                out.weather.columns[0].values[h] += cfg.shift.temp_offset_c;
            }
        }
    }

    SeriesTable& e = out.emission;
    for (std::size_t c = 1; c < kEmissionHeader.size(); ++c) {
        const bool target = c >= 6;
        e.columns.push_back(
            Column{std::string(kEmissionHeader[c]), target ? ColumnRole::Target : ColumnRole::Numeric, {}, {}});
    }

    const auto steps = static_cast<long>(std::floor(cfg.duration_s));
    const double ns = cfg.noise_scale;
    for (int s = 0; s < cfg.sessions; ++s) {
        std::mt19937_64 rng(mix(cfg.seed, static_cast<std::uint64_t>(s) + 1));
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const std::array<double, 3> phi = {phase(rng), phase(rng), phase(rng)};
        const double cruise = 40.0 + 10.0 * unit(rng);
        const bool shifted = s >= first_shifted;
        const double gain = shifted ? cfg.shift.emission_gain : 1.0;
        const double start = cfg.start_epoch + s * kDay;

        ArNoise n_no(0.95, 2.0 * ns), n_no2(0.95, 0.3 * ns), n_nox(0.95, 2.2 * ns), n_co2(0.95, 0.1 * ns),
            n_co(0.95, 4.0 * ns);
        double ou = 0.0;
        double drift = 0.0;
        double prev_speed = 0.0;
        ManifestEntry entry;
        entry.id = s + 1;
        entry.first_row = e.rows();
        entry.shifted = shifted;
        for (long t = 0; t <= steps; ++t) {
            const auto td = static_cast<double>(t);
            drift += -0.1 * drift + 0.12 * ns * gauss(rng);
            ou += -0.01 * ou + drift;
            const double speed = std::max(0.0, cruise + 20.0 * std::sin(2.0 * std::numbers::pi * td / 900.0 + phi[0]) +
                                                   12.0 * std::sin(2.0 * std::numbers::pi * td / 230.0 + phi[1]) +
                                                   6.0 * std::sin(2.0 * std::numbers::pi * td / 71.0 + phi[2]) + ou);
            const double accel = t == 0 ? 0.0 : (speed - prev_speed) / 3.6;
            prev_speed = speed;
            const double ts = start + td;
            const double ambient = ambient_at(out.weather, ts);

            const double gear = std::min(5.0, 1.0 + std::floor(speed / 22.0));
            const double rpm = 750.0 + speed * 120.0 / gear + 4.0 * ns * gauss(rng);
            const double fuel = std::max(0.1, 0.5 + 0.0011 * rpm + 1.2 * std::max(accel, 0.0) * (1.0 + speed / 60.0) +
                                                  0.01 * ns * gauss(rng));
            const double coolant = 90.0 - (90.0 - ambient) * std::exp(-td / 500.0) + 0.05 * ns * gauss(rng);
            const double econ = std::clamp(speed / fuel, 0.0, 60.0);

            const double no = 40.0 + 0.035 * rpm * (1.0 + 0.4 * std::tanh(1.5 * accel)) + 1.8 * (ambient - 10.0);
            const double no2 = 5.0 + 0.004 * rpm + 4.0 * std::exp(-speed / 30.0) + 2.0 * sigmoid(-2.0 * accel);
            const double nox = 1.05 * no + no2;
            const double co2 = 7.0 + 5.0 * std::tanh(fuel / 4.0) + 0.3 * std::tanh(accel);
            const double co = 100.0 + 0.04 * rpm + 60.0 * std::pow(std::max(accel, 0.0), 2) +
                              6.0 * std::max(0.0, 18.0 - ambient) + 3.0 * std::max(0.0, 70.0 - coolant);

            const std::array<double, 10> row = {
                rpm,
                fuel,
                coolant,
                speed,
                econ,
                gain * no + n_no.next(rng),
                gain * no2 + n_no2.next(rng),
                gain * nox + n_nox.next(rng),
                gain * co2 + n_co2.next(rng),
                gain * co + n_co.next(rng),
            };
            const bool keep = t == 0 || t == steps || unit(rng) >= cfg.missing_rate;
            if (!keep) continue;
            e.timestamps.push_back(ts);
            e.session.push_back(s + 1);
            for (std::size_t c = 0; c < row.size(); ++c) e.columns[c].values.push_back(std::round(row[c] * 1e4) / 1e4);
        }
        entry.end_row = e.rows();
        entry.start = start;
        entry.end = start + static_cast<double>(steps);
        out.manifest.sessions.push_back(entry);
    }
    return out;
}

void write_synthetic(const std::filesystem::path& dir, const SyntheticData& data) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    write_emission_csv(dir / "emission.csv", data.emission);
    write_weather_csv(dir / "weather.csv", data.weather);
    write_manifest(dir / "sessions.json", data.manifest);
}

}  // namespace lru::data
