#include "flexcast/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <random>
#include <sstream>

namespace flexcast {

namespace {

struct CategoryDefaults {
  std::array<double, 24> arrival_weights;
  double connection_hours_mean;
  double connection_hours_sigma;
  double energy_kwh_mean;
  double energy_kwh_sigma;
  std::vector<double> p_max_choices_kw;
};

// Arrival shapes follow the qualitative category patterns: residential peaks
// in the evening with overnight stays, commercial peaks in the morning with
// workday stays, shared is diffuse with short sessions.
const CategoryDefaults& defaults_for(Category c) {
  static const CategoryDefaults residential{
      {0.5, 0.3, 0.2, 0.2, 0.2, 0.3, 0.5, 0.8, 1.0, 1.0, 1.0, 1.0,
       1.2, 1.2, 1.5, 2.5, 6.0, 9.0, 10.0, 9.0, 7.0, 4.5, 2.5, 1.0},
      12.0, 0.45, 9.0, 0.55, {3.7, 7.4, 11.0}};
  static const CategoryDefaults commercial{
      {0.2, 0.1, 0.1, 0.1, 0.2, 0.5, 2.0, 6.0, 10.0, 9.0, 6.0, 4.0,
       3.0, 2.5, 2.0, 1.5, 1.0, 0.8, 0.5, 0.4, 0.3, 0.3, 0.2, 0.2},
      7.0, 0.40, 12.0, 0.50, {11.0, 22.0}};
  static const CategoryDefaults shared{
      {0.8, 0.5, 0.4, 0.4, 0.5, 0.8, 1.5, 2.5, 3.0, 3.0, 3.0, 3.0,
       3.0, 3.0, 3.0, 3.0, 3.0, 3.0, 2.5, 2.0, 1.5, 1.2, 1.0, 0.9},
      3.0, 0.50, 11.0, 0.50, {7.4, 11.0, 22.0}};
  switch (c) {
    case Category::residential: return residential;
    case Category::commercial: return commercial;
    case Category::shared: return shared;
  }
  return residential;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * 0x1.0p-53;
}

double lognormal(std::mt19937_64& rng, double mean, double sigma) {
  // Box-Muller; mean is the distribution mean, not the log-scale mu
  const double u1 = std::max(uniform01(rng), 1e-300);
  const double u2 = uniform01(rng);
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  const double mu = std::log(mean) - 0.5 * sigma * sigma;
  return std::exp(mu + sigma * z);
}

int pick_weighted(std::mt19937_64& rng, const std::array<double, 24>& weights, double total) {
  double r = uniform01(rng) * total;
  for (int h = 0; h < 24; ++h) {
    r -= weights[h];
    if (r <= 0.0) return h;
  }
  return 23;
}

int poisson(std::mt19937_64& rng, double mean) {
  // inversion; fine for the small rates used here
  const double limit = std::exp(-mean);
  double product = uniform01(rng);
  int count = 0;
  while (product > limit && count < 64) {
    ++count;
    product *= uniform01(rng);
  }
  return count;
}

struct StationState {
  Category category;
  std::string id;
  std::array<std::int64_t, 2> busy_until = {0, 0};  // epoch seconds
};

}  // namespace

void FleetSpec::validate() const {
  if (category != "mixed") parse_category(category);  // throws on bad value
  if (n_stations < 0) throw ConfigError("n_stations must be >= 0");
  if (day_number(end_date) < day_number(start_date)) {
    throw ConfigError("end_date before start_date");
  }
  if (sessions_per_station_day < 0.0) throw ConfigError("sessions_per_station_day must be >= 0");
  if (p_max_choices_kw && p_max_choices_kw->empty()) {
    throw ConfigError("p_max_choices_kw must not be empty");
  }
}

FleetSpec load_fleet_spec(std::istream& in) {
  FleetSpec spec;
  std::string line;
  int line_no = 0;
  bool have_start = false, have_end = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
      if (!blank) throw ParseError("fleet spec line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto as_double = [&] {
      try {
        return std::stod(value);
      } catch (...) {
        throw ParseError("fleet spec line " + std::to_string(line_no) + ": bad number '" + value + "'");
      }
    };
    auto as_list = [&] {
      std::vector<double> out;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(trim(item)));
      return out;
    };

    if (key == "category") {
      spec.category = value;
    } else if (key == "n_stations") {
      spec.n_stations = static_cast<int>(as_double());
    } else if (key == "start_date") {
      spec.start_date = parse_date(value);
      have_start = true;
    } else if (key == "end_date") {
      spec.end_date = parse_date(value);
      have_end = true;
    } else if (key == "seed") {
      spec.seed = static_cast<std::uint64_t>(std::stoull(value));
    } else if (key == "sessions_per_station_day") {
      spec.sessions_per_station_day = as_double();
    } else if (key == "arrival_weights") {
      auto list = as_list();
      if (list.size() != 24) {
        throw ParseError("fleet spec line " + std::to_string(line_no) + ": arrival_weights needs 24 values");
      }
      std::array<double, 24> w{};
      std::copy(list.begin(), list.end(), w.begin());
      spec.arrival_weights = w;
    } else if (key == "connection_hours_mean") {
      spec.connection_hours_mean = as_double();
    } else if (key == "connection_hours_sigma") {
      spec.connection_hours_sigma = as_double();
    } else if (key == "connection_hours_max") {
      spec.connection_hours_max = as_double();
    } else if (key == "energy_kwh_mean") {
      spec.energy_kwh_mean = as_double();
    } else if (key == "energy_kwh_sigma") {
      spec.energy_kwh_sigma = as_double();
    } else if (key == "p_max_choices_kw") {
      spec.p_max_choices_kw = as_list();
    } else {
      throw ParseError("fleet spec line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!have_start || !have_end) throw ParseError("fleet spec needs start_date and end_date");
  spec.validate();
  return spec;
}

std::vector<RawTransaction> generate(const FleetSpec& spec) {
  spec.validate();

  std::vector<StationState> stations;
  stations.reserve(static_cast<std::size_t>(spec.n_stations));
  for (int s = 0; s < spec.n_stations; ++s) {
    Category cat;
    if (spec.category == "mixed") {
      // category shares of the station population: 57.6 / 31 / 11.4 %
      const double frac = spec.n_stations > 1 ? double(s) / spec.n_stations : 0.0;
      cat = frac < 0.576 ? Category::residential
                         : (frac < 0.576 + 0.31 ? Category::commercial : Category::shared);
    } else {
      cat = parse_category(spec.category);
    }
    char id[32];
    std::snprintf(id, sizeof id, "%.3s-%04d", to_string(cat).c_str(), s);
    stations.push_back(StationState{cat, id, {0, 0}});
  }

  std::vector<RawTransaction> out;
  const std::int64_t first_day = day_number(spec.start_date);
  const std::int64_t last_day = day_number(spec.end_date);
  for (std::int64_t day = first_day; day <= last_day; ++day) {
    const std::uint64_t day_seed = splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(day)));
    for (std::size_t s = 0; s < stations.size(); ++s) {
      StationState& st = stations[s];
      const CategoryDefaults& d = defaults_for(st.category);
      const auto& weights = spec.arrival_weights ? *spec.arrival_weights : d.arrival_weights;
      const double weight_total = [&] {
        double total = 0.0;
        for (double w : weights) total += w;
        return total;
      }();
      const double dur_mean = spec.connection_hours_mean.value_or(d.connection_hours_mean);
      const double dur_sigma = spec.connection_hours_sigma.value_or(d.connection_hours_sigma);
      const double e_mean = spec.energy_kwh_mean.value_or(d.energy_kwh_mean);
      const double e_sigma = spec.energy_kwh_sigma.value_or(d.energy_kwh_sigma);
      const auto& p_choices = spec.p_max_choices_kw ? *spec.p_max_choices_kw : d.p_max_choices_kw;

      std::mt19937_64 rng(splitmix64(day_seed ^ splitmix64(s)));
      const int n_sessions = poisson(rng, spec.sessions_per_station_day);
      std::vector<std::int64_t> arrivals;
      for (int k = 0; k < n_sessions; ++k) {
        const int hour = pick_weighted(rng, weights, weight_total);
        const int within = static_cast<int>(uniform01(rng) * 3600.0);
        arrivals.push_back(day * 86400 + hour * 3600 + within);
      }
      std::sort(arrivals.begin(), arrivals.end());

      for (std::int64_t arrive_sec : arrivals) {
        double duration_h = lognormal(rng, dur_mean, dur_sigma);
        duration_h = std::clamp(duration_h, 0.75, spec.connection_hours_max);
        const double p_max = p_choices[static_cast<std::size_t>(uniform01(rng) * p_choices.size()) %
                                       p_choices.size()];
        // one-step margin keeps the session feasible after rounding
        const double deliverable = p_max * std::max(0.0, std::min(duration_h, 24.0) - 0.30);
        double energy = lognormal(rng, e_mean, e_sigma);
        energy = std::clamp(energy, std::min(0.5, deliverable), deliverable);

        // two connectors per station
        int slot = -1;
        if (st.busy_until[0] <= arrive_sec) {
          slot = 0;
        } else if (st.busy_until[1] <= arrive_sec) {
          slot = 1;
        }
        if (slot < 0) continue;
        const std::int64_t depart_sec = arrive_sec + static_cast<std::int64_t>(duration_h * 3600.0);
        st.busy_until[static_cast<std::size_t>(slot)] = depart_sec;

        RawTransaction t;
        t.station_id = st.id;
        t.category = st.category;
        t.arrival = DateTime{civil_from_day_number(arrive_sec / 86400),
                             static_cast<int>(arrive_sec % 86400)};
        t.departure = DateTime{civil_from_day_number(depart_sec / 86400),
                               static_cast<int>(depart_sec % 86400)};
        t.energy_kwh = energy;
        t.max_power_kw = p_max;
        out.push_back(std::move(t));
      }
    }
  }
  return out;
}

}  // namespace flexcast
