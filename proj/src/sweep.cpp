#include "flexcast/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "csv.hpp"
#include "flexcast/version.hpp"

namespace flexcast {

namespace {

using nlohmann::json;

int parse_hhmm(const std::string& text) {
  int hh = 0, mm = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d:%d%c", &hh, &mm, &extra) != 2 || hh < 0 || hh > 23 ||
      mm < 0 || mm > 59) {
    throw ParseError("invalid time of day '" + text + "', expected HH:MM");
  }
  return hh * 60 + mm;
}

std::string format_hhmm(int minutes) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d", minutes / 60, minutes % 60);
  return buf;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct CellSpec {
  std::string category;
  BauKind bau;
  FlexProduct product;
  bool v2g;
  int wstart_min;
  double wlen_h;
  double lead_h;
};

std::vector<CellSpec> enumerate_cells(const SweepConfig& c) {
  std::vector<CellSpec> cells;
  for (const auto& cat : c.categories) {
    for (BauKind bau : c.strategies) {
      for (FlexProduct product : c.products) {
        for (bool v2g : c.v2g_flags) {
          for (int ws : c.window_start_minutes) {
            for (double wl : c.window_lens_h) {
              for (double lead : c.lead_times_h) {
                cells.push_back(CellSpec{cat, bau, product, v2g, ws, wl, lead});
              }
            }
          }
        }
      }
    }
  }
  return cells;
}

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return text;
}

double quantile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = p * (static_cast<double>(sorted.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

void SweepConfig::validate() const {
  if (dates.empty()) throw ConfigError("sweep config: no dates");
  if (categories.empty()) throw ConfigError("sweep config: no categories");
  for (const auto& c : categories) {
    if (c != "all") parse_category(c);
  }
  if (strategies.empty()) throw ConfigError("sweep config: no strategies");
  if (products.empty()) throw ConfigError("sweep config: no products");
  if (lead_times_h.empty()) throw ConfigError("sweep config: no lead times");
  if (window_start_minutes.empty()) throw ConfigError("sweep config: no window starts");
  if (window_lens_h.empty()) throw ConfigError("sweep config: no window lengths");
  if (v2g_flags.empty()) throw ConfigError("sweep config: no v2g flags");
  if (transactions_csv.empty() == fleet_spec_path.empty()) {
    throw ConfigError("sweep config: exactly one of transactions_csv and fleet_spec is required");
  }
  if (price_csv.empty() || mef_csv.empty()) {
    throw ConfigError("sweep config: price_csv and mef_csv are required");
  }
  for (int ws : window_start_minutes) {
    if (ws < 0 || ws >= 24 * 60 || ws % 15 != 0) {
      throw ConfigError("window start must be a 15-minute-aligned time of day");
    }
    for (double wl : window_lens_h) {
      const double steps = wl / 0.25;
      if (wl <= 0.0 || std::abs(steps - std::round(steps)) > 1e-9) {
        throw ConfigError("window length must be a positive multiple of 0.25 h");
      }
      if (ws + static_cast<int>(std::llround(wl * 60.0)) > 24 * 60) {
        throw ConfigError("flexibility window must end within the sample day");
      }
    }
  }
  for (double lead : lead_times_h) {
    const double steps = lead / 0.25;
    if (lead <= 0.0 || std::abs(steps - std::round(steps)) > 1e-9) {
      throw ConfigError("lead time must be a positive multiple of 0.25 h");
    }
  }
}

SweepConfig load_sweep_config(std::istream& json_in) {
  json j;
  try {
    j = json::parse(json_in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep config is not valid JSON: ") + e.what());
  }
  SweepConfig c;
  try {
    if (j.contains("dates")) {
      for (const auto& d : j.at("dates")) c.dates.push_back(parse_date(d.get<std::string>()));
    } else {
      const CivilDate start = parse_date(j.at("start_date").get<std::string>());
      const CivilDate end = parse_date(j.at("end_date").get<std::string>());
      for (std::int64_t d = day_number(start); d <= day_number(end); ++d) {
        c.dates.push_back(civil_from_day_number(d));
      }
    }
    if (j.contains("categories")) {
      c.categories = j.at("categories").get<std::vector<std::string>>();
    }
    for (const auto& s : j.at("strategies")) c.strategies.push_back(parse_bau_kind(s.get<std::string>()));
    for (const auto& p : j.at("products")) c.products.push_back(parse_flex_product(p.get<std::string>()));
    c.lead_times_h = j.at("lead_times_h").get<std::vector<double>>();
    for (const auto& w : j.at("window_starts")) {
      c.window_start_minutes.push_back(parse_hhmm(w.get<std::string>()));
    }
    c.window_lens_h = j.at("window_lens_h").get<std::vector<double>>();
    if (j.contains("v2g")) c.v2g_flags = j.at("v2g").get<std::vector<bool>>();
    if (j.contains("transactions_csv")) c.transactions_csv = j.at("transactions_csv").get<std::string>();
    if (j.contains("fleet_spec")) c.fleet_spec_path = j.at("fleet_spec").get<std::string>();
    c.price_csv = j.at("price_csv").get<std::string>();
    c.mef_csv = j.at("mef_csv").get<std::string>();
    if (j.contains("out_csv")) c.out_csv = j.at("out_csv").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("sweep config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

std::vector<RawTransaction> load_inputs(const SweepConfig& config) {
  if (!config.transactions_csv.empty()) {
    std::ifstream in(config.transactions_csv);
    if (!in) throw ConfigError("cannot open transactions CSV '" + config.transactions_csv + "'");
    return parse_transactions(in);
  }
  std::ifstream in(config.fleet_spec_path);
  if (!in) throw ConfigError("cannot open fleet spec '" + config.fleet_spec_path + "'");
  return generate(load_fleet_spec(in));
}

SignalRows load_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open signal CSV '" + path + "'");
  return parse_signal_csv(in);
}

ResultRow make_row(const CivilDate& date, const CellSpec& cell) {
  ResultRow row;
  row.date = date;
  row.category = cell.category;
  row.product = cell.product;
  row.bau = cell.bau;
  row.v2g = cell.v2g;
  row.window_start_minutes = cell.wstart_min;
  row.window_len_h = cell.wlen_h;
  row.lead_h = cell.lead_h;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  row.magnitude_kw = nan;
  row.cost_delta = nan;
  row.emission_delta = nan;
  return row;
}

}  // namespace

SweepOutput run_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<RawTransaction> raws = load_inputs(config);
  const SignalRows price_rows = load_rows(config.price_csv);
  const SignalRows mef_rows = load_rows(config.mef_csv);
  const std::vector<CellSpec> cells = enumerate_cells(config);

  std::vector<std::vector<ResultRow>> per_date(config.dates.size());

  auto run_date = [&](std::size_t date_idx) {
    const CivilDate date = config.dates[date_idx];
    const TimeGrid grid = TimeGrid::three_day(date);
    auto& rows = per_date[date_idx];
    rows.reserve(cells.size());

    std::shared_ptr<Signal> price, mef;
    try {
      price = std::make_shared<Signal>(align_signal(price_rows, SignalKind::day_ahead_price, grid));
      mef = std::make_shared<Signal>(align_signal(mef_rows, SignalKind::mef, grid));
    } catch (const std::exception& e) {
      for (const auto& cell : cells) {
        ResultRow row = make_row(date, cell);
        row.status = "error: " + sanitize(e.what());
        rows.push_back(std::move(row));
      }
      return;
    }

    // arrivals on the sample date or the previous day
    std::vector<RawTransaction> window_raws;
    const std::int64_t d0 = day_number(date);
    for (const auto& raw : raws) {
      const std::int64_t d = day_number(raw.arrival.date);
      if (d == d0 || d == d0 - 1) window_raws.push_back(raw);
    }

    std::map<bool, std::vector<Transaction>> sampled;
    for (bool v2g : {false, true}) {
      sampled[v2g] = sample_day(discretize_all(window_raws, grid, v2g).transactions, grid);
    }

    // BAU computed once per (strategy, v2g, category) and shared across cells
    std::map<std::tuple<std::string, BauKind, bool>, Schedule> bau_cache;
    std::map<std::pair<std::string, bool>, std::vector<Transaction>> tx_cache;
    auto transactions_for = [&](const std::string& category, bool v2g)
        -> const std::vector<Transaction>& {
      auto key = std::make_pair(category, v2g);
      auto it = tx_cache.find(key);
      if (it != tx_cache.end()) return it->second;
      std::vector<Transaction> txs;
      if (category == "all") {
        txs = sampled[v2g];
      } else {
        const Category want = parse_category(category);
        for (const auto& tx : sampled[v2g]) {
          if (tx.category == want) txs.push_back(tx);
        }
      }
      return tx_cache.emplace(key, std::move(txs)).first->second;
    };
    auto bau_for = [&](const std::string& category, BauKind kind, bool v2g) -> const Schedule& {
      auto key = std::make_tuple(category, kind, v2g);
      auto it = bau_cache.find(key);
      if (it != bau_cache.end()) return it->second;
      BauStrategy strategy;
      strategy.kind = kind;
      if (kind == BauKind::cost_min) strategy.signal = price;
      if (kind == BauKind::mef_min) strategy.signal = mef;
      Schedule s = schedule_bau(transactions_for(category, v2g), grid, strategy);
      return bau_cache.emplace(key, std::move(s)).first->second;
    };

    for (const auto& cell : cells) {
      ResultRow row = make_row(date, cell);
      try {
        const Schedule& bau = bau_for(cell.category, cell.bau, cell.v2g);
        FlexRequest request;
        request.product = cell.product;
        request.window_start_step = grid.anchor_day_begin() + cell.wstart_min / grid.step_minutes;
        request.window_len_steps = static_cast<int>(std::llround(cell.wlen_h / grid.dt_hours()));
        request.lead_time_hours = cell.lead_h;
        request.v2g = cell.v2g;
        const auto& txs = transactions_for(cell.category, cell.v2g);
        FlexResult res = cell.product == FlexProduct::redispatch
                             ? solve_redispatch(bau, txs, request, price.get(), mef.get())
                             : solve_capacity_limit(bau, txs, request, price.get(), mef.get());
        row.magnitude_kw = res.magnitude_kw;
        row.cost_delta = res.cost_delta;
        row.emission_delta = res.emission_delta;
        row.status = to_string(res.status);
      } catch (const std::exception& e) {
        row.status = "error: " + sanitize(e.what());
      }
      rows.push_back(std::move(row));
    }
  };

  unsigned n_workers = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                          : std::max(1u, std::thread::hardware_concurrency());
  n_workers = std::min<unsigned>(n_workers, static_cast<unsigned>(config.dates.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.dates.size()) break;
      run_date(i);
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  SweepOutput out;
  for (auto& rows : per_date) {
    for (auto& row : rows) out.rows.push_back(std::move(row));
  }
  std::stable_sort(out.rows.begin(), out.rows.end(), [](const ResultRow& a, const ResultRow& b) {
    const auto key = [](const ResultRow& r) {
      return std::make_tuple(day_number(r.date), r.category, static_cast<int>(r.bau),
                             static_cast<int>(r.product), r.v2g, r.window_start_minutes,
                             r.window_len_h, r.lead_h);
    };
    return key(a) < key(b);
  });
  for (const auto& row : out.rows) {
    if (row.status != "optimal") ++out.n_failed;
  }

  {
    json echo;
    echo["dates"] = config.dates.size();
    echo["cells_per_date"] = cells.size();
    echo["transactions_csv"] = config.transactions_csv;
    echo["fleet_spec"] = config.fleet_spec_path;
    echo["price_csv"] = config.price_csv;
    echo["mef_csv"] = config.mef_csv;
    out.config_hash = fnv1a_hex(echo.dump());
  }

  if (!config.out_csv.empty()) {
    std::ofstream csv(config.out_csv, std::ios::binary);
    if (!csv) throw ConfigError("cannot write results to '" + config.out_csv + "'");
    write_results_csv(csv, out.rows);

    json meta;
    meta["config_hash"] = out.config_hash;
    meta["tool_version"] = kVersion;
    meta["rows"] = out.rows.size();
    meta["failed_cells"] = out.n_failed;
    meta["columns"] = {"date", "product", "bau", "v2g", "window_start", "window_len",
                       "lead_h", "magnitude_kw", "cost_delta", "emission_delta", "status",
                       "category"};
    std::ofstream side(config.out_csv + ".meta.json", std::ios::binary);
    side << meta.dump(2) << '\n';
  }
  return out;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "date,product,bau,v2g,window_start,window_len,lead_h,magnitude_kw,cost_delta,"
         "emission_delta,status,category\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%s,%s,%g,%g,%.9g,%.9g,%.9g,",
                  format_date(r.date).c_str(), to_string(r.product).c_str(),
                  to_string(r.bau).c_str(), r.v2g ? "true" : "false",
                  format_hhmm(r.window_start_minutes).c_str(), r.window_len_h, r.lead_h,
                  r.magnitude_kw, r.cost_delta, r.emission_delta);
    out << buf << r.status << ',' << r.category << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  CsvReader reader(in, {"date", "product", "bau", "v2g", "window_start", "window_len", "lead_h",
                        "magnitude_kw", "cost_delta", "emission_delta", "status", "category"});
  std::vector<ResultRow> rows;
  while (reader.next_row()) {
    ResultRow r;
    r.date = parse_date(reader.field("date"));
    r.product = parse_flex_product(reader.field("product"));
    r.bau = parse_bau_kind(reader.field("bau"));
    r.v2g = reader.field("v2g") == "true";
    r.window_start_minutes = parse_hhmm(reader.field("window_start"));
    r.window_len_h = reader.double_field("window_len");
    r.lead_h = reader.double_field("lead_h");
    r.magnitude_kw = reader.double_field("magnitude_kw");
    r.cost_delta = reader.double_field("cost_delta");
    r.emission_delta = reader.double_field("emission_delta");
    r.status = reader.field("status");
    r.category = reader.field("category");
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

std::string key_value(const ResultRow& r, const std::string& key) {
  char buf[32];
  if (key == "date") return format_date(r.date);
  if (key == "category") return r.category;
  if (key == "product") return to_string(r.product);
  if (key == "bau") return to_string(r.bau);
  if (key == "v2g") return r.v2g ? "true" : "false";
  if (key == "window_start") return format_hhmm(r.window_start_minutes);
  if (key == "window_len") {
    std::snprintf(buf, sizeof buf, "%g", r.window_len_h);
    return buf;
  }
  if (key == "lead_h") {
    std::snprintf(buf, sizeof buf, "%g", r.lead_h);
    return buf;
  }
  throw ConfigError("unknown group-by key '" + key + "'");
}

std::string pair_key(const ResultRow& r) {
  return format_date(r.date) + '|' + r.category + '|' + to_string(r.product) + '|' +
         to_string(r.bau) + '|' + (r.v2g ? "t" : "f") + '|' +
         format_hhmm(r.window_start_minutes) + '|' + std::to_string(r.window_len_h);
}

}  // namespace

std::vector<SummaryRow> summarize(std::span<const ResultRow> rows,
                                  const std::vector<std::string>& group_keys) {
  if (rows.empty()) throw ConfigError("summarize: empty result table");
  for (const auto& key : group_keys) key_value(rows[0], key);  // validate keys

  std::map<std::vector<std::string>, std::vector<const ResultRow*>> groups;
  for (const auto& row : rows) {
    std::vector<std::string> key;
    key.reserve(group_keys.size());
    for (const auto& k : group_keys) key.push_back(key_value(row, k));
    groups[key].push_back(&row);
  }

  std::vector<SummaryRow> out;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.group = key;
    std::vector<double> values;
    struct Pair {
      double c1 = std::numeric_limits<double>::quiet_NaN();
      double c23 = std::numeric_limits<double>::quiet_NaN();
    };
    std::map<std::string, Pair> pairs;
    for (const ResultRow* r : members) {
      if (r->status != "optimal") continue;
      values.push_back(r->magnitude_kw);
      if (r->lead_h == 1.0) pairs[pair_key(*r)].c1 = r->magnitude_kw;
      if (r->lead_h == 23.0) pairs[pair_key(*r)].c23 = r->magnitude_kw;
    }
    s.count = static_cast<long>(values.size());
    if (values.empty()) {
      s.mean = s.stddev = s.min = s.max = s.q05 = s.q25 = s.q50 = s.q75 = s.q95 = nan;
    } else {
      double sum = 0.0;
      for (double v : values) sum += v;
      s.mean = sum / static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - s.mean) * (v - s.mean);
      s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
      std::sort(values.begin(), values.end());
      s.min = values.front();
      s.max = values.back();
      s.q05 = quantile(values, 0.05);
      s.q25 = quantile(values, 0.25);
      s.q50 = quantile(values, 0.50);
      s.q75 = quantile(values, 0.75);
      s.q95 = quantile(values, 0.95);
    }
    double delta_sum = 0.0;
    long delta_count = 0;
    for (const auto& [pk, pair] : pairs) {
      (void)pk;
      if (!std::isnan(pair.c1) && !std::isnan(pair.c23)) {
        delta_sum += pair.c23 - pair.c1;
        ++delta_count;
      }
    }
    s.paired_delta_23h_minus_1h = delta_count > 0 ? delta_sum / delta_count : nan;
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<std::string>& group_keys,
                       std::span<const SummaryRow> rows) {
  for (const auto& k : group_keys) out << k << ',';
  out << "count,mean,std,min,max,q05,q25,q50,q75,q95,paired_delta_23h_minus_1h\n";
  char buf[256];
  for (const auto& r : rows) {
    for (const auto& g : r.group) out << g << ',';
    std::snprintf(buf, sizeof buf, "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                  r.count, r.mean, r.stddev, r.min, r.max, r.q05, r.q25, r.q50, r.q75, r.q95,
                  r.paired_delta_23h_minus_1h);
    out << buf;
  }
}

}  // namespace flexcast
