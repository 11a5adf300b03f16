// flexcast: quantify tradable congestion-management flexibility of an EV
// charging fleet. Subcommands: synth, bau, flex, sweep, summarize.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flexcast/bau.hpp"
#include "flexcast/flex.hpp"
#include "flexcast/metrics.hpp"
#include "flexcast/sweep.hpp"
#include "flexcast/synth.hpp"
#include "flexcast/version.hpp"

namespace {

using namespace flexcast;

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  return out;
}

int parse_hhmm_arg(const std::string& text) {
  int hh = 0, mm = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d:%d%c", &hh, &mm, &extra) != 2 || hh < 0 || hh > 23 ||
      mm < 0 || mm > 59) {
    throw ParseError("invalid --window-start '" + text + "', expected HH:MM");
  }
  return hh * 60 + mm;
}

struct DayInputs {
  TimeGrid grid;
  std::vector<Transaction> transactions;
  std::shared_ptr<Signal> price;
  std::shared_ptr<Signal> mef;
  int n_excluded = 0;
};

DayInputs load_day(const std::string& date_text, const std::string& transactions_path,
                   const std::string& price_path, const std::string& mef_path, bool v2g,
                   const std::string& category) {
  DayInputs day{TimeGrid::three_day(parse_date(date_text)), {}, nullptr, nullptr, 0};
  auto tx_in = open_input(transactions_path);
  const auto raws = parse_transactions(tx_in);
  std::vector<RawTransaction> in_window;
  const std::int64_t d0 = day_number(day.grid.anchor_date);
  for (const auto& raw : raws) {
    const std::int64_t d = day_number(raw.arrival.date);
    if (d == d0 || d == d0 - 1) in_window.push_back(raw);
  }
  auto report = discretize_all(in_window, day.grid, v2g);
  day.n_excluded = report.n_excluded;
  day.transactions = sample_day(report.transactions, day.grid);
  if (category != "all") {
    const Category want = parse_category(category);
    std::erase_if(day.transactions, [&](const Transaction& t) { return t.category != want; });
  }
  if (!price_path.empty()) {
    auto in = open_input(price_path);
    day.price = std::make_shared<Signal>(load_signal(in, SignalKind::day_ahead_price, day.grid));
  }
  if (!mef_path.empty()) {
    auto in = open_input(mef_path);
    day.mef = std::make_shared<Signal>(load_signal(in, SignalKind::mef, day.grid));
  }
  return day;
}

BauStrategy make_strategy(const std::string& name, const DayInputs& day) {
  BauStrategy strategy;
  strategy.kind = parse_bau_kind(name);
  if (strategy.kind == BauKind::cost_min) strategy.signal = day.price;
  if (strategy.kind == BauKind::mef_min) strategy.signal = day.mef;
  strategy.validate();
  return strategy;
}

int run(int argc, char** argv) {
  CLI::App app{"EV fleet flexibility simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic transaction CSV");
  std::string synth_spec, synth_out;
  synth_cmd->add_option("--spec", synth_spec, "fleet spec file (key = value)")->required();
  synth_cmd->add_option("--out", synth_out, "output CSV path")->required();

  // ---- bau ----
  auto* bau_cmd = app.add_subcommand("bau", "compute a business-as-usual schedule");
  std::string bau_date, bau_tx, bau_prices, bau_mef, bau_strategy = "unopt", bau_category = "all";
  std::string bau_out, bau_agg_out, bau_hourly_out, bau_peaks_out, bau_dump_lp;
  bool bau_v2g = false;
  bau_cmd->add_option("--date", bau_date, "sample date YYYY-MM-DD")->required();
  bau_cmd->add_option("--transactions", bau_tx, "transaction CSV")->required();
  bau_cmd->add_option("--prices", bau_prices, "day-ahead price CSV");
  bau_cmd->add_option("--mef", bau_mef, "MEF CSV");
  bau_cmd->add_option("--bau", bau_strategy, "strategy: cost|mef|unopt");
  bau_cmd->add_option("--category", bau_category, "restrict to a station category");
  bau_cmd->add_flag("--v2g", bau_v2g, "bidirectional charging");
  bau_cmd->add_option("--out", bau_out, "schedule CSV (transaction_id,step,power_kw)");
  bau_cmd->add_option("--aggregate-out", bau_agg_out, "aggregate profile CSV (step,power_kw)");
  bau_cmd->add_option("--hourly-cost-out", bau_hourly_out, "hourly average cost CSV");
  bau_cmd->add_option("--peaks-out", bau_peaks_out, "daily peak CSV");
  bau_cmd->add_option("--dump-lp", bau_dump_lp, "write the dispatch LP in LP text format");

  // ---- flex ----
  auto* flex_cmd = app.add_subcommand("flex", "solve one flexibility product");
  std::string flex_date, flex_tx, flex_prices, flex_mef, flex_product, flex_bau = "unopt";
  std::string flex_window_start, flex_category = "all", flex_out, flex_schedule_out;
  double flex_lead = 1.0, flex_window_len = 1.0;
  bool flex_v2g = false;
  flex_cmd->add_option("--date", flex_date, "sample date YYYY-MM-DD")->required();
  flex_cmd->add_option("--transactions", flex_tx, "transaction CSV")->required();
  flex_cmd->add_option("--prices", flex_prices, "day-ahead price CSV");
  flex_cmd->add_option("--mef", flex_mef, "MEF CSV");
  flex_cmd->add_option("--product", flex_product, "redispatch|caplimit")->required();
  flex_cmd->add_option("--lead-h", flex_lead, "lead time in hours")->required();
  flex_cmd->add_option("--window-start", flex_window_start, "window start HH:MM")->required();
  flex_cmd->add_option("--window-len-h", flex_window_len, "window length in hours")->required();
  flex_cmd->add_option("--bau", flex_bau, "BAU strategy: cost|mef|unopt");
  flex_cmd->add_option("--category", flex_category, "restrict to a station category");
  flex_cmd->add_flag("--v2g", flex_v2g, "bidirectional charging");
  flex_cmd->add_option("--out", flex_out, "result row CSV (default stdout)");
  flex_cmd->add_option("--schedule-out", flex_schedule_out, "adjusted schedule CSV");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment sweep from a JSON config");
  std::string sweep_config;
  sweep_cmd->add_option("--config", sweep_config, "sweep config JSON")->required();

  // ---- summarize ----
  auto* sum_cmd = app.add_subcommand("summarize", "aggregate a sweep result CSV");
  std::string sum_in, sum_out, sum_group;
  sum_cmd->add_option("--in", sum_in, "sweep result CSV")->required();
  sum_cmd->add_option("--group-by", sum_group, "comma-separated keys")->required();
  sum_cmd->add_option("--out", sum_out, "summary CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  if (synth_cmd->parsed()) {
    auto spec_in = open_input(synth_spec);
    const FleetSpec spec = load_fleet_spec(spec_in);
    const auto rows = generate(spec);
    auto out = open_output(synth_out);
    write_transactions_csv(out, rows);
    std::cerr << "wrote " << rows.size() << " transactions to " << synth_out << "\n";
    return 0;
  }

  if (bau_cmd->parsed()) {
    const DayInputs day = load_day(bau_date, bau_tx, bau_prices, bau_mef, bau_v2g, bau_category);
    const BauStrategy strategy = make_strategy(bau_strategy, day);
    if (!bau_dump_lp.empty()) {
      auto [lp, layout] = build_feasibility(day.transactions, day.grid);
      apply_bau_objective(lp, layout, day.transactions, day.grid, strategy);
      auto out = open_output(bau_dump_lp);
      lp.write_lp_format(out, &layout);
    }
    const Schedule schedule = schedule_bau(day.transactions, day.grid, strategy);
    if (!bau_out.empty()) {
      auto out = open_output(bau_out);
      write_schedule_csv(out, schedule);
    }
    if (!bau_agg_out.empty()) {
      auto out = open_output(bau_agg_out);
      out << "step,power_kw\n";
      const auto agg = aggregate_profile(schedule);
      char buf[48];
      for (std::size_t t = 0; t < agg.size(); ++t) {
        std::snprintf(buf, sizeof buf, "%zu,%.9g\n", t, agg[t]);
        out << buf;
      }
    }
    if (!bau_hourly_out.empty()) {
      if (!day.price) throw ConfigError("--hourly-cost-out requires --prices");
      const DayRecord rec{&schedule, day.price.get()};
      auto out = open_output(bau_hourly_out);
      write_hourly_csv(out, hourly_avg_cost({&rec, 1}));
    }
    if (!bau_peaks_out.empty()) {
      const Schedule* sp = &schedule;
      auto out = open_output(bau_peaks_out);
      const auto peaks = daily_peak_by_hour({&sp, 1});
      write_peaks_csv(out, peaks);
    }
    std::cerr << "scheduled " << schedule.n_transactions() << " transactions ("
              << day.n_excluded << " excluded by rounding)\n";
    return 0;
  }

  if (flex_cmd->parsed()) {
    const DayInputs day =
        load_day(flex_date, flex_tx, flex_prices, flex_mef, flex_v2g, flex_category);
    const BauStrategy strategy = make_strategy(flex_bau, day);
    const Schedule bau = schedule_bau(day.transactions, day.grid, strategy);
    FlexRequest request;
    request.product = parse_flex_product(flex_product);
    request.window_start_step =
        day.grid.anchor_day_begin() + parse_hhmm_arg(flex_window_start) / day.grid.step_minutes;
    request.window_len_steps =
        static_cast<int>(std::llround(flex_window_len / day.grid.dt_hours()));
    request.lead_time_hours = flex_lead;
    request.v2g = flex_v2g;
    if (!request.lead_time_in_studied_range()) {
      std::cerr << "note: lead time " << flex_lead << " h is outside the usual 1-23 h range\n";
    }
    const FlexResult res =
        request.product == FlexProduct::redispatch
            ? solve_redispatch(bau, day.transactions, request, day.price.get(), day.mef.get())
            : solve_capacity_limit(bau, day.transactions, request, day.price.get(),
                                   day.mef.get());

    ResultRow row;
    row.date = day.grid.anchor_date;
    row.category = flex_category;
    row.product = request.product;
    row.bau = strategy.kind;
    row.v2g = flex_v2g;
    row.window_start_minutes = parse_hhmm_arg(flex_window_start);
    row.window_len_h = flex_window_len;
    row.lead_h = flex_lead;
    row.magnitude_kw = res.magnitude_kw;
    row.cost_delta = res.cost_delta;
    row.emission_delta = res.emission_delta;
    row.status = to_string(res.status);
    if (flex_out.empty()) {
      write_results_csv(std::cout, {&row, 1});
    } else {
      auto out = open_output(flex_out);
      write_results_csv(out, {&row, 1});
    }
    if (!flex_schedule_out.empty()) {
      auto out = open_output(flex_schedule_out);
      write_schedule_csv(out, res.adjusted);
    }
    return 0;
  }

  if (sweep_cmd->parsed()) {
    auto in = open_input(sweep_config);
    const SweepConfig config = load_sweep_config(in);
    const SweepOutput out = run_sweep(config);
    if (config.out_csv.empty()) write_results_csv(std::cout, out.rows);
    std::cerr << out.rows.size() << " rows, " << out.n_failed << " failed cells\n";
    return out.n_failed == 0 ? 0 : 2;
  }

  if (sum_cmd->parsed()) {
    auto in = open_input(sum_in);
    const auto rows = read_results_csv(in);
    std::vector<std::string> keys;
    std::stringstream ss(sum_group);
    std::string item;
    while (std::getline(ss, item, ',')) keys.push_back(item);
    const auto summary = summarize(rows, keys);
    if (sum_out.empty()) {
      write_summary_csv(std::cout, keys, summary);
    } else {
      auto out = open_output(sum_out);
      write_summary_csv(out, keys, summary);
    }
    return 0;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    nlohmann::json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
}
