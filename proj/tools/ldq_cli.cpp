// Command-line front end: analytic rates, simulation with tail fits, the
// critical-job-size curve and the validation suite.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ldq/ldq.hpp"

namespace {

using ldq::json;

enum Exit { kOk = 0, kConfig = 1, kUnstable = 2, kNumerical = 3, kValidationFailed = 4 };

int exit_code(ldq::Errc c) {
  switch (c) {
    case ldq::Errc::unstable: return kUnstable;
    case ldq::Errc::numerical_failure:
    case ldq::Errc::overflow:
    case ldq::Errc::degenerate_tail:
    case ldq::Errc::tilt_unavailable: return kNumerical;
    default: return kConfig;
  }
}

ldq::QueueModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ldq::Error(ldq::Errc::invalid_argument, "cannot open model file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ldq::Error(ldq::Errc::invalid_argument, std::string("malformed model JSON: ") + e.what());
  }
  return ldq::model_from_json(j);
}

/// Writes to --out when given, else stdout.
void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw ldq::Error(ldq::Errc::invalid_argument, "cannot write '" + out_path + "'");
  os << text;
}

struct Grid {
  double lo;
  double hi;
  double step;
};

Grid parse_grid(const std::string& text) {
  Grid g{};
  char c1 = 0, c2 = 0;
  std::istringstream is(text);
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.step) || c1 != ':' || c2 != ':' || !is.eof() ||
      !(g.step > 0.0) || !(g.lo <= g.hi) || !(g.lo > 0.0) || !(g.hi < 1.0)) {
    throw ldq::Error(ldq::Errc::invalid_argument,
                     "--rho-grid must look like a:b:step with 0 < a <= b < 1 and step > 0");
  }
  return g;
}

// ---------------------------------------------------------------------------

struct RatesArgs {
  std::string model;
  bool ystar = false;
  std::string output = "json";
  std::string out;
};

int cmd_rates(const RatesArgs& args) {
  const auto model = load_model(args.model);
  const auto report = ldq::analyze(model);
  json doc = ldq::to_json(report);
  if (args.ystar) {
    const auto ys = ldq::y_star(model);
    doc["y_star"] = ys.y;
    doc["p_b_gt_y_star"] = ys.tail;
  }
  if (args.output == "csv") {
    std::ostringstream os;
    os << "key,value\n";
    for (const auto& [key, value] : doc.items()) os << key << ',' << value.dump() << '\n';
    emit(args.out, os.str());
  } else {
    emit(args.out, doc.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string model;
  std::string discipline = "fifo";
  std::int64_t customers = 1000000;
  std::uint64_t seed = 1;
  double warmup = 0.2;
  double bins = 0.0;  // 0 selects 0.1 * E[B]
  double tolerance = 0.15;
  std::string output = "json";
  std::string out;
};

json fit_entry(std::vector<double> samples, std::optional<double> analytic, double tol) {
  try {
    const auto fit = ldq::fit_decay(std::move(samples));
    json j{{"fit", ldq::to_json(fit)}};
    if (analytic && std::isfinite(*analytic)) {
      j["comparison"] = ldq::to_json(ldq::compare_rates(*analytic, fit, tol));
    }
    return j;
  } catch (const ldq::Error& e) {
    if (e.code() != ldq::Errc::degenerate_tail) throw;
    return json{{"fit", nullptr}, {"error", e.what()}};
  }
}

int cmd_simulate(const SimulateArgs& args) {
  const auto model = load_model(args.model);
  model.require_stable();
  const auto d = ldq::parse_discipline(args.discipline);
  const auto input = ldq::generate_input(model, args.customers, args.seed);
  const auto out = ldq::simulate(input, d, args.warmup);

  if (args.output == "csv") {
    std::ostringstream customers;
    ldq::write_customers_csv(customers, out);
    emit(args.out, customers.str());
    if (!args.out.empty()) {
      std::ofstream busy(args.out + ".busy.csv");
      ldq::write_busy_periods_csv(busy, out);
    }
    return kOk;
  }

  std::optional<ldq::DecayReport> report;
  if (model.has_delays()) report = ldq::analyze(model);

  std::vector<double> waiting, sojourn, waiting2, sojourn2;
  double sum_w = 0.0, sum_v = 0.0;
  for (const auto& r : out.records) {
    waiting.push_back(r.delay());
    sojourn.push_back(r.sojourn());
    sum_w += r.delay();
    sum_v += r.sojourn();
    if (r.cls == 2) {
      waiting2.push_back(r.delay());
      sojourn2.push_back(r.sojourn());
    }
  }
  double busy_sum = 0.0;
  for (const auto& p : out.busy_periods) busy_sum += p.duration;
  const double n_rec = static_cast<double>(out.records.size());

  json doc;
  doc["model"] = ldq::to_json(model);
  doc["discipline"] = ldq::discipline_name(d);
  doc["customers"] = args.customers;
  doc["seed"] = args.seed;
  doc["warmup"] = args.warmup;
  doc["summary"] = {
      {"served", out.served},
      {"records", out.records.size()},
      {"simulated_time", out.simulated_time},
      {"mean_waiting", sum_w / n_rec},
      {"mean_sojourn", sum_v / n_rec},
      {"busy_periods", out.busy_periods.size()},
      {"mean_busy_period", out.busy_periods.empty() ? json(nullptr)
                                                    : json(busy_sum / out.busy_periods.size())},
      {"max_workload_drift", out.max_workload_drift},
      {"max_busy_period_drift", out.max_busy_drift},
  };
  doc["analytic"] = report ? ldq::to_json(*report) : json(nullptr);

  // Theory targets per discipline: FIFO waits/sojourns decay like the
  // workload, LIFO-PR like the busy period, SRPT at gamma_v, priority class 2
  // at gamma_w2 (of the explicit split, else of the endpoint-atom classes).
  std::optional<double> target_w, target_v, target_2;
  if (report) {
    switch (d) {
      case ldq::Discipline::fifo:
        target_w = report->gamma_w;
        target_v = report->gamma_w;
        break;
      case ldq::Discipline::lifo_pr: target_v = report->gamma_p; break;
      case ldq::Discipline::srpt_pr:
      case ldq::Discipline::srpt_np: target_v = report->gamma_v; break;
      case ldq::Discipline::prio_pr:
      case ldq::Discipline::prio_np:
        target_2 = report->gamma_w2 ? report->gamma_w2 : report->gamma_v;
        break;
    }
  }
  json fits;
  fits["waiting"] = fit_entry(waiting, target_w, args.tolerance);
  fits["sojourn"] = fit_entry(sojourn, target_v, args.tolerance);
  if (!waiting2.empty()) {
    fits["class2_waiting"] = fit_entry(waiting2, target_2, args.tolerance);
    fits["class2_sojourn"] = fit_entry(sojourn2, target_2, args.tolerance);
  }
  doc["fits"] = fits;

  json verdicts = json::object();
  for (const auto& [name, entry] : fits.items()) {
    if (entry.contains("comparison")) verdicts[name] = entry["comparison"]["pass"];
  }
  doc["verdicts"] = verdicts;

  // Sojourn decay conditional on the job size, against gamma_p^y.
  if (d == ldq::Discipline::srpt_pr || d == ldq::Discipline::srpt_np) {
    const double width = args.bins > 0.0 ? args.bins : 0.1 * ldq::mean(model.service());
    std::vector<std::vector<double>> buckets;
    for (const auto& r : out.records) {
      const auto k = static_cast<std::size_t>(r.service / width);
      if (k >= buckets.size()) buckets.resize(k + 1);
      buckets[k].push_back(r.sojourn());
    }
    json rows = json::array();
    for (std::size_t k = 0; k < buckets.size(); ++k) {
      if (buckets[k].empty()) continue;
      const double lo = k * width;
      const double hi = lo + width;
      const double mid = 0.5 * (lo + hi);
      json row{{"lo", lo}, {"hi", hi}, {"count", buckets[k].size()}};
      // Jobs of the endpoint-atom size decay at gamma_v; elsewhere at gamma_p^y.
      std::optional<double> target;
      const bool atom_bin = report && report->q > 0.0 && lo <= report->x_b && report->x_b < hi;
      if (atom_bin) {
        target = report->gamma_v;
      } else if (report) {
        target = ldq::gamma_p_trunc(model, mid);
      }
      row["atom"] = atom_bin;
      row["target"] = ldq::detail::num_or_null(target);
      row.update(fit_entry(std::move(buckets[k]), target, args.tolerance));
      rows.push_back(row);
    }
    doc["conditional"] = {{"bin_width", width}, {"bins", rows}};
  }

  // Coupling with FIFO on the same input stream.
  const auto fifo = d == ldq::Discipline::fifo ? out : ldq::simulate(input, ldq::Discipline::fifo,
                                                                     args.warmup);
  double max_diff = 0.0;
  bool same_workload = true;
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(out.records[i].departure - fifo.records[i].departure));
    same_workload = same_workload &&
                    out.records[i].workload_at_arrival == fifo.records[i].workload_at_arrival;
  }
  doc["fifo_coupling"] = {{"max_departure_difference", max_diff},
                          {"workload_identical", same_workload}};

  emit(args.out, doc.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------

struct CurveArgs {
  std::string grid = "0.05:0.95:0.05";
  std::string output = "csv";
  std::string out;
};

int cmd_ystar_curve(const CurveArgs& args) {
  const auto g = parse_grid(args.grid);
  const int count = static_cast<int>(std::floor((g.hi - g.lo) / g.step + 1e-9)) + 1;
  std::ostringstream csv;
  csv << "rho,y_star,p_b_gt_y_star,error\n";
  json rows = json::array();
  for (int i = 0; i < count; ++i) {
    const double rho = std::round((g.lo + i * g.step) * 1e12) / 1e12;
    try {
      const auto ys = ldq::y_star(ldq::QueueModel(ldq::DistributionSpec::exponential(rho),
                                                  ldq::DistributionSpec::exponential(1.0)));
      csv << ldq::format_double(rho) << ',' << ldq::format_double(ys.y) << ','
          << ldq::format_double(ys.tail) << ",\n";
      rows.push_back({{"rho", rho}, {"y_star", ys.y}, {"p_b_gt_y_star", ys.tail}});
    } catch (const ldq::Error& e) {
      csv << ldq::format_double(rho) << ",,," << '"' << e.what() << '"' << '\n';
      rows.push_back({{"rho", rho}, {"y_star", nullptr}, {"p_b_gt_y_star", nullptr},
                      {"error", e.what()}});
    }
  }
  emit(args.out, args.output == "json" ? rows.dump(2) + "\n" : csv.str());
  return kOk;
}

// ---------------------------------------------------------------------------

struct ValidateArgs {
  bool quick = false;
  std::uint64_t seed = ldq::acceptance::Options{}.seed;
  std::string output = "text";
  std::string out;
};

int cmd_validate(const ValidateArgs& args) {
  ldq::acceptance::Options opt;
  opt.quick = args.quick;
  opt.seed = args.seed;
  bool all = true;
  bool numerical = false;
  json rows = json::array();
  std::ostringstream text;
  for (const auto& c : ldq::acceptance::criteria()) {
    const auto r = ldq::acceptance::run_one(c, opt);
    all = all && r.pass;
    numerical = numerical || (r.error && exit_code(*r.error) == kNumerical);
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"pass", r.pass},
                    {"seconds", r.seconds},
                    {"budget", r.budget},
                    {"detail", r.detail}});
    text << ldq::acceptance::format_line(r) << '\n';
    if (args.output == "text" && args.out.empty()) std::cout << text.str() << std::flush, text.str("");
  }
  if (args.output == "json") {
    emit(args.out, json{{"quick", args.quick}, {"seed", args.seed}, {"pass", all}, {"criteria", rows}}
                       .dump(2) + "\n");
  } else if (!args.out.empty()) {
    emit(args.out, text.str());
  }
  if (numerical) return kNumerical;
  return all ? kOk : kValidationFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Large-deviations decay rates for the GI/GI/1 queue, with simulation checks"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  RatesArgs rates;
  auto* r = app.add_subcommand("rates", "Analytic decay rates of a model");
  r->add_option("--model", rates.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  r->add_flag("--ystar", rates.ystar, "Also report y* and P(B > y*)");
  r->add_option("--output", rates.output, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  r->add_option("--out", rates.out, "Output path (default stdout)");

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Simulate a discipline and fit tail decay rates");
  s->add_option("--model", sim.model, "Model JSON file")->required()->check(CLI::ExistingFile);
  s->add_option("--discipline", sim.discipline, "Service discipline")
      ->check(CLI::IsMember({"fifo", "lifo-pr", "srpt-pr", "srpt-np", "prio-pr", "prio-np"}))
      ->capture_default_str();
  s->add_option("--customers", sim.customers, "Number of arrivals")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  s->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  s->add_option("--warmup", sim.warmup, "Fraction of records discarded")
      ->check(CLI::Range(0.0, 0.999999))
      ->capture_default_str();
  s->add_option("--bins", sim.bins, "Service-time bin width for conditional fits (0: 0.1*E[B])")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--tolerance", sim.tolerance, "Relative tolerance for rate verdicts")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  s->add_option("--output", sim.output, "json summary or csv per-customer records")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  s->add_option("--out", sim.out, "Output path (csv also writes PATH.busy.csv)");

  CurveArgs curve;
  auto* y = app.add_subcommand("ystar-curve", "P(B > y*) along the M/M/1 family with E[B] = 1");
  y->add_option("--rho-grid", curve.grid, "Load grid a:b:step")->capture_default_str();
  y->add_option("--output", curve.output, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  y->add_option("--out", curve.out, "Output path (default stdout)");

  ValidateArgs val;
  auto* v = app.add_subcommand("validate", "Run the acceptance suite");
  v->add_flag("--quick", val.quick, "Downscaled simulations with widened tolerances");
  v->add_option("--seed", val.seed, "Master seed")->capture_default_str();
  v->add_option("--output", val.output, "Report format")
      ->check(CLI::IsMember({"text", "json"}))
      ->capture_default_str();
  v->add_option("--out", val.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*r) return cmd_rates(rates);
    if (*s) return cmd_simulate(sim);
    if (*y) return cmd_ystar_curve(curve);
    if (*v) return cmd_validate(val);
  } catch (const ldq::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kConfig;
}
