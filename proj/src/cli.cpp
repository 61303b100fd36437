#include "chainbinom/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "chainbinom/analysis.hpp"
#include "chainbinom/dataset.hpp"
#include "chainbinom/errors.hpp"
#include "chainbinom/estimation.hpp"
#include "chainbinom/model_core.hpp"
#include "chainbinom/regression.hpp"
#include "chainbinom/simulation.hpp"

namespace chainbinom {

namespace {

using Json = nlohmann::ordered_json;
using Cell = std::variant<std::monostate, std::string, double, long long>;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A result table with a metadata block, rendered as CSV (metadata as leading
// "# key: value" lines) or JSON ({"meta": ..., "rows": [...]}).
struct Table {
  Json meta = Json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

Cell number(double v) { return std::isfinite(v) ? Cell(v) : Cell(std::monostate{}); }
Cell number(std::optional<double> v) { return v ? number(*v) : Cell(std::monostate{}); }
Cell integer(long long v) { return Cell(v); }
Cell text(std::string v) { return Cell(std::move(v)); }

std::string csv_cell(const Cell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return ""; }
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double v) const { return format_number(v); }
    std::string operator()(long long v) const { return std::to_string(v); }
  };
  return std::visit(Visitor{}, cell);
}

Json json_cell(const Cell& cell) {
  struct Visitor {
    Json operator()(std::monostate) const { return nullptr; }
    Json operator()(const std::string& s) const { return s; }
    Json operator()(double v) const { return v; }
    Json operator()(long long v) const { return v; }
  };
  return std::visit(Visitor{}, cell);
}

std::string meta_text(const Json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

void render(const Table& table, const std::string& format, std::ostream& out) {
  if (format == "json") {
    Json doc;
    doc["meta"] = table.meta;
    doc["rows"] = Json::array();
    for (const auto& row : table.rows) {
      Json obj = Json::object();
      for (std::size_t c = 0; c < table.columns.size(); ++c) {
        obj[table.columns[c]] = json_cell(row[c]);
      }
      doc["rows"].push_back(std::move(obj));
    }
    out << doc.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : table.meta.items()) {
    out << "# " << key << ": " << meta_text(value) << '\n';
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << (c ? "," : "") << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
    out << '\n';
  }
}

Json base_meta(const std::string& command) {
  Json meta = Json::object();
  meta["tool"] = "chainbinom";
  meta["version"] = kVersion;
  meta["command"] = command;
  return meta;
}

// Dataset selection shared by `estimate` and `glm`.
struct DataArgs {
  std::string source;
  std::vector<std::string> filters;
  std::string generations;

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", source, "CSV dataset path, or 'coronahouse' for the packaged data")
        ->required();
    cmd->add_option("--filter", filters, "Keep records with covariate NAME=VALUE (repeatable)");
    cmd->add_option("--generations", generations,
                    "Override every household's horizon ('final' or a generation count)");
  }

  std::vector<HouseholdObservation> load(std::ostream& err, Json& meta) const {
    DatasetFile file = source == "coronahouse" ? coronahouse_fixture() : load_csv(source);
    for (const auto& warning : file.warnings) err << "warning: " << warning << '\n';
    std::vector<HouseholdObservation> records = std::move(file.records);
    for (const auto& filter : filters) {
      const auto eq = filter.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw UsageError("--filter expects NAME=VALUE, got '" + filter + "'");
      }
      records = filter_records(records, filter.substr(0, eq), filter.substr(eq + 1));
    }
    if (records.empty()) throw DataError("no households left after filtering");
    if (!generations.empty()) {
      const Horizon horizon = Horizon::parse(generations);
      for (auto& obs : records) obs.horizon = horizon;
    }
    meta["data"] = source;
    meta["filters"] = filters;
    if (!generations.empty()) meta["generations"] = generations;
    meta["n_households"] = records.size();
    return records;
  }
};

std::vector<std::pair<int, double>> parse_weighted(const std::string& text, const char* flag) {
  // "2:0.28,3:0.23" or a bare "1" (weight 1).
  std::vector<std::pair<int, double>> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto colon = item.find(':');
    try {
      std::size_t used = 0;
      const int value = std::stoi(item.substr(0, colon), &used);
      if (used != item.substr(0, colon).size()) throw std::invalid_argument(item);
      double weight = 1.0;
      if (colon != std::string::npos) {
        const std::string w = item.substr(colon + 1);
        weight = std::stod(w, &used);
        if (used != w.size()) throw std::invalid_argument(item);
      }
      out.emplace_back(value, weight);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "' (expected VALUE[:WEIGHT])");
    }
  }
  if (out.empty()) throw UsageError(std::string(flag) + " is empty");
  return out;
}

std::string weighted_text(const std::vector<std::pair<int, double>>& dist) {
  std::string s;
  for (const auto& [value, weight] : dist) {
    if (!s.empty()) s += ',';
    s += std::to_string(value) + ":" + format_number(weight);
  }
  return s;
}

Table pmf_table(int s0, int i0, double sar, const std::string& generations) {
  HouseholdConfig config{s0, i0, sar};
  config.validate();
  std::vector<Horizon> horizons;
  if (generations == "all") {
    for (int d = 1; d <= std::max(1, s0); ++d) horizons.push_back(Horizon::after(d));
    horizons.push_back(Horizon::final_size());
  } else {
    horizons.push_back(Horizon::parse(generations));
  }
  Table table;
  table.meta = base_meta("pmf");
  table.meta["s0"] = s0;
  table.meta["i0"] = i0;
  table.meta["sar"] = sar;
  table.meta["generations"] = generations;
  table.columns = {"horizon", "total", "probability"};
  for (Horizon h : horizons) {
    const auto pmf = outbreak_pmf_vector(config, h);
    for (std::size_t x = 0; x < pmf.size(); ++x) {
      table.rows.push_back({text(h.to_string()), integer(static_cast<long long>(x)), number(pmf[x])});
    }
  }
  return table;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Chain binomial household outbreak sizes and secondary attack rate inference",
               "chainbinom"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string format = "csv";
  auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  };

  // pmf
  auto* pmf = app.add_subcommand("pmf", "Incomplete or final outbreak-size distribution");
  int pmf_s0 = 0, pmf_i0 = 1;
  double pmf_sar = 0.0;
  std::string pmf_generations = "final";
  pmf->add_option("--s0", pmf_s0, "Initial susceptibles")->required()->check(CLI::NonNegativeNumber);
  pmf->add_option("--i0", pmf_i0, "Index cases")->capture_default_str()->check(CLI::NonNegativeNumber);
  pmf->add_option("--sar", pmf_sar, "Secondary attack rate")->required()->check(CLI::Range(0.0, 1.0));
  pmf->add_option("--generations", pmf_generations,
                  "Generations observed: an integer, 'final' or 'all'")
      ->capture_default_str();
  add_format(pmf);

  // estimate
  auto* estimate = app.add_subcommand("estimate", "Maximum likelihood secondary attack rate");
  DataArgs est_data;
  est_data.attach(estimate);
  std::string est_ci = "wilks";
  double est_level = 0.95;
  estimate->add_option("--ci", est_ci, "Interval method")
      ->check(CLI::IsMember({"wilks", "normal"}))
      ->capture_default_str();
  estimate->add_option("--level", est_level, "Confidence level")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  add_format(estimate);

  // glm
  auto* glm = app.add_subcommand("glm", "Regression of the attack rate on household covariates");
  DataArgs glm_data;
  glm_data.attach(glm);
  std::vector<std::string> glm_predictors;
  std::string glm_link = "logit";
  double glm_level = 0.95;
  std::vector<std::string> glm_references;
  glm->add_option("--predictors", glm_predictors, "Covariate names (comma separated)")
      ->delimiter(',');
  glm->add_option("--link", glm_link, "Link function")
      ->check(CLI::IsMember({"logit", "log", "identity"}))
      ->capture_default_str();
  glm->add_option("--level", glm_level, "Confidence level for coefficient intervals")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  glm->add_option("--reference", glm_references, "Reference level NAME=LEVEL (repeatable)");
  add_format(glm);

  // bias
  auto* bias = app.add_subcommand("bias", "Bias of final-size estimates on incomplete outbreaks");
  BiasGrid grid;
  std::vector<int> bias_generations;
  bias->add_option("--sar", grid.sars, "True attack rates")->delimiter(',');
  bias->add_option("--s0", grid.s0s, "Initial susceptibles")->delimiter(',');
  bias->add_option("--i0", grid.i0s, "Index cases")->delimiter(',');
  bias->add_option("--generations", bias_generations,
                   "Generations observed (default 1..s0 per household size)")
      ->delimiter(',');
  add_format(bias);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate a household study to CSV");
  SimConfig sim;
  std::string sim_generations = "final";
  std::string sim_sizes = weighted_text(default_household_sizes());
  std::string sim_i0 = "1";
  std::string sim_out;
  simulate->add_option("--n", sim.n_households, "Households")->capture_default_str();
  simulate->add_option("--sar", sim.sar, "Secondary attack rate")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--generations", sim_generations, "Observation horizon")
      ->capture_default_str();
  simulate->add_option("--sizes", sim_sizes, "Household size distribution SIZE:WEIGHT,...")
      ->capture_default_str();
  simulate->add_option("--i0", sim_i0, "Index cases: COUNT or COUNT:WEIGHT,...")
      ->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Write the dataset here instead of standard output");
  add_format(simulate);

  // coverage
  auto* coverage = app.add_subcommand("coverage", "Interval coverage simulation study");
  SimConfig cov = sim;
  std::vector<double> cov_sars{0.5};
  std::string cov_generations = "final";
  std::string cov_sizes = weighted_text(default_household_sizes());
  std::string cov_i0 = "1";
  std::vector<double> cov_levels{0.8, 0.95, 0.99};
  coverage->add_option("--n", cov.n_households, "Households per study")->capture_default_str();
  coverage->add_option("--sar", cov_sars, "True attack rates")->delimiter(',');
  coverage->add_option("--generations", cov_generations, "Observation horizon")
      ->capture_default_str();
  coverage->add_option("--sizes", cov_sizes, "Household size distribution SIZE:WEIGHT,...")
      ->capture_default_str();
  coverage->add_option("--i0", cov_i0, "Index cases: COUNT or COUNT:WEIGHT,...")
      ->capture_default_str();
  coverage->add_option("--levels", cov_levels, "Nominal levels")->delimiter(',');
  coverage->add_option("--replications", cov.replications, "Replications")->capture_default_str();
  coverage->add_option("--seed", cov.seed, "Random seed")->capture_default_str();
  add_format(coverage);

  std::vector<const char*> argv{"chainbinom"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Table table;
    if (*pmf) {
      table = pmf_table(pmf_s0, pmf_i0, pmf_sar, pmf_generations);
    } else if (*estimate) {
      table.meta = base_meta("estimate");
      const auto data = est_data.load(err, table.meta);
      const SarEstimate fit = fit_sar(data, FitOptions{parse_ci_method(est_ci), est_level});
      if (!std::isfinite(fit.ci_lower) || !std::isfinite(fit.ci_upper)) {
        throw UnavailableError("normal interval unavailable: the estimate " +
                               format_number(fit.sar_hat) +
                               " has no standard error (boundary or flat likelihood)");
      }
      table.columns = {"n_households", "sar_hat", "std_error", "ci_lower", "ci_upper",
                       "ci_method", "ci_level", "loglik"};
      table.rows.push_back({integer(static_cast<long long>(data.size())), number(fit.sar_hat),
                            number(fit.std_error), number(fit.ci_lower), number(fit.ci_upper),
                            text(to_string(fit.ci_method)), number(fit.ci_level),
                            number(fit.loglik)});
    } else if (*glm) {
      table.meta = base_meta("glm");
      const auto data = glm_data.load(err, table.meta);
      DesignOptions options;
      for (const auto& ref : glm_references) {
        const auto eq = ref.find('=');
        if (eq == std::string::npos || eq == 0) {
          throw UsageError("--reference expects NAME=LEVEL, got '" + ref + "'");
        }
        options.reference_levels[ref.substr(0, eq)] = ref.substr(eq + 1);
      }
      const GlmFit fit = fit_glm(data, glm_predictors, LinkFunction::from_name(glm_link), options);
      if (!fit.converged) err << "warning: optimizer did not converge\n";
      table.meta["link"] = fit.link.name();
      table.meta["predictors"] = glm_predictors;
      table.meta["loglik"] = fit.loglik;
      table.meta["converged"] = fit.converged;
      table.meta["ci_method"] = "normal";
      table.meta["ci_level"] = glm_level;
      table.columns = {"term", "estimate", "std_error", "ci_lower", "ci_upper"};
      for (std::size_t j = 0; j < fit.predictor_names.size(); ++j) {
        std::optional<Interval> ci;
        if (fit.covariance) ci = fit.coefficient_ci(j, glm_level);
        table.rows.push_back({text(fit.predictor_names[j]),
                              number(fit.coefficients[static_cast<Eigen::Index>(j)]),
                              number(fit.std_error(j)),
                              number(ci ? std::optional<double>(ci->lower) : std::nullopt),
                              number(ci ? std::optional<double>(ci->upper) : std::nullopt)});
      }
    } else if (*bias) {
      table.meta = base_meta("bias");
      Json g = Json::object();
      g["sar"] = grid.sars;
      g["s0"] = grid.s0s;
      g["i0"] = grid.i0s;
      g["generations"] = bias_generations.empty() ? Json("1..s0") : Json(bias_generations);
      table.meta["grid"] = g;
      table.meta["divergence"] = "KL(incomplete(true_sar) || final(approx_sar))";
      table.columns = {"i0", "s0", "true_sar", "generations", "approx_sar", "relative_bias",
                       "kl_at_min"};
      std::vector<BiasPoint> points;
      if (bias_generations.empty()) {
        points = bias_grid(grid);
      } else {
        for (int i0 : grid.i0s) {
          for (int s0 : grid.s0s) {
            for (double sar : grid.sars) {
              auto curve = bias_curve(sar, HouseholdConfig{s0, i0, sar}, bias_generations);
              points.insert(points.end(), curve.begin(), curve.end());
            }
          }
        }
      }
      for (const auto& p : points) {
        table.rows.push_back({integer(p.i0), integer(p.s0), number(p.true_sar),
                              integer(p.generations), number(p.approx_sar),
                              number(p.relative_bias), number(p.kl_at_min)});
      }
    } else if (*simulate) {
      sim.horizon = Horizon::parse(sim_generations);
      sim.household_size_dist = parse_weighted(sim_sizes, "--sizes");
      sim.i0_dist = parse_weighted(sim_i0, "--i0");
      sim.replications = 1;
      Rng rng = substream(sim.seed, 0);
      const auto data = simulate_study(sim, rng);
      std::ofstream file;
      if (!sim_out.empty()) {
        file.open(sim_out);
        if (!file) throw DataError("cannot write '" + sim_out + "'");
      }
      std::ostream& sink = sim_out.empty() ? out : file;
      if (format == "csv") {
        write_csv(sink, data, {});
      } else {
        table.meta = base_meta("simulate");
        table.meta["seed"] = sim.seed;
        table.meta["rng"] = kRngName;
        table.meta["n_households"] = sim.n_households;
        table.meta["sar"] = sim.sar;
        table.meta["generations"] = sim.horizon.to_string();
        table.meta["household_sizes"] = weighted_text(sim.household_size_dist);
        table.meta["i0"] = weighted_text(sim.i0_dist);
        table.columns = {"id", "s0", "i0", "infected", "generations"};
        for (const auto& obs : data) {
          table.rows.push_back({text(obs.id), integer(obs.s0), integer(obs.i0),
                                integer(obs.infected),
                                obs.horizon.is_final() ? Cell(std::monostate{})
                                                       : integer(obs.horizon.generations())});
        }
        render(table, format, sink);
      }
      return kExitOk;
    } else if (*coverage) {
      cov.horizon = Horizon::parse(cov_generations);
      cov.household_size_dist = parse_weighted(cov_sizes, "--sizes");
      cov.i0_dist = parse_weighted(cov_i0, "--i0");
      table.meta = base_meta("coverage");
      table.meta["seed"] = cov.seed;
      table.meta["rng"] = kRngName;
      table.meta["replications"] = cov.replications;
      table.meta["n_households"] = cov.n_households;
      table.meta["generations"] = cov.horizon.to_string();
      table.meta["household_sizes"] = weighted_text(cov.household_size_dist);
      table.meta["i0"] = weighted_text(cov.i0_dist);
      table.meta["methods"] = {"wilks", "normal"};
      table.columns = {"method", "nominal_level", "realized_coverage", "n_covered",
                       "n_estimable", "replications", "n_households", "sar", "horizon"};
      for (double s : cov_sars) {
        cov.sar = s;
        for (const auto& row : coverage_experiment(cov, cov_levels)) {
          table.rows.push_back({text(to_string(row.method)), number(row.nominal_level),
                                number(row.realized_coverage), integer(row.n_covered),
                                integer(row.n_estimable), integer(row.replications),
                                integer(row.n_households), number(row.sar),
                                text(row.horizon.to_string())});
        }
      }
    }
    render(table, format, out);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace chainbinom
