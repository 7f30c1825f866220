#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tailcal/did.hpp"
#include "tailcal/elicitation.hpp"
#include "tailcal/error.hpp"
#include "tailcal/forecast_io.hpp"
#include "tailcal/harness.hpp"
#include "tailcal/panel.hpp"
#include "tailcal/report.hpp"
#include "tailcal/robustness.hpp"
#include "tailcal/season.hpp"
#include "tailcal/series_io.hpp"
#include "tailcal/seriesgen.hpp"

namespace fs = std::filesystem;
using namespace tailcal;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(fmt::format("cannot open '{}' for writing", path.string()));
  return out;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct GenerateArgs {
  std::string stratum = "sir";
  std::size_t n = 50;
  std::uint64_t seed = 0;
  std::size_t total = 270;
  std::size_t history = 60;
  std::vector<int> horizons{30, 60, 90, 120, 150, 180, 210};
  std::string out;
};

int run_generate(const GenerateArgs& a) {
  SyntheticConfig config;
  config.count = a.n;
  config.master_seed = a.seed;
  config.total_steps = a.total;
  config.history_len = a.history;
  config.horizons = a.horizons;
  const auto series = generate_stratum(parse_stratum(a.stratum), config);
  save_bundle(a.out, series);
  fmt::print(std::cerr, "wrote {} series to {}\n", series.size(), a.out);
  return 0;
}

struct IngestArgs {
  std::string weekly;
  std::string filters = "default";
  std::string out;
};

int run_ingest(const IngestArgs& a) {
  if (a.filters != "default") throw ConfigError(fmt::format("unknown filter set '{}'", a.filters));
  std::ifstream in(a.weekly, std::ios::binary);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", a.weekly));
  const auto table = read_weekly_counts(in);
  const auto selection = filter_epidemic_season(table.rows);
  for (const auto& e : table.errors) fmt::print(std::cerr, "{}:{}: {}\n", a.weekly, e.line, e.reason);
  for (const auto& e : selection.errors) fmt::print(std::cerr, "{}:{}: {}\n", a.weekly, e.line, e.reason);
  if (a.out.empty()) {
    write_bundle(std::cout, selection.series);
  } else {
    save_bundle(a.out, selection.series);
  }
  fmt::print(std::cerr, "{} rows read, {} seasons kept, {} rows rejected\n", table.rows.size(),
             selection.series.size(), table.errors.size() + selection.errors.size());
  return 0;
}

struct ElicitArgs {
  std::string format = "quantile";
  std::string context = "neutral";
  std::string series;
  std::string out;
  std::vector<int> horizons;
  int decimals = 1;
  std::string domain_label;
};

int run_elicit(const ElicitArgs& a) {
  const auto bundle = load_bundle(a.series);
  auto out = open_out(a.out);
  PromptSpec spec;
  spec.format = parse_prompt_format(a.format);
  spec.context = parse_prompt_context(a.context);
  spec.decimals = a.decimals;
  spec.domain_label = a.domain_label;
  std::size_t count = 0;
  for (const auto& s : bundle) {
    spec.history.assign(s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(s.history_len));
    std::vector<int> horizons = a.horizons.empty() ? s.horizons : a.horizons;
    if (spec.format == PromptFormat::numeric_continuation) {
      horizons = {*std::max_element(horizons.begin(), horizons.end())};
    }
    for (int h : horizons) {
      spec.horizon = h;
      out << "### series=" << s.id << " horizon=" << h << '\n' << build_prompt(spec) << "\n\n";
      ++count;
    }
  }
  fmt::print(std::cerr, "wrote {} prompts to {}\n", count, a.out);
  return 0;
}

int run_evaluate(const std::string& config_path) {
  const auto config = load_run_config(config_path);
  const auto series = load_bundle(config.series_path);
  const auto s = execute_run(config, series);
  fmt::print("items {}  cache hits {}  requests {}  ok {}  failed {}\n", s.items, s.cache_hits,
             s.requests_issued, s.succeeded, s.failed);
  return 0;
}

struct ReplayArgs {
  std::string cache;
  std::string series;
  std::string config;
  std::string metrics = "crps,pinball,brier_derived";
  std::string out;
  std::string forecasts_out;
};

int run_replay(const ReplayArgs& a) {
  std::optional<RunConfig> config;
  if (!a.config.empty()) config = load_run_config(a.config);
  std::string series_path = a.series;
  if (series_path.empty() && config) series_path = config->series_path.string();
  if (series_path.empty()) throw ConfigError("replay needs --series or --config");
  std::string cache_path = a.cache;
  if (cache_path.empty() && config) cache_path = config->cache_path.string();

  const auto series = load_bundle(series_path);
  const auto exchanges = load_cache(cache_path);
  const auto metrics = parse_metrics(a.metrics);
  if (!a.forecasts_out.empty()) save_forecasts(a.forecasts_out, parse_exchanges(exchanges, series));
  const auto result = replay_run(exchanges, series, metrics, config ? &*config : nullptr);
  result.table.save(a.out);
  for (const auto& m : result.missing) fmt::print(std::cerr, "missing: {}\n", m);
  if (result.partial) fmt::print(std::cerr, "partial table: {} entries missing\n", result.missing.size());
  return result.partial ? 3 : 0;
}

struct ScoreArgs {
  std::string forecasts;
  std::string series;
  std::string metrics = "crps,pinball,brier_derived";
  std::string out;
  std::string parse_rates_out;
};

int run_score(const ScoreArgs& a) {
  const auto series = load_bundle(a.series);
  const auto forecasts = load_forecasts(a.forecasts);
  const auto metrics = parse_metrics(a.metrics);
  score_forecasts(forecasts, series, metrics).save(a.out);
  if (!a.parse_rates_out.empty()) {
    const auto rates = parse_rates(forecasts, series);
    auto out = open_out(a.parse_rates_out);
    out << "model,stratum,parsed,total,coverage,included\n";
    for (const auto& d : rule_a_filter(rates)) {
      out << fmt::format("{},{},{},{},{},{}\n", d.rate.model, d.rate.stratum, d.rate.parsed, d.rate.total,
                         format_number(d.rate.coverage()), d.included ? "true" : "false");
    }
  }
  return 0;
}

struct AnalyzeArgs {
  std::string scores;
  std::string panel;
  std::string metric = "crps";
  std::string orientation = "lower_better";
  bool by_horizon = false;
  std::string robustness;
  int horizon = 0;
  std::uint64_t seed = 0;
  std::size_t resamples = 10'000;
  std::size_t lineage_draws = 10'000;
  std::string out;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto table = ScoreTable::load(a.scores);
  const auto panel = ModelPanel::load(a.panel);
  const auto orientation = parse_orientation(a.orientation);
  std::vector<AnalysisRow> rows;

  auto horizons = table.horizons();
  if (horizons.empty()) throw FormatError("score table is empty");
  const int focus = a.horizon ? a.horizon : horizons.back();
  if (!a.by_horizon) horizons = {focus};

  CurveOptions options;
  options.orientation = orientation;
  options.bootstrap.resamples = a.resamples;
  options.bootstrap.seed = a.seed;
  const std::vector<std::string> metrics{a.metric};
  if (a.by_horizon) {
    auto curve = horizon_curve(table, panel, metrics, options);
    rows = std::move(curve.rows);
    for (const auto& f : curve.flagged) fmt::print(std::cerr, "flagged: {}\n", f);
  } else {
    ScoreTable one;
    for (const auto& r : table.rows()) {
      if (r.key.horizon == focus) one.add(r);
    }
    auto curve = horizon_curve(one, panel, metrics, options);
    rows = std::move(curve.rows);
    for (const auto& f : curve.flagged) fmt::print(std::cerr, "flagged: {}\n", f);
  }

  const auto data = align_scores(panel, table.model_means(focus, a.metric));
  auto run_check = [&](const std::string& check) {
    if (check == "lopo") {
      for (const auto& e : lopo(data, orientation, a.seed)) {
        AnalysisRow r{fmt::format("lopo:-{}", e.dropped_provider), focus, {}, {}, {}, e.n_remaining, {}, e.flag};
        if (e.result) {
          r.rho = e.result->rho;
          r.p = e.result->p_value;
          r.method = e.result->method;
        }
        rows.push_back(std::move(r));
      }
    } else if (check == "lineage") {
      for (auto policy : {LineagePolicy::max_capability, LineagePolicy::min_capability}) {
        const auto c = lineage_collapse(data, orientation, policy, a.seed);
        rows.push_back({fmt::format("lineage:{}", policy == LineagePolicy::max_capability ? "max" : "min"),
                        focus, c.rho, {}, {}, c.n_models, c.p_value, c.method});
      }
      const auto d = lineage_collapse_random(data, orientation, a.lineage_draws, a.seed);
      rows.push_back({"lineage:random", focus, d.median, d.q05, d.q95, d.lineages, {},
                      fmt::format("median_q05_q95;fraction_negative={}", format_number(d.fraction_negative))});
    } else if (check == "partial") {
      rows.push_back({"partial:provider", focus, provider_partial_rho(data, orientation), {}, {}, data.size(), {},
                      "rank_residual_pearson"});
    } else {
      throw ConfigError(fmt::format("unknown robustness check '{}'", check));
    }
  };
  for (const auto& check : split_list(a.robustness)) {
    try {
      run_check(check);
    } catch (const StatsError& e) {
      // Too few models or lineages left: keep the row, leave rho empty.
      rows.push_back({check, focus, {}, {}, {}, data.size(), {}, fmt::format("undefined: {}", e.what())});
    }
  }

  if (a.out.empty()) {
    write_analysis_csv(std::cout, rows);
  } else {
    auto out = open_out(a.out);
    write_analysis_csv(out, rows);
  }
  return 0;
}

struct ReportArgs {
  std::string scores;
  std::string panel;
  std::string kind;
  std::string out;
  std::string metrics = "crps,brier_derived";
  std::string did;
  std::string metric = "crps";
  int horizon = 0;
  std::uint64_t seed = 0;
  std::size_t resamples = 10'000;
};

int run_report(const ReportArgs& a) {
  const auto table = ScoreTable::load(a.scores);
  fs::create_directories(a.out);
  CurveOptions options;
  options.bootstrap.seed = a.seed;
  options.bootstrap.resamples = a.resamples;

  auto need_panel = [&] {
    if (a.panel.empty()) throw ConfigError(fmt::format("--kind {} needs --panel", a.kind));
    return ModelPanel::load(a.panel);
  };
  auto emit_curve = [&](const HorizonCurve& curve, const std::string& name) {
    auto out = open_out(fs::path(a.out) / name);
    write_analysis_csv(out, curve.rows);
    for (const auto& f : curve.flagged) fmt::print(std::cerr, "flagged: {}\n", f);
  };

  if (a.kind == "horizon") {
    emit_curve(horizon_curve(table, need_panel(), split_list(a.metrics), options), "horizon_curve.csv");
  } else if (a.kind == "pinball") {
    const auto d = pinball_decomposition(table, need_panel(), options);
    for (const auto& w : d.warnings) fmt::print(std::cerr, "warning: {}\n", w);
    emit_curve(d.curve, "pinball_decomposition.csv");
  } else if (a.kind == "sweep") {
    std::vector<std::string> columns;
    for (const auto& m : table.metrics()) {
      if (m.starts_with("brier_q")) columns.push_back(m);
    }
    if (columns.empty()) throw FormatError("score table has no brier_q* sweep columns");
    emit_curve(horizon_curve(table, need_panel(), columns, options), "sweep.csv");
  } else if (a.kind == "did") {
    std::map<std::string, std::string> cell_model;
    for (const auto& item : split_list(a.did)) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError(fmt::format("--did item '{}' is not cell=model", item));
      cell_model[item.substr(0, eq)] = item.substr(eq + 1);
    }
    for (const char* cell : {"base_small", "instruct_small", "base_large", "instruct_large"}) {
      if (!cell_model.contains(cell)) throw ConfigError(fmt::format("--did lacks {}=MODEL", cell));
    }
    const int h = a.horizon ? a.horizon : table.horizons().back();
    TwoByTwoCells cells;
    for (const auto& r : table.rows()) {
      if (r.key.horizon != h || r.key.metric != a.metric || !r.score) continue;
      if (r.key.model == cell_model["base_small"]) cells.base_small[r.key.series] = *r.score;
      if (r.key.model == cell_model["instruct_small"]) cells.instruct_small[r.key.series] = *r.score;
      if (r.key.model == cell_model["base_large"]) cells.base_large[r.key.series] = *r.score;
      if (r.key.model == cell_model["instruct_large"]) cells.instruct_large[r.key.series] = *r.score;
    }
    const auto rows = two_by_two_report(did_interaction(cells));
    auto out = open_out(fs::path(a.out) / "two_by_two.csv");
    write_two_by_two_csv(out, rows);
    auto text = open_out(fs::path(a.out) / "two_by_two.txt");
    text << render_two_by_two(rows);
  } else {
    throw ConfigError(fmt::format("unknown report kind '{}'", a.kind));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tailcal: scoring, statistics and evaluation for distributional forecasts"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Simulate a synthetic series bundle");
  generate->add_option("--stratum", gen.stratum, "sir | linear | regime_long")->default_val("sir");
  generate->add_option("--n", gen.n, "Number of series")->default_val(50);
  generate->add_option("--seed", gen.seed, "Master seed")->default_val(0);
  generate->add_option("--total", gen.total, "Steps per series")->default_val(270);
  generate->add_option("--history", gen.history, "History length")->default_val(60);
  generate->add_option("--horizons", gen.horizons, "Forecast horizons")->delimiter(',');
  generate->add_option("--out", gen.out, "Bundle file")->required();

  IngestArgs ing;
  auto* ingest = app.add_subcommand("ingest", "Cut epidemic seasons out of weekly counts");
  ingest->add_option("--weekly", ing.weekly, "unit,date,count file")->required();
  ingest->add_option("--filters", ing.filters, "Filter set")->default_val("default");
  ingest->add_option("--out", ing.out, "Bundle file (stdout if omitted)");

  ElicitArgs eli;
  auto* elicit = app.add_subcommand("elicit", "Render prompts for a series bundle");
  elicit->add_option("--format", eli.format, "quantile | continuation")->default_val("quantile");
  elicit->add_option("--context", eli.context,
                     "neutral | generic_cue | domain_named | minimum_viable_disclosure")
      ->default_val("neutral");
  elicit->add_option("--series", eli.series, "Bundle file")->required();
  elicit->add_option("--out", eli.out, "Prompt file")->required();
  elicit->add_option("--horizons", eli.horizons, "Override the bundle horizons")->delimiter(',');
  elicit->add_option("--decimals", eli.decimals, "Continuation decimals")->default_val(1);
  elicit->add_option("--domain-label", eli.domain_label, "Label for domain_named prompts");

  std::string config_path;
  auto* evaluate = app.add_subcommand("evaluate", "Run every endpoint of a run config");
  evaluate->add_option("--config", config_path, "Run config (JSON)")->required();

  ReplayArgs rep;
  auto* replay = app.add_subcommand("replay", "Score a response cache without the network");
  replay->add_option("--cache", rep.cache, "Cache file");
  replay->add_option("--series", rep.series, "Bundle file");
  replay->add_option("--config", rep.config, "Run config; lists missing entries");
  replay->add_option("--metrics", rep.metrics, "crps,pinball,brier_derived,brier_sweep");
  replay->add_option("--out", rep.out, "Score table")->required();
  replay->add_option("--forecasts-out", rep.forecasts_out, "Also write parsed forecasts");

  ScoreArgs sco;
  auto* score = app.add_subcommand("score", "Score a forecast file");
  score->add_option("--forecasts", sco.forecasts, "Forecast file")->required();
  score->add_option("--series", sco.series, "Bundle file")->required();
  score->add_option("--metrics", sco.metrics, "crps,pinball,brier_derived,brier_sweep");
  score->add_option("--out", sco.out, "Score table")->required();
  score->add_option("--parse-rates", sco.parse_rates_out, "Per (model, stratum) coverage and Rule A");

  AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Capability correlation and robustness checks");
  analyze->add_option("--scores", ana.scores, "Score table")->required();
  analyze->add_option("--panel", ana.panel, "Panel file")->required();
  analyze->add_option("--metric", ana.metric, "Metric column")->default_val("crps");
  analyze->add_option("--orientation", ana.orientation, "lower_better | higher_better")
      ->default_val("lower_better");
  analyze->add_flag("--by-horizon", ana.by_horizon, "One row per horizon");
  analyze->add_option("--robustness", ana.robustness, "lopo,lineage,partial");
  analyze->add_option("--horizon", ana.horizon, "Horizon for robustness checks (default: largest)");
  analyze->add_option("--seed", ana.seed, "Resampling seed")->default_val(0);
  analyze->add_option("--resamples", ana.resamples, "Bootstrap resamples")->default_val(10000);
  analyze->add_option("--lineage-draws", ana.lineage_draws, "Random lineage draws")->default_val(10000);
  analyze->add_option("--out", ana.out, "Output file (stdout if omitted)");

  ReportArgs rpt;
  auto* report = app.add_subcommand("report", "Emit analysis tables");
  report->add_option("--scores", rpt.scores, "Score table")->required();
  report->add_option("--panel", rpt.panel, "Panel file");
  report->add_option("--kind", rpt.kind, "horizon | pinball | sweep | did")->required();
  report->add_option("--out", rpt.out, "Output directory")->required();
  report->add_option("--metrics", rpt.metrics, "Metrics for --kind horizon")->default_val("crps,brier_derived");
  report->add_option("--did", rpt.did, "base_small=M,instruct_small=M,base_large=M,instruct_large=M");
  report->add_option("--metric", rpt.metric, "Metric for --kind did")->default_val("crps");
  report->add_option("--horizon", rpt.horizon, "Horizon for --kind did (default: largest)");
  report->add_option("--seed", rpt.seed, "Bootstrap seed")->default_val(0);
  report->add_option("--resamples", rpt.resamples, "Bootstrap resamples")->default_val(10000);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return run_generate(gen);
    if (*ingest) return run_ingest(ing);
    if (*elicit) return run_elicit(eli);
    if (*evaluate) return run_evaluate(config_path);
    if (*replay) return run_replay(rep);
    if (*score) return run_score(sco);
    if (*analyze) return run_analyze(ana);
    if (*report) return run_report(rpt);
  } catch (const tailcal::Error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(std::cerr, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}
