#pragma once

// Prompt construction, response parsing, parse-rate inclusion and the
// built-in baseline forecasters.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tailcal/score_table.hpp"
#include "tailcal/scoring.hpp"

namespace tailcal {

enum class PromptFormat { quantile_block, numeric_continuation };
enum class PromptContext { neutral, generic_cue, domain_named, minimum_viable_disclosure };

PromptFormat parse_prompt_format(std::string_view name);
PromptContext parse_prompt_context(std::string_view name);
std::string_view to_string(PromptFormat format);
std::string_view to_string(PromptContext context);

inline constexpr std::string_view kGenericCueSentence = "The current trend may or may not continue.";
inline constexpr std::string_view kMinimumViableDisclosureSentence =
    "This time series represents the trajectory of a communicable disease in a population over "
    "time.";
inline constexpr std::string_view kPercentilesOpen = "<<<PERCENTILES>>>";
inline constexpr std::string_view kPercentilesClose = "<<<END>>>";

struct PromptSpec {
  PromptFormat format = PromptFormat::quantile_block;
  PromptContext context = PromptContext::neutral;
  std::vector<double> history;
  int horizon = 1;
  int decimals = 1;          ///< continuation prompts only
  std::string domain_label;  ///< required by the domain_named context
};

/// Continuation prompts are the raw history, one value per token, each
/// followed by a single space. Quantile prompts carry the history at full
/// precision, the context sentence, the five levels and the delimiter
/// contract. Throws ConfigError on an invalid spec.
std::string build_prompt(const PromptSpec& spec);

/// The block a well-formed quantile response contains.
std::string format_percentile_block(const QuantileForecast& forecast);

struct ParseOutcome {
  ParseStatus status = ParseStatus::failed;
  std::optional<QuantileForecast> quantiles;  ///< quantile-block responses
  std::vector<double> trajectory;             ///< continuation responses
  std::string reason;                         ///< set when failed

  bool ok() const { return scorable(status); }
};

/// Extracts p10..p90 from the first <<<PERCENTILES>>>...<<<END>>> block.
/// Lines are `pNN: value` (or `=`); an unlabeled block contributes its
/// first five numbers. Non-monotone values are sorted and flagged
/// repaired. Never throws.
ParseOutcome parse_percentiles(std::string_view text);

/// Leading run of numeric tokens (separated by whitespace or commas),
/// truncated to `n_steps`. Fewer than `n_steps` values fails. Never throws.
ParseOutcome parse_continuation(std::string_view text, int n_steps);

inline constexpr double kRuleAThreshold = 0.80;

struct ParseRate {
  std::string model;
  std::string stratum;
  std::size_t parsed = 0;
  std::size_t total = 0;

  double coverage() const;
};

struct RuleADecision {
  ParseRate rate;
  bool included = false;
};

/// Includes a (model, stratum) pair iff its parse coverage is at least
/// `threshold`; strata are judged independently.
std::vector<RuleADecision> rule_a_filter(std::span<const ParseRate> rates,
                                         double threshold = kRuleAThreshold);

enum class BaselineKind { anchored, extrapolator };

BaselineKind parse_baseline_kind(std::string_view name);
std::string_view to_string(BaselineKind kind);

struct BaselineLadders {
  std::array<double, 5> anchored{0.7, 0.85, 1.0, 1.2, 1.5};
  std::array<double, 5> extrapolator{0.5, 0.8, 1.0, 1.6, 2.5};
  std::size_t fit_window = 30;
};

inline constexpr std::size_t kBaselineMinHistory = 8;

/// Central value of a baseline `horizon` steps past the history:
/// anchored holds the last value, extrapolator projects a least-squares
/// fit of log(value + 1) over the trailing window.
double baseline_center(BaselineKind kind, std::span<const double> history, int horizon,
                       const BaselineLadders& ladders = {});

/// Center times the kind's multiplier ladder. Throws ScoringError when the
/// history holds fewer than 8 values.
QuantileForecast baseline_forecast(BaselineKind kind, std::span<const double> history, int horizon,
                                   const BaselineLadders& ladders = {});

/// Centers for horizons 1..n_steps, used to answer continuation prompts.
std::vector<double> baseline_path(BaselineKind kind, std::span<const double> history, int n_steps,
                                  const BaselineLadders& ladders = {});

}  // namespace tailcal
