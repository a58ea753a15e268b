#pragma once

#include "tractequity/equity.hpp"
#include "tractequity/gwr.hpp"
#include "tractequity/io.hpp"
#include "tractequity/ols.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tractequity {

/// One model column group of the regression table: an OLS fit prints a single
/// estimate column, a GWR summary prints mean/min/max and both t shares.
struct ModelResult {
  std::string name;
  std::optional<OlsFit> ols;
  std::optional<GwrSummary> gwr;
};

/// Two-decimal regression table. OLS estimates carry '*' when |t| > 1.96 and
/// their standard errors sit in parentheses on the following line.
std::string format_regression_table(const std::vector<ModelResult>& models);

/// Four-decimal block of population-weighted inequity means.
std::string format_equity_summary(const std::vector<SubsetMean>& means);

// Artifact round trips. Writers emit full precision; formatting happens only
// in the table functions above.
std::string ols_csv(const OlsFit& fit, const RunStamp& stamp);
OlsFit read_ols_csv(const std::filesystem::path& path);

std::string gwr_summary_csv(const GwrSummary& summary, const RunStamp& stamp);
GwrSummary read_gwr_summary_csv(const std::filesystem::path& path);

std::string equity_summary_csv(const std::vector<SubsetMean>& means, const RunStamp& stamp);
std::vector<SubsetMean> read_equity_summary_csv(const std::filesystem::path& path);

/// Formats the given artifacts (ols_*.csv, gwr_*_summary.csv,
/// equity_summary.csv, recognized by their header). Model names come from the
/// file names. A missing file raises an error naming it.
std::string report(const std::vector<std::filesystem::path>& artifacts);

}  // namespace tractequity
