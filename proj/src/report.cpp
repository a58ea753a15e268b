#include "tractequity/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tractequity {

namespace {

constexpr int kCellWidth = 9;

std::string fixed(double v, int decimals) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string rtrim(std::string s) {
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

std::size_t term_index(const std::vector<std::string>& terms, const std::string& t) {
  const auto it = std::find(terms.begin(), terms.end(), t);
  return it == terms.end() ? kNoIndex : static_cast<std::size_t>(it - terms.begin());
}

double cell(const std::vector<std::string>& row, std::size_t c, const std::filesystem::path& path) {
  if (c >= row.size()) throw ParseError(path.string() + ": short row");
  const auto v = parse_cell(row[c]);
  if (!v) throw ParseError(path.string() + ": non-numeric cell '" + row[c] + "'");
  return *v;
}

CsvTable read_artifact(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ValidationError("missing artifact: " + path.string());
  return read_csv(path);
}

}  // namespace

std::string format_regression_table(const std::vector<ModelResult>& models) {
  std::vector<std::string> terms;
  for (const auto& m : models) {
    const auto& t = m.ols ? m.ols->terms : m.gwr ? m.gwr->terms : std::vector<std::string>{};
    for (const auto& term : t)
      if (term_index(terms, term) == kNoIndex) terms.push_back(term);
  }
  std::size_t label_w = 2;
  for (const auto& t : terms) label_w = std::max(label_w, t.size());
  label_w += 2;

  // Each line is the label followed by one cell per column.
  std::vector<std::vector<std::string>> lines;
  auto add_line = [&](std::string label) {
    lines.push_back({std::move(label)});
    return lines.size() - 1;
  };
  const std::size_t title = add_line("");
  const std::size_t head = add_line("");
  std::vector<std::size_t> est_line, se_line;
  for (const auto& t : terms) {
    est_line.push_back(add_line(t));
    se_line.push_back(add_line(""));
  }
  const std::size_t r2 = add_line("R2");

  for (const auto& m : models) {
    if (m.ols) {
      const OlsFit& f = *m.ols;
      lines[title].push_back(m.name);
      lines[head].push_back("estimate ");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::size_t j = term_index(f.terms, terms[i]);
        if (j == kNoIndex) {
          lines[est_line[i]].push_back("");
          lines[se_line[i]].push_back("");
          continue;
        }
        const auto e = static_cast<Eigen::Index>(j);
        const bool sig = std::abs(f.t_stats[e]) > kSignificanceT;
        lines[est_line[i]].push_back(fixed(f.coefficients[e], 2) + (sig ? "*" : " "));
        lines[se_line[i]].push_back("(" + fixed(f.robust_se[e], 2) + ")");
      }
      lines[r2].push_back(fixed(f.r_squared, 2) + " ");
    } else if (m.gwr) {
      const GwrSummary& s = *m.gwr;
      lines[title].push_back(m.name);
      for (const char* h : {"mean ", "min ", "max ", "t<-1.96", "t>1.96"}) lines[head].push_back(h);
      for (int c = 0; c < 4; ++c) lines[title].push_back("");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::size_t j = term_index(s.terms, terms[i]);
        for (int c = 0; c < 5; ++c) lines[se_line[i]].push_back("");
        if (j == kNoIndex) {
          for (int c = 0; c < 5; ++c) lines[est_line[i]].push_back("");
          continue;
        }
        const auto e = static_cast<Eigen::Index>(j);
        auto& row = lines[est_line[i]];
        row.push_back(fixed(s.mean[e], 2) + " ");
        row.push_back(fixed(s.min[e], 2) + " ");
        row.push_back(fixed(s.max[e], 2) + " ");
        row.push_back(fixed(100.0 * s.pct_sig_neg[e], 2) + "%");
        row.push_back(fixed(100.0 * s.pct_sig_pos[e], 2) + "%");
      }
      lines[r2].push_back(fixed(s.mean_local_r2, 2) + " ");
      lines[r2].push_back(fixed(s.min_local_r2, 2) + " ");
      lines[r2].push_back(fixed(s.max_local_r2, 2) + " ");
      lines[r2].push_back("");
      lines[r2].push_back("");
    }
  }

  std::ostringstream out;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (l == r2) out << std::string(label_w + kCellWidth * (lines[head].size() - 1), '-') << '\n';
    std::string text = pad_right(lines[l][0], label_w);
    for (std::size_t c = 1; c < lines[l].size(); ++c) {
      // Model names start their column group, left aligned.
      text += l == title ? pad_right(" " + lines[l][c], kCellWidth)
                         : pad_left(lines[l][c], kCellWidth);
    }
    out << rtrim(text) << '\n';
    if (l == head)
      out << std::string(label_w + kCellWidth * (lines[head].size() - 1), '-') << '\n';
  }
  return out.str();
}

std::string format_equity_summary(const std::vector<SubsetMean>& means) {
  std::size_t w = 6;
  for (const auto& m : means) w = std::max(w, m.subset.size());
  w += 2;
  std::ostringstream out;
  std::string group = means.empty() ? "" : means.front().group;
  out << "Inequity index, population-weighted mean (group " << group << ")\n";
  out << pad_right("subset", w) << pad_left("mean", 9) << pad_left("tracts", 9)
      << pad_left("undefined", 11) << '\n';
  for (const auto& m : means)
    out << pad_right(m.subset, w) << pad_left(fixed(m.mean, 4), 9)
        << pad_left(std::to_string(m.tracts), 9) << pad_left(std::to_string(m.undefined), 11)
        << '\n';
  return out.str();
}

// --- OLS ---------------------------------------------------------------------

std::string ols_csv(const OlsFit& fit, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "term,estimate,robust_se,t\n";
  for (std::size_t i = 0; i < fit.terms.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out << csv_escape(fit.terms[i]) << ',' << format_number(fit.coefficients[e]) << ','
        << format_number(fit.robust_se[e]) << ',' << format_number(fit.t_stats[e]) << '\n';
  }
  out << "n_obs," << fit.n << ",,\n";
  out << "r_squared," << format_number(fit.r_squared) << ",,\n";
  return out.str();
}

OlsFit read_ols_csv(const std::filesystem::path& path) {
  const CsvTable t = read_artifact(path);
  const std::size_t term = t.column("term"), est = t.column("estimate"), se = t.column("robust_se"),
                    tc = t.column("t");
  OlsFit f;
  std::vector<double> b, s, ts;
  for (const auto& row : t.rows) {
    if (row[term] == "n_obs") {
      f.n = static_cast<Eigen::Index>(cell(row, est, path));
    } else if (row[term] == "r_squared") {
      f.r_squared = cell(row, est, path);
    } else {
      f.terms.push_back(row[term]);
      b.push_back(cell(row, est, path));
      s.push_back(cell(row, se, path));
      ts.push_back(cell(row, tc, path));
    }
  }
  f.coefficients = Eigen::Map<Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
  f.robust_se = Eigen::Map<Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
  f.t_stats = Eigen::Map<Vector>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  f.k = static_cast<Eigen::Index>(b.size()) - 1;
  return f;
}

// --- GWR ---------------------------------------------------------------------

std::string gwr_summary_csv(const GwrSummary& s, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "term,mean,min,max,share_t_below,share_t_above\n";
  for (std::size_t i = 0; i < s.terms.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    out << csv_escape(s.terms[i]) << ',' << format_number(s.mean[e]) << ','
        << format_number(s.min[e]) << ',' << format_number(s.max[e]) << ','
        << format_number(s.pct_sig_neg[e]) << ',' << format_number(s.pct_sig_pos[e]) << '\n';
  }
  out << "local_r2," << format_number(s.mean_local_r2) << ',' << format_number(s.min_local_r2)
      << ',' << format_number(s.max_local_r2) << ",,\n";
  out << "tracts_used," << s.tracts_used << ",,,,\n";
  out << "excluded," << s.excluded << ",,,,\n";
  out << "neighbors_k," << s.neighbors_k << ",,,,\n";
  return out.str();
}

GwrSummary read_gwr_summary_csv(const std::filesystem::path& path) {
  const CsvTable t = read_artifact(path);
  const std::size_t term = t.column("term"), mean = t.column("mean"), mn = t.column("min"),
                    mx = t.column("max"), neg = t.column("share_t_below"),
                    pos = t.column("share_t_above");
  GwrSummary s;
  std::vector<double> a, b, c, d, e;
  for (const auto& row : t.rows) {
    const std::string& name = row[term];
    if (name == "local_r2") {
      s.mean_local_r2 = cell(row, mean, path);
      s.min_local_r2 = cell(row, mn, path);
      s.max_local_r2 = cell(row, mx, path);
    } else if (name == "tracts_used") {
      s.tracts_used = static_cast<std::size_t>(cell(row, mean, path));
    } else if (name == "excluded") {
      s.excluded = static_cast<std::size_t>(cell(row, mean, path));
    } else if (name == "neighbors_k") {
      s.neighbors_k = static_cast<std::size_t>(cell(row, mean, path));
    } else {
      s.terms.push_back(name);
      a.push_back(cell(row, mean, path));
      b.push_back(cell(row, mn, path));
      c.push_back(cell(row, mx, path));
      d.push_back(cell(row, neg, path));
      e.push_back(cell(row, pos, path));
    }
  }
  const auto n = static_cast<Eigen::Index>(a.size());
  s.mean = Eigen::Map<Vector>(a.data(), n);
  s.min = Eigen::Map<Vector>(b.data(), n);
  s.max = Eigen::Map<Vector>(c.data(), n);
  s.pct_sig_neg = Eigen::Map<Vector>(d.data(), n);
  s.pct_sig_pos = Eigen::Map<Vector>(e.data(), n);
  return s;
}

// --- equity ------------------------------------------------------------------

std::string equity_summary_csv(const std::vector<SubsetMean>& means, const RunStamp& stamp) {
  std::ostringstream out;
  out << csv_header_comment(stamp) << "subset,group,mean,tracts,undefined\n";
  for (const auto& m : means)
    out << csv_escape(m.subset) << ',' << csv_escape(m.group) << ',' << format_number(m.mean)
        << ',' << m.tracts << ',' << m.undefined << '\n';
  return out.str();
}

std::vector<SubsetMean> read_equity_summary_csv(const std::filesystem::path& path) {
  const CsvTable t = read_artifact(path);
  const std::size_t sub = t.column("subset"), grp = t.column("group"), mean = t.column("mean"),
                    n = t.column("tracts"), und = t.column("undefined");
  std::vector<SubsetMean> out;
  for (const auto& row : t.rows)
    out.push_back({row[sub], row[grp], cell(row, mean, path),
                   static_cast<std::size_t>(cell(row, n, path)),
                   static_cast<std::size_t>(cell(row, und, path))});
  return out;
}

// --- report ------------------------------------------------------------------

std::string report(const std::vector<std::filesystem::path>& artifacts) {
  std::vector<ModelResult> models;
  std::vector<std::vector<SubsetMean>> equity;
  for (const auto& path : artifacts) {
    const CsvTable t = read_artifact(path);
    std::string stem = path.stem().string();
    if (t.find("robust_se")) {
      if (stem.rfind("ols_", 0) == 0) stem = stem.substr(4);
      models.push_back({stem, read_ols_csv(path), std::nullopt});
    } else if (t.find("share_t_below")) {
      if (stem.rfind("gwr_", 0) == 0) stem = stem.substr(4);
      if (const auto cut = stem.rfind("_summary"); cut != std::string::npos) stem = stem.substr(0, cut);
      models.push_back({stem, std::nullopt, read_gwr_summary_csv(path)});
    } else if (t.find("subset")) {
      equity.push_back(read_equity_summary_csv(path));
    } else {
      throw ValidationError("unrecognized artifact: " + path.string());
    }
  }
  std::string out;
  if (!models.empty()) out += format_regression_table(models);
  for (const auto& e : equity) {
    if (!out.empty()) out += '\n';
    out += format_equity_summary(e);
  }
  return out;
}

}  // namespace tractequity
