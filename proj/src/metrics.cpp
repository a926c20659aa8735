#include <gradlattice/metrics.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gradlattice {

namespace {

constexpr const char* kModule = "metrics";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Rows of a numeric CSV with a fixed header; each row has header.size() fields.
std::vector<std::vector<double>> parse_csv(std::string_view text, const std::vector<std::string_view>& header) {
  std::vector<std::vector<double>> rows;
  bool seen_header = false;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    for (std::size_t start = 0;;) {
      const auto comma = line.find(',', start);
      fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (!seen_header) {
      if (fields != header) {
        std::string expected;
        for (auto h : header) expected += (expected.empty() ? "" : ",") + std::string(h);
        throw Error(kModule, where + "expected header \"" + expected + "\"");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != header.size())
      throw Error(kModule, where + "expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    std::vector<double> row;
    for (auto f : fields) {
      double v = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty())
        throw Error(kModule, where + "malformed number \"" + std::string(f) + "\"");
      if (!std::isfinite(v)) throw Error(kModule, where + "non-finite value");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (!seen_header) throw Error(kModule, "empty CSV");
  return rows;
}

// Prefixes an error from the parser with the file name.
Error in_file(const std::filesystem::path& path, const Error& e) {
  std::string msg = e.what();
  const std::string prefix = std::string(kModule) + ": ";
  if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
  return Error(kModule, path.string() + ": " + msg, e.kind());
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kModule, "cannot open file");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

void Trajectory::validate() const {
  if (samples.size() < 2) throw Error(kModule, "trajectory needs at least two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y))
      throw Error(kModule, "non-finite trajectory sample " + std::to_string(i));
    if (i > 0 && !(s.t > samples[i - 1].t))
      throw Error(kModule, "trajectory time must increase strictly (sample " + std::to_string(i) + ")");
  }
}

Trajectory parse_trajectory_csv(std::string_view text) {
  Trajectory traj;
  for (const auto& row : parse_csv(text, {"t", "x", "y"})) traj.samples.push_back({row[0], row[1], row[2]});
  traj.validate();
  return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  try {
    return parse_trajectory_csv(slurp(path));
  } catch (const Error& e) {
    throw in_file(path, e);
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream out;
  out << "t,x,y\n";
  char line[128];
  for (const auto& s : traj.samples) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", s.t, s.x, s.y);
    out << line;
  }
  return out.str();
}

Trajectory normalize_time(const Trajectory& traj) {
  traj.validate();
  const double t0 = traj.samples.front().t;
  const double span = traj.samples.back().t - t0;
  if (!(span > 0)) throw Error(kModule, "trajectory has zero duration");
  Trajectory out = traj;
  for (auto& s : out.samples) s.t = (s.t - t0) / span;
  out.samples.front().t = 0.0;
  out.samples.back().t = 1.0;
  return out;
}

Trajectory resample(const Trajectory& traj, int n) {
  traj.validate();
  if (n < 2) throw Error(kModule, "resampling needs at least two points");
  const auto& in = traj.samples;
  const double t0 = in.front().t;
  const double t1 = in.back().t;
  Trajectory out;
  out.samples.reserve(n);
  std::size_t seg = 0;
  for (int i = 0; i < n; ++i) {
    if (i == n - 1) {
      out.samples.push_back(in.back());
      break;
    }
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / (n - 1);
    while (seg + 2 < in.size() && in[seg + 1].t <= t) ++seg;
    const auto& a = in[seg];
    const auto& b = in[seg + 1];
    const double u = (t - a.t) / (b.t - a.t);
    out.samples.push_back({t, a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)});
  }
  return out;
}

ComparisonResult mean_distance(const Trajectory& a, const Trajectory& b) {
  if (a.samples.size() != b.samples.size())
    throw Error(kModule, "trajectories differ in length (" + std::to_string(a.samples.size()) + " vs " +
                             std::to_string(b.samples.size()) + ")");
  if (a.samples.empty()) throw Error(kModule, "empty trajectories");
  ComparisonResult r;
  const std::size_t n = a.samples.size();
  r.distances.resize(n);
  double sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r.distances[i] = std::hypot(a.samples[i].x - b.samples[i].x, a.samples[i].y - b.samples[i].y);
    sum += r.distances[i];
  }
  r.mean_distance = sum / static_cast<double>(n);
  double var = 0;
  for (double d : r.distances) var += (d - r.mean_distance) * (d - r.mean_distance);
  r.std_distance = std::sqrt(var / static_cast<double>(n));
  return r;
}

ComparisonResult compare_trajectories(const Trajectory& a, const Trajectory& b, int n) {
  return mean_distance(resample(normalize_time(a), n), resample(normalize_time(b), n));
}

StiffnessSeries parse_stiffness_csv(std::string_view text, double angle) {
  StiffnessSeries series;
  series.angle = angle;
  for (const auto& row : parse_csv(text, {"deflection_mm", "force_N"}))
    series.samples.push_back({row[0], row[1]});
  if (series.samples.size() < 2) throw Error(kModule, "stiffness series needs at least two samples");
  return series;
}

StiffnessSeries read_stiffness_csv(const std::filesystem::path& path, double angle) {
  try {
    return parse_stiffness_csv(slurp(path), angle);
  } catch (const Error& e) {
    throw in_file(path, e);
  }
}

double fit_stiffness(const StiffnessSeries& series) {
  if (series.samples.size() < 2) throw Error(kModule, "stiffness series needs at least two samples");
  // Sorted so the result does not depend on sample order.
  auto s = series.samples;
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
    return a.deflection != b.deflection ? a.deflection < b.deflection : a.force < b.force;
  });
  const double n = static_cast<double>(s.size());
  double md = 0, mf = 0;
  for (const auto& p : s) {
    md += p.deflection;
    mf += p.force;
  }
  md /= n;
  mf /= n;
  double sxx = 0, sxy = 0;
  for (const auto& p : s) {
    sxx += (p.deflection - md) * (p.deflection - md);
    sxy += (p.deflection - md) * (p.force - mf);
  }
  if (!(sxx > 0)) throw Error(kModule, "all deflections identical; slope undefined");
  return sxy / sxx;
}

std::vector<RankedDesign> rank_designs(std::vector<std::pair<std::string, ComparisonResult>> designs) {
  if (designs.empty()) throw Error(kModule, "no designs to rank");
  std::sort(designs.begin(), designs.end(), [](const auto& a, const auto& b) {
    if (a.second.mean_distance != b.second.mean_distance) return a.second.mean_distance < b.second.mean_distance;
    if (a.second.std_distance != b.second.std_distance) return a.second.std_distance < b.second.std_distance;
    return a.first < b.first;
  });
  std::vector<RankedDesign> out;
  for (std::size_t i = 0; i < designs.size(); ++i)
    out.push_back({static_cast<int>(i) + 1, std::move(designs[i].first), std::move(designs[i].second)});
  return out;
}

std::string ranking_report(const std::vector<RankedDesign>& ranked) {
  std::size_t width = 6;
  for (const auto& d : ranked) width = std::max(width, d.label.size());
  std::ostringstream out;
  char line[512];
  std::snprintf(line, sizeof line, "rank  %-*s  mean_mm      std_mm\n", static_cast<int>(width), "design");
  out << line;
  for (const auto& d : ranked) {
    std::snprintf(line, sizeof line, "%4d  %-*s  %-11.6f  %.6f\n", d.rank, static_cast<int>(width), d.label.c_str(),
                  d.result.mean_distance, d.result.std_distance);
    out << line;
  }
  return out.str();
}

std::string ranking_svg(const std::vector<RankedDesign>& ranked) {
  const int bar = 40, gap = 20, left = 60, top = 20, height = 240;
  const int width = left + static_cast<int>(ranked.size()) * (bar + gap) + gap;
  double peak = 0;
  for (const auto& d : ranked) peak = std::max(peak, d.result.mean_distance + d.result.std_distance);
  if (!(peak > 0)) peak = 1;
  auto y = [&](double v) { return top + height - v / peak * height; };

  std::ostringstream out;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" font-family=\"sans-serif\" "
                "font-size=\"11\">\n",
                width, top + height + 60);
  out << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", left - 5,
                top + height, width, top + height);
  out << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"10\" y=\"%d\" transform=\"rotate(-90 10 %d)\">mean distance (mm)</text>\n",
                top + height / 2 + 50, top + height / 2 + 50);
  out << buf;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& d = ranked[i];
    const double x = left + gap + static_cast<double>(i) * (bar + gap);
    const double m = d.result.mean_distance;
    const double s = d.result.std_distance;
    std::snprintf(buf, sizeof buf, "<rect x=\"%.1f\" y=\"%.2f\" width=\"%d\" height=\"%.2f\" fill=\"#7a9cc6\"/>\n", x,
                  y(m), bar, top + height - y(m));
    out << buf;
    const double cx = x + bar / 2.0;
    std::snprintf(buf, sizeof buf,
                  "<path d=\"M%.1f %.2f V%.2f M%.1f %.2f H%.1f M%.1f %.2f H%.1f\" stroke=\"black\"/>\n", cx,
                  y(std::max(0.0, m - s)), y(m + s), cx - 6, y(m + s), cx + 6, cx - 6, y(std::max(0.0, m - s)),
                  cx + 6);
    out << buf;
    std::string label;
    for (char c : d.label) {
      if (c == '<') label += "&lt;";
      else if (c == '>') label += "&gt;";
      else if (c == '&') label += "&amp;";
      else label += c;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\">%s</text>\n", cx,
                  top + height + 16, label.c_str());
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\">%.3f</text>\n", cx,
                  top + height + 30, m);
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gradlattice
