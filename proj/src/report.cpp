#include "rantl/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;

namespace rantl {
namespace {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name, const fs::path& src) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error(src.string() + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(p.string() + ": empty file");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto r = split(line);
    if (r.size() != t.header.size())
      throw std::runtime_error(p.string() + ": ragged row '" + line + "'");
    t.rows.push_back(std::move(r));
  }
  return t;
}

// Empty cell (no CI with one run) reads as 0.
double to_num(const std::string& s) {
  if (s.empty()) return 0.0;
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("bad number '" + s + "' in CSV");
  return v;
}

std::string fmt(double v, int digits = 6) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

struct Point {
  double x, y, hw;
};

struct Series {
  std::string name;
  std::vector<Point> points;
};

struct Panel {
  std::string title, xlabel, ylabel;
  bool log_y = false;
  double whisker_stride = 0.0;  // only every n-th x gets a whisker; 0 = all
  std::vector<Series> series;
};

const char* colour(const std::string& algo) {
  if (algo == "qtdrl") return "#1f77b4";
  if (algo == "atdrl") return "#d62728";
  if (algo == "dqn") return "#2ca02c";
  if (algo == "ppf") return "#ff7f0e";
  return "#555555";
}

constexpr double kW = 460, kH = 320, kL = 70, kR = 20, kT = 40, kB = 50;
constexpr double kLogFloor = 1e-5;

void draw(std::ostream& svg, const Panel& p, double ox) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : p.series)
    for (const auto& pt : s.points) {
      x0 = std::min(x0, pt.x);
      x1 = std::max(x1, pt.x);
      const double lo = pt.y - pt.hw, hi = pt.y + pt.hw;
      if (p.log_y) {
        if (pt.y > 0) y0 = std::min(y0, std::max(lo, pt.y * 0.5));
        y1 = std::max(y1, hi);
      } else {
        y0 = std::min(y0, lo);
        y1 = std::max(y1, hi);
      }
    }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (x1 <= x0) x1 = x0 + 1;
  if (p.log_y) {
    y0 = std::isfinite(y0) ? std::max(kLogFloor, std::pow(10.0, std::floor(std::log10(y0)))) : kLogFloor;
    y1 = std::max(1.0, y1);
  } else {
    if (!std::isfinite(y0)) y0 = 0, y1 = 1;
    if (y1 <= y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
  }
  const double pw = kW - kL - kR, ph = kH - kT - kB;
  auto X = [&](double x) { return ox + kL + (x - x0) / (x1 - x0) * pw; };
  auto Y = [&](double y) {
    if (p.log_y) {
      y = std::max(y, y0);
      return kT + (std::log10(y1) - std::log10(y)) / (std::log10(y1) - std::log10(y0)) * ph;
    }
    return kT + (y1 - y) / (y1 - y0) * ph;
  };

  svg << "<g class=\"panel\" data-x-min=\"" << fmt(x0) << "\" data-x-max=\"" << fmt(x1)
      << "\" data-y-scale=\"" << (p.log_y ? "log" : "linear") << "\">\n<text x=\"" << ox + kW / 2 << "\" y=\"20\" text-anchor=\"middle\">" << p.title
      << "</text>\n";
  svg << "<rect x=\"" << ox + kL << "\" y=\"" << kT << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  // ticks
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4;
    svg << "<text x=\"" << X(xv) << "\" y=\"" << kT + ph + 16
        << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
  }
  if (p.log_y) {
    for (double d = std::log10(y0); d <= std::log10(y1) + 1e-9; d += 1.0)
      svg << "<text x=\"" << ox + kL - 4 << "\" y=\"" << Y(std::pow(10.0, d)) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">1e" << fmt(std::round(d)) << "</text>\n";
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double yv = y0 + (y1 - y0) * i / 4;
      svg << "<text x=\"" << ox + kL - 4 << "\" y=\"" << Y(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
    }
  }
  svg << "<text x=\"" << ox + kL + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
      << p.xlabel << "</text>\n";
  svg << "<text transform=\"translate(" << ox + 16 << "," << kT + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << p.ylabel << "</text>\n";

  int idx = 0;
  for (const auto& s : p.series) {
    const char* c = colour(s.name);
    svg << "<g class=\"series\" data-algorithm=\"" << s.name << "\">\n<polyline fill=\"none\" stroke=\""
        << c << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& pt : s.points) svg << X(pt.x) << ',' << Y(pt.y) << ' ';
    svg << "\"/>\n";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& pt = s.points[i];
      if (pt.hw <= 0) continue;
      if (p.whisker_stride > 0 && std::fmod(pt.x, p.whisker_stride) != 0) continue;
      const double xp = X(pt.x);
      svg << "<line class=\"ci\" x1=\"" << xp << "\" x2=\"" << xp << "\" y1=\"" << Y(pt.y - pt.hw)
          << "\" y2=\"" << Y(pt.y + pt.hw) << "\" stroke=\"" << c << "\"/>\n";
    }
    svg << "<text x=\"" << ox + kL + pw - 6 << "\" y=\"" << kT + 16 + 14 * idx
        << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << c << "\">" << s.name
        << "</text>\n</g>\n";
    ++idx;
  }
  svg << "</g>\n";
}

void write_svg(const fs::path& path, const std::vector<Panel>& panels) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW * panels.size()
      << "\" height=\"" << kH << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) draw(out, panels[i], kW * i);
  out << "</svg>\n";
  if (!out) throw std::runtime_error("error writing " + path.string());
}

// Group rows by algorithm, keeping first-seen order.
std::vector<Series> series_of(const Table& t, const fs::path& src, const std::string& xcol,
                              const std::string& ycol, const std::string& hwcol) {
  const auto a = t.col("algorithm", src), x = t.col(xcol, src), y = t.col(ycol, src);
  const std::size_t hw = hwcol.empty() ? 0 : t.col(hwcol, src);
  std::vector<Series> out;
  std::map<std::string, std::size_t> at;
  for (const auto& r : t.rows) {
    auto [it, fresh] = at.try_emplace(r[a], out.size());
    if (fresh) out.push_back({r[a], {}});
    out[it->second].points.push_back(
        {to_num(r[x]), to_num(r[y]), hwcol.empty() ? 0.0 : to_num(r[hw])});
  }
  return out;
}

}  // namespace

std::vector<fs::path> report(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const auto& f : kReportInputs)
    if (!fs::is_regular_file(dir / f)) missing.push_back(f);
  if (!missing.empty()) {
    std::string msg = "report needs these CSVs in " + dir.string() + ":";
    for (const auto& f : kReportInputs) msg += " " + f;
    msg += "; missing:";
    for (const auto& f : missing) msg += " " + f;
    msg += " (produce them with `rantl run` and `rantl sweep` for both axes)";
    throw MissingCsvError(missing, msg);
  }

  std::vector<fs::path> written;

  {
    const fs::path src = dir / "ccdf.csv";
    Panel p{"URLLC delay CCDF", "delay threshold (ms)", "P(delay > threshold)", true, 0.0,
            series_of(read_csv(src), src, "threshold_ms", "probability", "")};
    written.push_back(dir / kReportOutputs[0]);
    write_svg(written.back(), {p});
  }
  const std::pair<const char*, const char*> sweeps[] = {{"sweep_urllc_load.csv", "urllc_load_mbps"},
                                                        {"sweep_mec_capacity.csv", "mec_capacity_gcps"}};
  for (int i = 0; i < 2; ++i) {
    const fs::path src = dir / sweeps[i].first;
    const Table t = read_csv(src);
    const std::string xcol = sweeps[i].second;
    const std::string xlabel = i == 0 ? "URLLC load (Mbps)" : "MEC capacity (Gcycles/s)";
    Panel delay{"URLLC delay", xlabel, "mean delay (ms)", false, 0.0,
                series_of(t, src, xcol, "urllc_delay_ms_mean", "urllc_delay_ms_ci95")};
    Panel tput{"eMBB throughput per cell", xlabel, "throughput (Mbps)", false, 0.0,
               series_of(t, src, xcol, "embb_throughput_mbps_mean", "embb_throughput_mbps_ci95")};
    written.push_back(dir / kReportOutputs[1 + i]);
    write_svg(written.back(), {delay, tput});
  }
  {
    const fs::path src = dir / "convergence.csv";
    Panel p{"Moving-average reward (window 100)", "TTI", "reward", false, 100.0,
            series_of(read_csv(src), src, "tti", "reward_ma100_mean", "reward_ma100_ci95")};
    written.push_back(dir / kReportOutputs[3]);
    write_svg(written.back(), {p});
  }
  return written;
}

}  // namespace rantl
