#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "epd/harness.hpp"

namespace epd {

namespace {

// %.17g round-trips IEEE doubles exactly and never prints locale-dependent
// separators, so the CSV is both lossless and byte-stable.
std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_field(const std::string& s, std::size_t row, std::size_t col) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size()) {
    throw std::runtime_error("csv: row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

void export_csv(const Trajectory& traj, const SystemModel& model,
                std::ostream& out) {
  const int n = model.n;
  out << 't';
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << ",u1,u2,H_ell,H_shift,H_zero,V,Q,termination\n";

  const char* term = termination_name(traj.termination.kind);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const State& x = traj.states[k];
    const Vec2& u = traj.inputs[k];
    const EnergySnapshot& d = traj.diagnostics[k];
    out << fmt_full(traj.times[k]);
    for (int i = 0; i < n; ++i) out << ',' << fmt_full(x[i]);
    out << ',' << fmt_full(u[0]) << ',' << fmt_full(u[1]);
    out << ',' << fmt_full(d.h_ell) << ',' << fmt_full(d.h_shift) << ','
        << fmt_full(d.h_zero) << ',' << fmt_full(d.v) << ',' << fmt_full(d.q);
    out << ',' << term << '\n';
  }
}

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  table.columns = split(line, ',');
  if (table.columns.size() < 2 || table.columns.front() != "t" ||
      table.columns.back() != "termination") {
    throw std::runtime_error("csv: unrecognized header: '" + line + "'");
  }
  const std::size_t width = table.columns.size();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    std::vector<std::string> fields = split(line, ',');
    if (fields.size() != width) {
      throw std::runtime_error("csv: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(width));
    }
    std::vector<double> values(width - 1);
    for (std::size_t c = 0; c + 1 < width; ++c)
      values[c] = parse_field(fields[c], row, c);
    table.rows.push_back(std::move(values));
    table.terminations.push_back(fields.back());
  }
  return table;
}

// --- SVG plotting -------------------------------------------------------------

namespace {

struct Series {
  std::string label;
  std::vector<double> xs, ys;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

// Canvas geometry (pixels).
constexpr double kWidth = 800, kHeight = 480;
constexpr double kLeft = 70, kRight = 780, kTop = 40, kBottom = 430;

std::string fmt_px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Range {
  double lo = 0.0, hi = 1.0;
  double map(double v, double a, double b) const {
    return a + (v - lo) / (hi - lo) * (b - a);
  }
};

Range fit_range(double lo, double hi, double pad_frac) {
  if (!(lo <= hi)) return {0.0, 1.0};  // no finite data
  if (hi - lo < 1e-300) {
    const double pad = std::max(1.0, std::abs(lo));
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * pad_frac;
  return {lo - pad, hi + pad};
}

void render_chart(const std::string& title, const std::string& x_label,
                  const std::string& y_label, const std::vector<Series>& series,
                  std::ostream& out) {
  double xlo = 1.0, xhi = -1.0, ylo = 1.0, yhi = -1.0;
  bool any = false;
  for (const Series& s : series) {
    for (std::size_t k = 0; k < s.xs.size(); ++k) {
      if (!std::isfinite(s.xs[k]) || !std::isfinite(s.ys[k])) continue;
      if (!any) {
        xlo = xhi = s.xs[k];
        ylo = yhi = s.ys[k];
        any = true;
      } else {
        xlo = std::min(xlo, s.xs[k]);
        xhi = std::max(xhi, s.xs[k]);
        ylo = std::min(ylo, s.ys[k]);
        yhi = std::max(yhi, s.ys[k]);
      }
    }
  }
  const Range rx = fit_range(xlo, xhi, 0.0);
  const Range ry = fit_range(ylo, yhi, 0.05);

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"480\" "
         "viewBox=\"0 0 800 480\" font-family=\"Helvetica,Arial,sans-serif\">\n";
  out << "<rect width=\"800\" height=\"480\" fill=\"#ffffff\"/>\n";
  out << "<text x=\"400\" y=\"22\" text-anchor=\"middle\" font-size=\"15\" "
         "fill=\"#222222\">" << title << "</text>\n";

  // Grid and ticks: five divisions per axis.
  for (int i = 0; i <= 4; ++i) {
    const double xv = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    const double yv = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    const std::string px = fmt_px(rx.map(xv, kLeft, kRight));
    const std::string py = fmt_px(ry.map(yv, kBottom, kTop));
    out << "<line x1=\"" << px << "\" y1=\"" << fmt_px(kTop) << "\" x2=\"" << px
        << "\" y2=\"" << fmt_px(kBottom) << "\" stroke=\"#dddddd\"/>\n";
    out << "<line x1=\"" << fmt_px(kLeft) << "\" y1=\"" << py << "\" x2=\""
        << fmt_px(kRight) << "\" y2=\"" << py << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << px << "\" y=\"" << fmt_px(kBottom + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\" fill=\"#444444\">"
        << fmt_tick(xv) << "</text>\n";
    out << "<text x=\"" << fmt_px(kLeft - 8) << "\" y=\"" << py
        << "\" text-anchor=\"end\" dominant-baseline=\"middle\" font-size=\"11\" "
           "fill=\"#444444\">" << fmt_tick(yv) << "</text>\n";
  }
  out << "<rect x=\"" << fmt_px(kLeft) << "\" y=\"" << fmt_px(kTop) << "\" width=\""
      << fmt_px(kRight - kLeft) << "\" height=\"" << fmt_px(kBottom - kTop)
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << fmt_px((kLeft + kRight) / 2) << "\" y=\""
      << fmt_px(kHeight - 12) << "\" text-anchor=\"middle\" font-size=\"12\" "
         "fill=\"#222222\">" << x_label << "</text>\n";
  out << "<text x=\"16\" y=\"" << fmt_px((kTop + kBottom) / 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222222\" "
         "transform=\"rotate(-90 16 " << fmt_px((kTop + kBottom) / 2) << ")\">"
      << y_label << "</text>\n";

  // Series polylines, decimated to a bounded point budget.
  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    const std::size_t count = s.xs.size();
    const std::size_t stride = std::max<std::size_t>(1, (count + 3999) / 4000);
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    auto emit = [&](std::size_t k) {
      if (!std::isfinite(s.xs[k]) || !std::isfinite(s.ys[k])) return;
      if (!first) out << ' ';
      first = false;
      out << fmt_px(rx.map(s.xs[k], kLeft, kRight)) << ','
          << fmt_px(ry.map(s.ys[k], kBottom, kTop));
    };
    for (std::size_t k = 0; k < count; k += stride) emit(k);
    if (count > 0 && (count - 1) % stride != 0) emit(count - 1);
    out << "\"/>\n";

    // Legend entry.
    const double lx = kLeft + 8 + 120.0 * static_cast<double>(si % 5);
    const double ly = kTop + 14 + 16.0 * static_cast<double>(si / 5);
    out << "<line x1=\"" << fmt_px(lx) << "\" y1=\"" << fmt_px(ly - 4) << "\" x2=\""
        << fmt_px(lx + 22) << "\" y2=\"" << fmt_px(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << fmt_px(lx + 27) << "\" y=\"" << fmt_px(ly)
        << "\" font-size=\"11\" fill=\"#222222\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace

void export_plot(const Trajectory& traj, PlotKind kind, const SystemModel& model,
                 std::ostream& out) {
  const std::size_t count = traj.times.size();
  std::vector<Series> series;
  std::string title, x_label, y_label;

  switch (kind) {
    case PlotKind::StatesVsTime: {
      title = "state components vs time";
      x_label = "t [s]";
      y_label = "state";
      for (int i = 0; i < model.n; ++i) {
        Series s;
        s.label = "x" + std::to_string(i + 1);
        s.xs = traj.times;
        s.ys.reserve(count);
        for (std::size_t k = 0; k < count; ++k) s.ys.push_back(traj.states[k][i]);
        series.push_back(std::move(s));
      }
      break;
    }
    case PlotKind::EnergyVsTime: {
      title = "energy diagnostics vs time";
      x_label = "t [s]";
      y_label = "value";
      const char* labels[5] = {"H_ell", "H_shift", "H_zero", "V", "Q"};
      for (int j = 0; j < 5; ++j) {
        Series s;
        s.label = labels[j];
        s.xs = traj.times;
        s.ys.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
          const EnergySnapshot& d = traj.diagnostics[k];
          const double vals[5] = {d.h_ell, d.h_shift, d.h_zero, d.v, d.q};
          s.ys.push_back(vals[j]);
        }
        series.push_back(std::move(s));
      }
      break;
    }
    case PlotKind::Phase3dProjection: {
      title = "phase trajectory (oblique projection of x1, x2, x3)";
      x_label = "x1 - 0.35 x3";
      y_label = "x2 - 0.35 x3";
      Series s;
      s.label = "trajectory";
      s.xs.reserve(count);
      s.ys.reserve(count);
      for (std::size_t k = 0; k < count; ++k) {
        const State& x = traj.states[k];
        s.xs.push_back(x[0] - 0.35 * x[2]);
        s.ys.push_back(x[1] - 0.35 * x[2]);
      }
      series.push_back(std::move(s));
      break;
    }
    default:
      throw std::runtime_error("unknown plot kind");
  }
  render_chart(title, x_label, y_label, series, out);
}

}  // namespace epd
