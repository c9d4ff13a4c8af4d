#include "gnnlab/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gnnlab/errors.hpp"
#include "gnnlab/serialize.hpp"

namespace gnnlab {

namespace fs = std::filesystem;

namespace {

std::string num(double v) { return std::isfinite(v) ? fmt::format("{}", v) : std::string(); }

}  // namespace

std::string format_result_row(const ResultRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6f},{}", to_string(r.study), r.topology, r.n,
                     num(r.pi), num(r.avg_degree), r.max_degree, to_string(r.op), to_string(r.method), r.trial,
                     r.ok() ? num(r.train_mse) : "", r.ok() ? num(r.test_mse) : "", r.m, r.r,
                     num(r.laplacian_energy), r.wall_time, r.status);
}

std::string format_results_csv(const ResultTable& table) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const auto& r : table.rows) {
    out += format_result_row(r);
    out += '\n';
  }
  return out;
}

namespace {

// Group key over the factor columns; fields a grouping ignores are left at
// their sentinel values and printed empty.
struct GroupKey {
  Study study;
  std::string topology;
  std::size_t n;
  double pi;
  double avg_degree;
  OperatorKind op;
  Method method;

  auto tie() const { return std::tie(study, topology, n, pi, avg_degree, op, method); }
  bool operator<(const GroupKey& o) const { return tie() < o.tie(); }
};

constexpr std::size_t kNoN = 0;

struct Mean {
  std::size_t count = 0;
  double max_degree = 0.0, train = 0.0, test = 0.0;
};

std::map<GroupKey, Mean> cell_means(const ResultTable& table) {
  std::map<GroupKey, Mean> means;
  for (const auto& r : table.rows) {
    if (!r.ok()) continue;
    auto& m = means[{r.study, r.topology, r.n, r.pi, r.avg_degree, r.op, r.method}];
    ++m.count;
    m.max_degree += static_cast<double>(r.max_degree);
    m.train += r.train_mse;
    m.test += r.test_mse;
  }
  for (auto& [k, m] : means) {
    const double c = static_cast<double>(m.count);
    m.max_degree /= c;
    m.train /= c;
    m.test /= c;
  }
  return means;
}

// One summary line: kind, the seven factor fields, then the statistics.
struct SummaryLine {
  std::array<std::string, 18> f;

  SummaryLine(std::string_view kind, const GroupKey& k, bool with_n, bool with_pi, bool with_degree) {
    f[0] = kind;
    f[1] = to_string(k.study);
    f[2] = k.topology;
    f[3] = with_n ? fmt::format("{}", k.n) : "";
    f[4] = with_pi ? num(k.pi) : "";
    f[5] = with_degree ? num(k.avg_degree) : "";
    f[6] = to_string(k.op);
    f[7] = to_string(k.method);
  }
  std::string str() const { return fmt::format("{}\n", fmt::join(f, ",")); }
};

enum Col { kCount = 8, kMaxDeg, kTrain, kTest, kSlope, kIntercept, kR2, kPoints, kRho, kP };

// Series of (x, mean test MSE) for the slope studies; x is n or 1/pi.
std::map<GroupKey, std::vector<std::pair<double, double>>> slope_series(const std::map<GroupKey, Mean>& means) {
  std::map<GroupKey, std::vector<std::pair<double, double>>> series;
  for (const auto& [k, m] : means) {
    if (k.study == Study::convergence) {
      auto g = k;
      g.n = kNoN;
      series[g].emplace_back(static_cast<double>(k.n), m.test);
    } else if (k.study == Study::label_fraction) {
      auto g = k;
      g.pi = 0.0;
      series[g].emplace_back(1.0 / k.pi, m.test);
    }
  }
  return series;
}

}  // namespace

std::string format_summary_csv(const ResultTable& table) {
  std::string out = kSummaryHeader;
  out += '\n';
  const auto means = cell_means(table);
  for (const auto& [k, m] : means) {
    SummaryLine line("mean", k, true, true, true);
    line.f[kCount] = fmt::format("{}", m.count);
    line.f[kMaxDeg] = num(m.max_degree);
    line.f[kTrain] = num(m.train);
    line.f[kTest] = num(m.test);
    out += line.str();
  }

  for (const auto& [k, pts] : slope_series(means)) {
    std::set<double> distinct;
    std::vector<double> xs, ys;
    for (const auto& [x, y] : pts) {
      if (!(y > 0.0)) continue;
      distinct.insert(x);
      xs.push_back(x);
      ys.push_back(y);
    }
    if (distinct.size() < 2) continue;
    const auto fit = fit_slope(xs, ys);
    const bool conv = k.study == Study::convergence;
    SummaryLine line("slope", k, !conv, conv, true);
    line.f[kCount] = fmt::format("{}", xs.size());
    line.f[kSlope] = num(fit.slope);
    line.f[kIntercept] = num(fit.intercept);
    line.f[kR2] = num(fit.r_squared);
    line.f[kPoints] = fmt::format("{}", fit.n_points);
    out += line.str();
  }

  std::map<GroupKey, std::pair<std::vector<double>, std::vector<double>>> degree;
  for (const auto& r : table.rows) {
    if (!r.ok() || r.study != Study::degree) continue;
    auto& [xs, ys] = degree[{r.study, r.topology, kNoN, r.pi, 0.0, r.op, r.method}];
    xs.push_back(static_cast<double>(r.max_degree));
    ys.push_back(r.test_mse);
  }
  for (const auto& [k, xy] : degree) {
    if (xy.first.size() < 3) continue;
    const auto rc = spearman(xy.first, xy.second);
    SummaryLine line("spearman", k, false, true, false);
    line.f[kCount] = fmt::format("{}", rc.n_points);
    line.f[kPoints] = fmt::format("{}", rc.n_points);
    line.f[kRho] = num(rc.rho);
    line.f[kP] = num(rc.p_value);
    out += line.str();
  }
  return out;
}

// ---- SVG -----------------------------------------------------------------------

namespace {

constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                                    "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

struct Panel {
  std::string file;
  std::string title;
  std::string x_label;
  std::vector<Series> series;
  double ref_slope = 0.0;  // 0 = no reference line
};

std::string render_panel(const Panel& p) {
  constexpr double W = 720, H = 440, L = 70, R = 200, T = 40, B = 50;
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : p.series)
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      xmin = std::min(xmin, std::log10(x));
      xmax = std::max(xmax, std::log10(x));
      ymin = std::min(ymin, std::log10(y));
      ymax = std::max(ymax, std::log10(y));
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax - xmin < 1e-9) xmin -= 0.5, xmax += 0.5;
  if (ymax - ymin < 1e-9) ymin -= 0.5, ymax += 0.5;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  auto sx = [&](double lx) { return L + (lx - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double ly) { return H - B - (ly - ymin) / (ymax - ymin) * (H - T - B); };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-size=\"14\">{3}</text>\n",
      W, H, L, p.title);
  svg += fmt::format("<g stroke=\"black\" fill=\"none\"><path d=\"M{} {} L{} {} L{} {}\"/></g>\n", L, T, L, H - B,
                     W - R, H - B);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{} (log scale)</text>\n", (L + W - R) / 2,
                     H - 12, p.x_label);
  svg += fmt::format("<text x=\"16\" y=\"{}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">test MSE "
                     "(log scale)</text>\n",
                     (T + H - B) / 2, (T + H - B) / 2);
  for (double lx : {xmin, xmax}) {
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.4g}</text>\n", sx(lx), H - B + 16,
                       std::pow(10.0, lx));
  }
  for (double ly : {ymin, ymax}) {
    svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3g}</text>\n", L - 6, sy(ly) + 4,
                       std::pow(10.0, ly));
  }

  std::size_t color = 0;
  for (const auto& s : p.series) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : s.points) {
      if (!(x > 0.0) || !(y > 0.0)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", sx(std::log10(x)), sy(std::log10(y)));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\" points=\"{}\"/>\n", c, pts);
    const double ly = T + 14.0 * static_cast<double>(color);
    svg += fmt::format("<text x=\"{}\" y=\"{:.0f}\" fill=\"{}\">{}</text>\n", W - R + 10, ly, c, s.label);
  }

  if (p.ref_slope != 0.0 && !p.series.empty() && !p.series.front().points.empty()) {
    // reference power law through the first point of the first series
    const auto [x0, y0] = p.series.front().points.front();
    if (x0 > 0.0 && y0 > 0.0) {
      const double lx0 = std::log10(x0), ly0 = std::log10(y0);
      const double ly1 = ly0 + p.ref_slope * (xmax - lx0);
      svg += fmt::format(
          "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n",
          sx(lx0), sy(ly0), sx(xmax), sy(ly1));
      svg += fmt::format("<text x=\"{}\" y=\"{:.0f}\" fill=\"gray\">slope {}</text>\n", W - R + 10, H - B,
                         p.ref_slope);
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string series_label(Method m, std::string_view extra) { return fmt::format("{} {}", to_string(m), extra); }

}  // namespace

std::vector<std::pair<std::string, std::string>> render_svgs(const ResultTable& table) {
  const auto means = cell_means(table);
  std::map<std::string, Panel> panels;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>> pts;

  auto add = [&](const std::string& file, const std::string& title, const std::string& x_label, double ref,
                 const std::string& label, double x, double y) {
    auto& p = panels[file];
    if (p.file.empty()) p = {file, title, x_label, {}, ref};
    pts[{file, label}].emplace_back(x, y);
  };

  for (const auto& [k, m] : means) {
    switch (k.study) {
      case Study::convergence:
        add("convergence.svg", "test MSE against n", "n", -0.5, series_label(k.method, fmt::format("pi={}", k.pi)),
            static_cast<double>(k.n), m.test);
        break;
      case Study::label_fraction:
        add("label_fraction.svg", "test MSE against 1/pi", "1/pi", 1.0,
            series_label(k.method, fmt::format("n={}", k.n)), 1.0 / k.pi, m.test);
        break;
      case Study::topology:
        add(fmt::format("topology_{}.svg", k.topology), fmt::format("{} graph: test MSE against pi", k.topology),
            "pi", 0.0, std::string(to_string(k.method)), k.pi, m.test);
        break;
      case Study::degree:
        break;
      case Study::real:
        add(fmt::format("real_{}.svg", k.topology), fmt::format("{}: held-out MSE against pi", k.topology), "pi",
            0.0, std::string(to_string(k.method)), k.pi, m.test);
        break;
    }
  }
  // degree panels: mean test MSE per realized max degree
  std::map<std::tuple<OperatorKind, Method, std::size_t>, std::pair<double, std::size_t>> by_degree;
  for (const auto& r : table.rows) {
    if (!r.ok() || r.study != Study::degree) continue;
    auto& acc = by_degree[{r.op, r.method, r.max_degree}];
    acc.first += r.test_mse;
    ++acc.second;
  }
  for (const auto& [k, acc] : by_degree) {
    const auto& [op, method, deg] = k;
    add(fmt::format("degree_{}.svg", to_string(op)), fmt::format("{}: test MSE against max degree", to_string(op)),
        "max degree", 0.0, std::string(to_string(method)), static_cast<double>(deg),
        acc.first / static_cast<double>(acc.second));
  }

  for (auto& [key, points] : pts) {
    std::sort(points.begin(), points.end());
    panels[key.first].series.push_back({key.second, points});
  }
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [file, panel] : panels) out.emplace_back(file, render_panel(panel));
  return out;
}

std::vector<fs::path> emit_outputs(const ResultTable& table, const fs::path& out_dir) {
  if (table.rows.empty()) throw InputError("emit_outputs: empty result table");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
  std::vector<fs::path> written;
  auto put = [&](const std::string& name, const std::string& body) {
    const auto path = out_dir / name;
    write_text_file(path, body);
    written.push_back(path);
  };
  put("results.csv", format_results_csv(table));
  put("summary.csv", format_summary_csv(table));
  for (const auto& [name, body] : render_svgs(table)) put(name, body);
  return written;
}

}  // namespace gnnlab
