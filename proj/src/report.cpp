// Copyright 2026 The hpc-sentinel Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "hpcs/csv.hpp"
#include "hpcs/error.hpp"
#include "hpcs/pipeline.hpp"

namespace hpcs {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd"};

std::string escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step for about `n` ticks over `span`.
double nice_step(double span, int n) {
  const double raw = span / n;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (const double m : {1.0, 2.0, 5.0}) {
    if (raw <= m * mag) return m * mag;
  }
  return 10.0 * mag;
}

void chart_body(std::ostringstream& svg, const ChartSpec& spec, const std::vector<Series>& series,
                int y_offset) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) throw usage_error("EmptySeries", "chart has no points");
  if (x1 == x0) x1 = x0 + 1;
  if (y1 - y0 < 1e-9 * std::max(1.0, std::abs(y0))) {
    const double pad = std::max(1e-3, std::abs(y0) * 1e-3);
    y0 -= pad;
    y1 += pad;
  }
  const double pad = (y1 - y0) * 0.05;
  y0 -= pad;
  y1 += pad;

  const int left = 70, right = 130, top = 30, bottom = 45;
  const double pw = spec.width - left - right;
  const double ph = spec.height - top - bottom;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  const auto py = [&](double y) { return y_offset + top + (y1 - y) / (y1 - y0) * ph; };

  svg << fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                     left + pw / 2, y_offset + 18, escape(spec.title));
  svg << fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"#444\"/>\n",
      left, y_offset + top, pw, ph);

  const double xs = nice_step(x1 - x0, 8);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9; t += xs) {
    svg << fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1:.1f}\" y2=\"{2:.1f}\" "
                       "stroke=\"#ddd\"/>\n",
                       px(t), static_cast<double>(y_offset + top), y_offset + top + ph);
    svg << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" "
                       "text-anchor=\"middle\">{:g}</text>\n",
                       px(t), y_offset + top + ph + 15, t);
  }
  const double ys = nice_step(y1 - y0, 5);
  for (double t = std::ceil(y0 / ys) * ys; t <= y1 + 1e-12; t += ys) {
    svg << fmt::format("<line x1=\"{0:.1f}\" x2=\"{1:.1f}\" y1=\"{2:.1f}\" y2=\"{2:.1f}\" "
                       "stroke=\"#ddd\"/>\n",
                       static_cast<double>(left), left + pw, py(t));
    svg << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\" "
                       "text-anchor=\"end\">{:g}</text>\n",
                       left - 5.0, py(t) + 4, std::abs(t) < ys * 1e-9 ? 0.0 : t);
  }
  svg << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"12\" "
                     "text-anchor=\"middle\">{}</text>\n",
                     left + pw / 2, y_offset + spec.height - 8.0, escape(spec.x_label));
  svg << fmt::format("<text x=\"14\" y=\"{0:.1f}\" font-size=\"12\" text-anchor=\"middle\" "
                     "transform=\"rotate(-90 14 {0:.1f})\">{1}</text>\n",
                     y_offset + top + ph / 2, escape(spec.y_label));

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      points += fmt::format("{}{:.2f},{:.2f}", i ? " " : "", px(s.x[i]), py(s.y[i]));
    }
    svg << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" "
                       "points=\"{}\"/>\n",
                       color, points);
    const double ly = y_offset + top + 14.0 + 16.0 * static_cast<double>(k);
    svg << fmt::format("<line x1=\"{0:.1f}\" x2=\"{1:.1f}\" y1=\"{2:.1f}\" y2=\"{2:.1f}\" "
                       "stroke=\"{3}\" stroke-width=\"2\"/>\n",
                       left + pw + 10, left + pw + 30, ly, color);
    svg << fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-size=\"11\">{}</text>\n",
                       left + pw + 35, ly + 4, escape(s.label));
  }
}

std::string wrap(int width, int height, const std::string& body) {
  return fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
                     "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">\n"
                     "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{2}</svg>\n",
                     width, height, body);
}

}  // namespace

std::string render_line_chart(const ChartSpec& spec, const std::vector<Series>& series) {
  std::ostringstream body;
  chart_body(body, spec, series, 0);
  return wrap(spec.width, spec.height, body.str());
}

std::string render_simulation_svg(const std::filesystem::path& csv_path, std::string_view title) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw data_error("IoError", "cannot open " + csv_path.string());
  std::vector<std::string> row;
  if (!csv::read_row(in, row)) throw data_error("BadCsv", csv_path.string() + ": empty file");
  const std::vector<std::string> wanted = {"time_s", "freq_hz", "pv_kw", "diesel_kw", "ess_kw",
                                           "load_kw"};
  std::vector<std::size_t> col;
  for (const auto& name : wanted) {
    const auto it = std::find(row.begin(), row.end(), name);
    if (it == row.end()) throw data_error("BadCsv", csv_path.string() + ": missing column " + name);
    col.push_back(static_cast<std::size_t>(it - row.begin()));
  }
  std::vector<std::vector<double>> data(wanted.size());
  std::size_t line = 1;
  while (csv::read_row(in, row)) {
    ++line;
    if (row.size() == 1 && row[0].empty()) continue;
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      if (col[k] >= row.size()) {
        throw data_error("BadCsv", fmt::format("{}:{}: short row", csv_path.string(), line));
      }
      try {
        std::size_t used = 0;
        data[k].push_back(std::stod(row[col[k]], &used));
        if (used != row[col[k]].size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw data_error("BadCsv", fmt::format("{}:{}: bad number '{}'", csv_path.string(), line,
                                               row[col[k]]));
      }
    }
  }
  const ChartSpec freq{std::string(title) + ": frequency", "time (s)", "Hz"};
  const ChartSpec power{std::string(title) + ": power", "time (s)", "kW"};
  std::ostringstream body;
  chart_body(body, freq, {{"frequency", data[0], data[1]}}, 0);
  chart_body(body, power,
             {{"pv", data[0], data[2]},
              {"diesel", data[0], data[3]},
              {"ess", data[0], data[4]},
              {"load", data[0], data[5]}},
             freq.height);
  return wrap(freq.width, freq.height + power.height, body.str());
}

}  // namespace hpcs
