#pragma once

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "forge/eval/metrics.hpp"

namespace forge::eval {

inline std::string percent(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * x);
  return buf;
}

/// Plain-text summary of a report.
inline std::string render_text(const EvalReport& r) {
  std::ostringstream out;
  out << "kind " << r.kind << ", " << r.puzzles << " puzzles, beam " << r.config.beam
      << (r.config.masked ? ", slot masking on" : ", slot masking off") << "\n";
  out << "cell accuracy    " << percent(r.cell_accuracy()) << "  (" << r.correct_cells << "/" << r.cells << ")\n";
  out << "puzzle accuracy  " << percent(r.puzzle_accuracy()) << "  (" << r.solved << "/" << r.puzzles << ")\n";
  if (r.hinted) {
    out << "hinted accuracy  " << percent(r.hinted->accuracy()) << "  (" << r.hinted->correct << "/" << r.hinted->steps
        << ", skipped " << r.hinted->skipped << ")\n";
  }
  out << "decode errors " << r.decode_errors << ", malformed outputs " << r.malformed_outputs << ", duplicate cells "
      << r.duplicate_cells << ", extraneous cells " << r.extraneous_cells << "\n";

  out << "\n" << (r.kind == "sudoku" ? "difficulty" : "size") << "  puzzles  solved  accuracy\n";
  for (const auto& [label, b] : r.per_difficulty) {
    char line[96];
    std::snprintf(line, sizeof line, "%-10s  %7zu  %6zu  %s\n", label.c_str(), b.puzzles, b.solved,
                  percent(b.accuracy()).c_str());
    out << line;
  }
  if (!r.first_mistake_histogram.empty()) {
    out << "\nfilled  first-mistakes  all-mistakes\n";
    std::map<int, std::pair<std::size_t, std::size_t>> rows;
    for (const auto& [k, v] : r.first_mistake_histogram) rows[k].first = v;
    for (const auto& [k, v] : r.all_mistake_histogram) rows[k].second = v;
    for (const auto& [k, v] : rows) {
      char line[64];
      std::snprintf(line, sizeof line, "%6d  %14zu  %12zu\n", k, v.first, v.second);
      out << line;
    }
  }
  if (r.probe) {
    out << "\nprobe (top-k by logit, ties to the smaller value)\nfilled  puzzles  cells  accuracy\n";
    for (const auto& [n, s] : *r.probe) {
      char line[80];
      std::snprintf(line, sizeof line, "%6d  %7zu  %5zu  %s\n", n, s.puzzles, s.cells, percent(s.accuracy()).c_str());
      out << line;
    }
  }
  return out.str();
}

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// A self-contained SVG bar chart.
inline std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                                 const std::vector<double>& values, const std::string& x_label,
                                 const std::string& y_label, double y_max = 0.0) {
  const double width = 720, height = 400, left = 70, right = 20, top = 40, bottom = 60;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  if (y_max <= 0.0) y_max = values.empty() ? 1.0 : std::max(1e-9, *std::max_element(values.begin(), values.end()));
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title)
    << "</text>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\"" << top + plot_h
    << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
    << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4;
    const double y = top + plot_h - plot_h * t / 4;
    char label[32];
    std::snprintf(label, sizeof label, y_max <= 1.0 ? "%.2f" : "%.0f", v);
    s << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << label << "</text>\n";
    s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n";
  }
  const std::size_t count = values.size();
  const double slot = count ? plot_w / static_cast<double>(count) : plot_w;
  const std::size_t label_every = std::max<std::size_t>(1, count / 20);
  for (std::size_t i = 0; i < count; ++i) {
    const double h = plot_h * std::clamp(values[i] / y_max, 0.0, 1.0);
    const double x = left + slot * static_cast<double>(i);
    s << "<rect x=\"" << x + slot * 0.1 << "\" y=\"" << top + plot_h - h << "\" width=\"" << slot * 0.8
      << "\" height=\"" << h << "\" fill=\"#4a78b5\"/>\n";
    if (i % label_every == 0) {
      s << "<text x=\"" << x + slot / 2 << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
        << xml_escape(labels[i]) << "</text>\n";
    }
  }
  s << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  s << "<text transform=\"translate(16," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(y_label) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

struct Plot {
  std::string file;
  std::string svg;
};

/// Puzzle accuracy per difficulty bucket, and both mistake histograms.
inline std::vector<Plot> render_plots(const EvalReport& r) {
  std::vector<Plot> out;
  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& [label, b] : r.per_difficulty) {
    labels.push_back(label);
    values.push_back(b.accuracy());
  }
  out.push_back({"per_difficulty.svg", svg_bar_chart("Puzzle accuracy by difficulty", labels, values,
                                                     r.kind == "sudoku" ? "difficulty bucket" : "size",
                                                     "puzzle accuracy", 1.0)});
  const auto hist = [&](const std::map<int, std::size_t>& h, const std::string& file, const std::string& title) {
    std::vector<std::string> ls;
    std::vector<double> vs;
    if (!h.empty()) {
      for (int k = h.begin()->first; k <= h.rbegin()->first; ++k) {
        ls.push_back(std::to_string(k));
        const auto it = h.find(k);
        vs.push_back(it == h.end() ? 0.0 : static_cast<double>(it->second));
      }
    }
    out.push_back({file, svg_bar_chart(title, ls, vs, "filled cells", "count")});
  };
  hist(r.first_mistake_histogram, "first_mistakes.svg", "Filled cells at the first mistake");
  hist(r.all_mistake_histogram, "all_mistakes.svg", "Filled cells at every mistake");
  return out;
}

}  // namespace forge::eval
