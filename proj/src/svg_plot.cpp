#include "alviz/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace alviz::svg {
namespace {

constexpr std::array<Rgb, 3> kStrategyColors{{{0xD9, 0x5F, 0x02}, {0x1B, 0x9E, 0x77}, {0x75, 0x70, 0xB3}}};
constexpr Rgb kReferenceColor{0x55, 0x55, 0x55};

Rgb strategy_color(Strategy s) { return kStrategyColors[static_cast<std::size_t>(s)]; }

// Fixed two-decimal coordinates keep the byte stream stable.
std::string num(double v) {
  if (std::abs(v) < 0.005) v = 0.0;
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string label_num(double v) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
  return std::string(buf, res.ptr);
}

Rgb lerp(Rgb a, Rgb b, double t) {
  auto mix = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround(x + t * (static_cast<double>(y) - x)));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

// Sequential ramp for label colouring in the scatter.
Rgb sequential(double t) {
  constexpr Rgb lo{0x44, 0x01, 0x54};
  constexpr Rgb mid{0x21, 0x91, 0x8C};
  constexpr Rgb hi{0xFD, 0xE7, 0x25};
  t = std::clamp(t, 0.0, 1.0);
  return t < 0.5 ? lerp(lo, mid, 2.0 * t) : lerp(mid, hi, 2.0 * t - 1.0);
}

std::string open_svg(double width, double height) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\" font-family=\"sans-serif\" font-size=\"10\">\n"
         "<rect width=\"100%\" height=\"100%\" fill=\"#FFFFFF\"/>\n";
}

std::string text(double x, double y, const std::string& body, const char* anchor = "start") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + body + "</text>\n";
}

struct Frame {
  double left = 50, top = 30, width = 400, height = 240;
  double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

  double x(double v) const { return left + (x_hi > x_lo ? (v - x_lo) / (x_hi - x_lo) : 0.5) * width; }
  double y(double v) const { return top + height - (y_hi > y_lo ? (v - y_lo) / (y_hi - y_lo) : 0.5) * height; }

  std::string axes(const std::string& x_label, const std::string& y_label) const {
    std::string out = "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(width) +
                      "\" height=\"" + num(height) + "\" fill=\"none\" stroke=\"#000000\"/>\n";
    out += text(left, top + height + 14, label_num(x_lo), "middle");
    out += text(left + width, top + height + 14, label_num(x_hi), "middle");
    out += text(left - 4, top + height, label_num(y_lo), "end");
    out += text(left - 4, top + 8, label_num(y_hi), "end");
    out += text(left + width / 2, top + height + 28, x_label, "middle");
    out += text(12, top + height / 2, y_label, "middle");
    return out;
  }
};

}  // namespace

Rgb diverging_color(double value, double range) {
  if (!(range > 0.0) || value == 0.0) return kZero;
  const double t = std::clamp(value / range, -1.0, 1.0);
  return t > 0.0 ? lerp(kZero, kPositive, t) : lerp(kZero, kNegative, -t);
}

std::string hex(Rgb c) {
  constexpr char digits[] = "0123456789ABCDEF";
  std::string out = "#";
  for (const std::uint8_t v : {c.r, c.g, c.b}) {
    out += digits[v >> 4];
    out += digits[v & 0xF];
  }
  return out;
}

double symmetric_range(std::span<const ChangeMatrix> matrices) {
  double range = 0.0;
  for (const auto& m : matrices)
    if (m.values.size() > 0) range = std::max(range, m.values.cwiseAbs().maxCoeff());
  return range;
}

std::string heatmap(const ChangeMatrix& m, double range) {
  constexpr double cell_w = 14, cell_h = 10, left = 56, top = 28;
  const double width = left + cell_w * static_cast<double>(std::max<Index>(m.num_batches(), 1)) + 12;
  const double height = top + cell_h * static_cast<double>(m.values.rows()) + 34;
  std::string out = open_svg(width, height);
  out += text(left, 14, std::string(to_string(m.strategy)) + " " + std::string(to_string(m.kind)) +
                            " (range " + label_num(range) + ")");
  for (Index r = 0; r < m.values.rows(); ++r) {
    const double y = top + cell_h * static_cast<double>(r);
    out += text(left - 4, y + cell_h - 1, std::to_string(m.row_indices[static_cast<std::size_t>(r)]), "end");
    for (Index c = 0; c < m.values.cols(); ++c) {
      out += "<rect class=\"cell\" x=\"" + num(left + cell_w * static_cast<double>(c)) + "\" y=\"" + num(y) +
             "\" width=\"" + num(cell_w) + "\" height=\"" + num(cell_h) + "\" fill=\"" +
             hex(diverging_color(m.values(r, c), range)) + "\"/>\n";
    }
  }
  const double axis_y = top + cell_h * static_cast<double>(m.values.rows()) + 12;
  for (Index c = 0; c < m.values.cols(); ++c) {
    out += text(left + cell_w * (static_cast<double>(c) + 0.5), axis_y, std::to_string(c + 1), "middle");
  }
  out += text(left, axis_y + 14, "query batch");
  out += "</svg>\n";
  return out;
}

std::string mse_curves(const RunArtifact& a) {
  Frame f;
  f.x_hi = static_cast<double>(std::max<Index>(a.num_batches(), 1));
  f.y_lo = a.mse.size() > 0 ? std::min(0.0, a.mse.minCoeff()) : 0.0;
  f.y_hi = a.mse.size() > 0 ? a.mse.maxCoeff() : 1.0;
  std::string out = open_svg(f.left + f.width + 90, f.top + f.height + 40);
  out += text(f.left, 16, "MSE on the test set");
  out += f.axes("query batch", "MSE");
  for (Index s = 0; s < a.num_strategies(); ++s) {
    const auto strategy = a.strategies[static_cast<std::size_t>(s)];
    std::string points;
    for (Index q = 0; q < a.mse.cols(); ++q) {
      if (q) points += ' ';
      points += num(f.x(static_cast<double>(q))) + "," + num(f.y(a.mse(s, q)));
    }
    const auto color = hex(strategy_color(strategy));
    out += "<polyline class=\"mse\" data-strategy=\"" + std::string(to_string(strategy)) + "\" points=\"" + points +
           "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
    const double ly = f.top + 12 + 14 * static_cast<double>(s);
    out += "<rect x=\"" + num(f.left + f.width + 10) + "\" y=\"" + num(ly - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
           color + "\"/>\n";
    out += text(f.left + f.width + 24, ly, std::string(to_string(strategy)));
  }
  out += "</svg>\n";
  return out;
}

std::string pca_scatter(const RunArtifact& a, std::span<const Index> selected) {
  Frame f;
  f.width = 360;
  f.height = 360;
  if (a.n_test() > 0) {
    f.x_lo = a.pc_coords.col(0).minCoeff();
    f.x_hi = a.pc_coords.col(0).maxCoeff();
    f.y_lo = a.pc_coords.col(1).minCoeff();
    f.y_hi = a.pc_coords.col(1).maxCoeff();
  }
  const double lab_lo = a.n_test() > 0 ? a.test_labels.minCoeff() : 0.0;
  const double lab_hi = a.n_test() > 0 ? a.test_labels.maxCoeff() : 1.0;
  std::string out = open_svg(f.left + f.width + 20, f.top + f.height + 40);
  out += text(f.left, 16, "PC1 vs PC2 (" + label_num(100 * a.pc_explained_variance[0]) + "% / " +
                              label_num(100 * a.pc_explained_variance[1]) + "% variance)");
  out += f.axes("PC1", "PC2");
  for (Index i = 0; i < a.n_test(); ++i) {
    const double t = lab_hi > lab_lo ? (a.test_labels(i) - lab_lo) / (lab_hi - lab_lo) : 0.5;
    out += "<circle cx=\"" + num(f.x(a.pc_coords(i, 0))) + "\" cy=\"" + num(f.y(a.pc_coords(i, 1))) +
           "\" r=\"1.5\" fill=\"" + hex(sequential(t)) + "\"/>\n";
  }
  for (const Index i : selected) {
    out += "<circle class=\"selected\" cx=\"" + num(f.x(a.pc_coords(i, 0))) + "\" cy=\"" +
           num(f.y(a.pc_coords(i, 1))) + "\" r=\"3\" fill=\"#FF0000\" stroke=\"#000000\" stroke-width=\"0.5\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

std::string query_histograms(const QueryHistograms& h) {
  Frame f;
  f.x_lo = h.reference.edges.front();
  f.x_hi = h.reference.edges.back();
  auto density = [](const Histogram& hist, std::size_t bin) {
    const Index total = hist.total();
    const double width = hist.edges[bin + 1] - hist.edges[bin];
    return total > 0 ? static_cast<double>(hist.counts[bin]) / (static_cast<double>(total) * width) : 0.0;
  };
  f.y_hi = 0.0;
  auto track = [&](const Histogram& hist) {
    for (std::size_t b = 0; b < hist.counts.size(); ++b) f.y_hi = std::max(f.y_hi, density(hist, b));
  };
  track(h.reference);
  for (const auto& hist : h.per_strategy) track(hist);
  if (!(f.y_hi > 0.0)) f.y_hi = 1.0;

  auto outline = [&](const Histogram& hist, Rgb color, const std::string& name) {
    std::string points = num(f.x(hist.edges.front())) + "," + num(f.y(0.0));
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
      const double y = f.y(density(hist, b));
      points += " " + num(f.x(hist.edges[b])) + "," + num(y) + " " + num(f.x(hist.edges[b + 1])) + "," + num(y);
    }
    points += " " + num(f.x(hist.edges.back())) + "," + num(f.y(0.0));
    return "<polyline class=\"hist\" data-series=\"" + name + "\" points=\"" + points + "\" fill=\"none\" stroke=\"" +
           hex(color) + "\" stroke-width=\"1.2\"/>\n";
  };

  std::string out = open_svg(f.left + f.width + 110, f.top + f.height + 40);
  out += text(f.left, 16, "Label distribution of the first " + std::to_string(h.prefix) + " queries");
  out += f.axes("label", "density");
  out += outline(h.reference, kReferenceColor, "reference");
  for (std::size_t s = 0; s < h.per_strategy.size(); ++s) {
    out += outline(h.per_strategy[s], strategy_color(h.strategies[s]), std::string(to_string(h.strategies[s])));
  }
  const std::string legend_x = num(f.left + f.width + 10);
  for (std::size_t s = 0; s <= h.per_strategy.size(); ++s) {
    const bool ref = s == h.per_strategy.size();
    const double ly = f.top + 12 + 14 * static_cast<double>(s);
    out += "<rect x=\"" + legend_x + "\" y=\"" + num(ly - 8) + "\" width=\"10\" height=\"10\" fill=\"" +
           hex(ref ? kReferenceColor : strategy_color(h.strategies[s])) + "\"/>\n";
    out += text(f.left + f.width + 24, ly, ref ? "reference" : std::string(to_string(h.strategies[s])));
  }
  out += "</svg>\n";
  return out;
}

std::string histogram_csv(const QueryHistograms& h) {
  std::string out = "bin_lo,bin_hi,reference";
  for (const auto s : h.strategies) out += "," + std::string(to_string(s));
  out += '\n';
  for (std::size_t b = 0; b < h.reference.counts.size(); ++b) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, h.reference.edges[b], std::chars_format::general, 17);
    out.append(buf, res.ptr);
    out += ',';
    res = std::to_chars(buf, buf + sizeof buf, h.reference.edges[b + 1], std::chars_format::general, 17);
    out.append(buf, res.ptr);
    out += ',' + std::to_string(h.reference.counts[b]);
    for (const auto& hist : h.per_strategy) out += ',' + std::to_string(hist.counts[b]);
    out += '\n';
  }
  return out;
}

}  // namespace alviz::svg
