#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

#include "aist/error.hpp"
#include "aist/pipeline.hpp"

namespace aist {

namespace {

std::string colour(int index, int count) {
  // Evenly spaced hues, fixed saturation and lightness.
  const double hue = 360.0 * index / std::max(count, 1);
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,65%%,55%%)", hue);
  return buf;
}

}  // namespace

RegionPlot render_regions(const LtiPetcSystem& sys, int ell, int resolution, const MulticlassModel* model) {
  if (sys.state_dim() != 2) throw UnsupportedConfiguration("regions: only planar systems can be plotted");
  if (ell < 1) throw DomainError("regions: ell must be at least 1");
  if (resolution < 2) throw DomainError("regions: resolution must be at least 2");
  if (model && model->state_dim != 2) throw ShapeError("regions: model state dimension is not 2");

  const auto cones = trigger_cones(sys);
  const auto res = static_cast<std::size_t>(resolution);
  const double step = 2.0 / resolution;
  auto coord = [&](std::size_t i) { return -1.0 + (static_cast<double>(i) + 0.5) * step; };

  // Cell (i, j) has x = coord(i), y = coord(j); −p is cell (res−1−i, res−1−j).
  std::vector<Vector> points;
  std::vector<std::size_t> cell_of;
  for (std::size_t j = 0; j < res; ++j)
    for (std::size_t i = 0; i < res; ++i) {
      const double x = coord(i), y = coord(j);
      if (x * x + y * y > 1.0) continue;
      Vector p(2);
      p << x, y;
      points.push_back(p);
      cell_of.push_back(j * res + i);
    }

  const auto seqs = ist_sequences_batch(cones, to_soa(points), points.size(), ell);
  std::map<Label, int> ids;
  for (const auto& s : seqs) ids.emplace(s, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;

  std::vector<int> grid(res * res, -1), predicted(res * res, -1);
  for (std::size_t k = 0; k < points.size(); ++k) grid[cell_of[k]] = ids.at(seqs[k]);
  if (model) {
    const auto pred = predict_batch(*model, to_soa(points), points.size());
    for (std::size_t k = 0; k < points.size(); ++k) predicted[cell_of[k]] = pred[k];
  }

  RegionPlot plot;
  plot.points = points.size();
  plot.region_count = static_cast<int>(ids.size());
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const std::size_t i = c % res, j = c / res;
    const std::size_t mirror = (res - 1 - j) * res + (res - 1 - i);
    if (grid[c] != grid[mirror]) plot.symmetric = false;
  }

  constexpr double kSize = 600.0;
  const double cell = kSize / resolution;
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize + 24.0 * static_cast<double>(ids.size())
     << "\" viewBox=\"0 0 " << kSize << ' ' << kSize + 24.0 * static_cast<double>(ids.size()) << "\">\n";
  os << "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (grid[c] < 0) continue;
    const std::size_t i = c % res, j = c / res;
    // SVG y grows downwards.
    os << "<rect x=\"" << static_cast<double>(i) * cell << "\" y=\"" << static_cast<double>(res - 1 - j) * cell
       << "\" width=\"" << cell << "\" height=\"" << cell << "\" fill=\"" << colour(grid[c], plot.region_count)
       << "\"/>\n";
  }
  os << "</g>\n";
  if (model) {
    os << "<g stroke=\"black\" stroke-width=\"1\">\n";
    for (std::size_t c = 0; c < grid.size(); ++c) {
      if (predicted[c] < 0) continue;
      const std::size_t i = c % res, j = c / res;
      const double x0 = static_cast<double>(i) * cell, y0 = static_cast<double>(res - 1 - j) * cell;
      if (i + 1 < res && predicted[c + 1] >= 0 && predicted[c + 1] != predicted[c])
        os << "<line x1=\"" << x0 + cell << "\" y1=\"" << y0 << "\" x2=\"" << x0 + cell << "\" y2=\"" << y0 + cell << "\"/>\n";
      if (j + 1 < res && predicted[c + res] >= 0 && predicted[c + res] != predicted[c])
        os << "<line x1=\"" << x0 << "\" y1=\"" << y0 << "\" x2=\"" << x0 + cell << "\" y2=\"" << y0 << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "<g font-family=\"monospace\" font-size=\"14\">\n";
  double y = kSize + 4.0;
  for (const auto& [label, id] : ids) {
    os << "<rect x=\"4\" y=\"" << y << "\" width=\"16\" height=\"16\" fill=\"" << colour(id, plot.region_count) << "\"/>";
    os << "<text x=\"26\" y=\"" << y + 13.0 << "\">" << label_to_string(label) << "</text>\n";
    y += 24.0;
  }
  os << "</g>\n</svg>\n";
  plot.svg = os.str();
  return plot;
}

}  // namespace aist
