// Copyright 2026 The qmemtest Authors
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

#include "qmemtest/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "qmemtest/error.hpp"

namespace qmemtest {

MapFormat parse_map_format(const std::string& name) {
  if (name == "text") return MapFormat::Text;
  if (name == "csv") return MapFormat::Csv;
  if (name == "svg") return MapFormat::Svg;
  throw DataError("unknown map format '" + name + "' (text|csv|svg)");
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Diverging blue-white-red scale, clipped at +-limit.
std::string diverging_color(double value, double limit) {
  const double t = std::clamp(value / limit, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (t > 0) {
    g = b = static_cast<int>(std::lround(255.0 * (1.0 - t)));
  } else if (t < 0) {
    r = g = static_cast<int>(std::lround(255.0 * (1.0 + t)));
  }
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

std::string emit_svg(const FailureMap& map, const ChipTopology& topo,
                     const RenderOptions& options) {
  if (topo.coords().size() != topo.num_qubits()) {
    throw DataError("emit_failure_map: coordinates missing for svg output");
  }
  double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
  for (const auto& c : topo.coords()) {
    min_x = std::min(min_x, c[0]);
    max_x = std::max(max_x, c[0]);
    min_y = std::min(min_y, c[1]);
    max_y = std::max(max_y, c[1]);
  }
  const double span_x = std::max(max_x - min_x, 1.0);
  const double span_y = std::max(max_y - min_y, 1.0);
  const double scale = 90.0;
  const double margin = 60.0;
  const double width = span_x * scale + 2 * margin;
  const double height = span_y * scale + 2 * margin + 30.0;

  auto px = [&](QubitId q) {
    return margin + (topo.coords()[q][0] - min_x) * scale;
  };
  auto py = [&](QubitId q) {
    return margin + (topo.coords()[q][1] - min_y) * scale;
  };

  const std::set<QubitId> flagged(map.flags.begin(), map.flags.end());

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width)
      << "\" height=\"" << fmt(height) << "\" viewBox=\"0 0 " << fmt(width)
      << ' ' << fmt(height) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fmt(margin) << "\" y=\"24\" font-family=\"sans-serif\""
      << " font-size=\"14\">delta F at tau = " << fmt(map.tau_us)
      << " us (threshold " << fmt(map.threshold) << ", scale +-"
      << fmt(options.color_limit) << ")</text>\n";
  for (auto [i, j] : topo.edges()) {
    svg << "<line x1=\"" << fmt(px(i)) << "\" y1=\"" << fmt(py(i)) << "\" x2=\""
        << fmt(px(j)) << "\" y2=\"" << fmt(py(j))
        << "\" stroke=\"#999999\" stroke-width=\"3\"/>\n";
  }
  for (QubitId q = 0; q < topo.num_qubits(); ++q) {
    const double df = q < map.delta_f.size() ? map.delta_f[q] : 0.0;
    const bool is_flagged = flagged.count(q) > 0;
    svg << "<circle cx=\"" << fmt(px(q)) << "\" cy=\"" << fmt(py(q))
        << "\" r=\"16\" fill=\"" << diverging_color(df, options.color_limit)
        << "\" stroke=\"" << (is_flagged ? "#cc0000" : "#333333")
        << "\" stroke-width=\"" << (is_flagged ? 4 : 1.5) << "\"/>\n";
    svg << "<text x=\"" << fmt(px(q)) << "\" y=\"" << fmt(py(q) + 4)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"11\">" << q << "</text>\n";
    svg << "<text x=\"" << fmt(px(q)) << "\" y=\"" << fmt(py(q) + 30)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\""
        << " font-size=\"9\" fill=\"#555555\">" << fmt(df) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::string emit_failure_map(const FailureMap& map, const ChipTopology& topo,
                             MapFormat format, const RenderOptions& options) {
  if (format == MapFormat::Svg) return emit_svg(map, topo, options);

  const std::set<QubitId> flagged(map.flags.begin(), map.flags.end());
  const std::set<QubitId> spectators(map.spectators.begin(),
                                     map.spectators.end());
  std::ostringstream out;
  if (format == MapFormat::Csv) {
    out << "qubit,delta_f,flagged,spectator\n";
    for (QubitId q = 0; q < topo.num_qubits(); ++q) {
      const double df = q < map.delta_f.size() ? map.delta_f[q] : 0.0;
      out << q << ',' << fmt(df) << ',' << (flagged.count(q) ? 1 : 0) << ','
          << (spectators.count(q) ? 1 : 0) << "\n";
    }
  } else {
    out << "# delta F at tau = " << fmt(map.tau_us) << " us, threshold "
        << fmt(map.threshold) << "\n";
    for (QubitId q = 0; q < topo.num_qubits(); ++q) {
      const double df = q < map.delta_f.size() ? map.delta_f[q] : 0.0;
      out << "qubit " << q << "  dF = " << fmt(df);
      if (spectators.count(q)) out << "  [spectator]";
      if (flagged.count(q)) out << "  [FLAG]";
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace qmemtest
