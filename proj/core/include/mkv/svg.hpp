#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mkv {

struct SvgCurve {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct SvgOptions {
  std::string title;
  std::string x_label = "t";
  std::string y_label = "mean W1";
  double width = 800.0;
  double height = 560.0;
};

// Standalone log-log chart: one polyline per curve, decade ticks, legend.
// Throws RenderError naming the curve on empty, mismatched or nonpositive data.
std::string render_svg_loglog(const std::vector<SvgCurve>& curves, const SvgOptions& options = {});
void emit_svg_loglog(const std::vector<SvgCurve>& curves, const std::filesystem::path& file,
                     const SvgOptions& options = {});

}  // namespace mkv
