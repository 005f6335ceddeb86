#include "mkv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mkv/errors.hpp"

namespace mkv {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string decade_label(int e) {
  if (e >= -2 && e <= 4) {
    std::ostringstream s;
    s << std::pow(10.0, e);
    return s.str();
  }
  return "1e" + std::to_string(e);
}

}  // namespace

std::string render_svg_loglog(const std::vector<SvgCurve>& curves, const SvgOptions& opt) {
  if (curves.empty()) throw RenderError("no curves to render");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& c : curves) {
    if (c.x.empty() || c.x.size() != c.y.size())
      throw RenderError("curve '" + c.name + "': empty or mismatched data");
    for (std::size_t i = 0; i < c.x.size(); ++i) {
      if (!(c.x[i] > 0.0) || !(c.y[i] > 0.0) || !std::isfinite(c.x[i]) || !std::isfinite(c.y[i]))
        throw RenderError("curve '" + c.name + "': nonpositive value at index " + std::to_string(i));
      xmin = std::min(xmin, c.x[i]);
      xmax = std::max(xmax, c.x[i]);
      ymin = std::min(ymin, c.y[i]);
      ymax = std::max(ymax, c.y[i]);
    }
  }
  // Whole decades bracket the data.
  const int ex0 = static_cast<int>(std::floor(std::log10(xmin))), ex1 = static_cast<int>(std::ceil(std::log10(xmax)));
  const int ey0 = static_cast<int>(std::floor(std::log10(ymin))), ey1 = static_cast<int>(std::ceil(std::log10(ymax)));
  const double lx0 = ex0, lx1 = std::max(ex1, ex0 + 1), ly0 = ey0, ly1 = std::max(ey1, ey0 + 1);

  const double left = 80, right = 170, top = 50, bottom = 60;
  const double pw = opt.width - left - right, ph = opt.height - top - bottom;
  const auto px = [&](double x) { return left + (std::log10(x) - lx0) / (lx1 - lx0) * pw; };
  const auto py = [&](double y) { return top + (ly1 - std::log10(y)) / (ly1 - ly0) * ph; };

  std::ostringstream s;
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed3(opt.width) << "\" height=\""
    << fixed3(opt.height) << "\" viewBox=\"0 0 " << fixed3(opt.width) << ' ' << fixed3(opt.height) << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << fixed3(opt.width) << "\" height=\"" << fixed3(opt.height)
    << "\" fill=\"white\"/>\n";
  if (!opt.title.empty())
    s << "<text x=\"" << fixed3(left + pw / 2) << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << escape(opt.title) << "</text>\n";

  s << "<g class=\"grid\" stroke=\"#dddddd\" stroke-width=\"1\">\n";
  for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e)
    s << "<line x1=\"" << fixed3(px(std::pow(10.0, e))) << "\" y1=\"" << fixed3(top) << "\" x2=\""
      << fixed3(px(std::pow(10.0, e))) << "\" y2=\"" << fixed3(top + ph) << "\"/>\n";
  for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e)
    s << "<line x1=\"" << fixed3(left) << "\" y1=\"" << fixed3(py(std::pow(10.0, e))) << "\" x2=\""
      << fixed3(left + pw) << "\" y2=\"" << fixed3(py(std::pow(10.0, e))) << "\"/>\n";
  s << "</g>\n";

  s << "<rect x=\"" << fixed3(left) << "\" y=\"" << fixed3(top) << "\" width=\"" << fixed3(pw) << "\" height=\""
    << fixed3(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  s << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int e = static_cast<int>(lx0); e <= static_cast<int>(lx1); ++e)
    s << "<text x=\"" << fixed3(px(std::pow(10.0, e))) << "\" y=\"" << fixed3(top + ph + 18)
      << "\" text-anchor=\"middle\">" << decade_label(e) << "</text>\n";
  for (int e = static_cast<int>(ly0); e <= static_cast<int>(ly1); ++e)
    s << "<text x=\"" << fixed3(left - 8) << "\" y=\"" << fixed3(py(std::pow(10.0, e)) + 4)
      << "\" text-anchor=\"end\">" << decade_label(e) << "</text>\n";
  s << "</g>\n";
  s << "<text x=\"" << fixed3(left + pw / 2) << "\" y=\"" << fixed3(opt.height - 18)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << escape(opt.x_label)
    << "</text>\n";
  s << "<text x=\"20\" y=\"" << fixed3(top + ph / 2) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"14\" transform=\"rotate(-90 20 " << fixed3(top + ph / 2) << ")\">" << escape(opt.y_label)
    << "</text>\n";

  for (std::size_t i = 0; i < curves.size(); ++i) {
    const auto& c = curves[i];
    const char* color = kPalette[i % std::size(kPalette)];
    s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < c.x.size(); ++k) {
      if (k) s << ' ';
      s << fixed3(px(c.x[k])) << ',' << fixed3(py(c.y[k]));
    }
    s << "\"><title>" << escape(c.name) << "</title></polyline>\n";
  }

  s << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t i = 0; i < curves.size(); ++i) {
    const double y = top + 16 + 20 * static_cast<double>(i);
    const double x = left + pw + 16;
    s << "<line x1=\"" << fixed3(x) << "\" y1=\"" << fixed3(y) << "\" x2=\"" << fixed3(x + 24) << "\" y2=\""
      << fixed3(y) << "\" stroke=\"" << kPalette[i % std::size(kPalette)] << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << fixed3(x + 30) << "\" y=\"" << fixed3(y + 4) << "\">" << escape(curves[i].name)
      << "</text>\n";
  }
  s << "</g>\n</svg>\n";
  return s.str();
}

void emit_svg_loglog(const std::vector<SvgCurve>& curves, const std::filesystem::path& file,
                     const SvgOptions& options) {
  const std::string doc = render_svg_loglog(curves, options);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw RenderError("cannot write " + file.string());
  out << doc;
  if (!out) throw RenderError("failed writing " + file.string());
}

}  // namespace mkv
