#include "lpcg/render_bev.hpp"

#include <fmt/format.h>

#include <array>

namespace lpcg {

std::string render_bev_svg(std::span<const Eigen::Vector3d> rect_points, std::span<const std::vector<Box3D>> box_sets,
                           const BevView& view) {
  static constexpr std::array<const char*, 6> kColours{"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  const double width = (view.x_max - view.x_min) * view.px_per_m;
  const double height = (view.z_max - view.z_min) * view.px_per_m;

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} {1:.0f}\">\n",
      width, height);
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", width, height);

  svg += "<g fill=\"#444444\">\n";
  for (const auto& p : rect_points) {
    if (p.x() < view.x_min || p.x() > view.x_max || p.z() < view.z_min || p.z() > view.z_max) continue;
    svg += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"0.8\"/>\n", view.to_px_x(p.x()), view.to_px_y(p.z()));
  }
  svg += "</g>\n";

  for (std::size_t s = 0; s < box_sets.size(); ++s) {
    svg += fmt::format("<g fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\">\n", kColours[s % kColours.size()]);
    for (const auto& box : box_sets[s]) {
      std::string pts;
      for (const auto& c : box.bev().corners()) {
        if (!pts.empty()) pts += ' ';
        pts += fmt::format("{:.2f},{:.2f}", view.to_px_x(c.x), view.to_px_y(c.z));
      }
      svg += fmt::format("<polygon points=\"{}\"/>\n", pts);
    }
    svg += "</g>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace lpcg
