// Library usage: transfer the colors of a reference image to a DEM and save
// the balanced (midpoint) render plus a few alternatives along the front.
//
//   sample_transfer <image> <dem> [out_dir]

#include <filesystem>
#include <iostream>

#include "hypso/hypso.hpp"

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: " << argv[0] << " <image> <dem> [out_dir]\n";
    return 2;
  }
  const std::filesystem::path out = argc > 3 ? argv[3] : ".";
  std::filesystem::create_directories(out);

  hypso::TransferConfig cfg;
  cfg.zones = 7;
  cfg.scoring.k = 3;
  cfg.conventions.assignments[1] = {60.0, -40.0, 30.0};  // green lowland

  try {
    const auto result = hypso::run_transfer(hypso::image_from_file(argv[1]), hypso::DemInput::from_file(argv[2]), cfg);
    const auto picks = hypso::sample_front(result.archive, 3);
    for (std::size_t i = 0; i < picks.size(); ++i) {
      const auto path = out / ("front_" + std::to_string(i) + ".png");
      hypso::write_png(hypso::render_scheme(result.dem, result.zones, picks[i].scheme, cfg), path);
      std::cout << path.string() << "  F_s=" << picks[i].F_s << "  F_a=" << picks[i].F_a << '\n';
    }
    hypso::write_png(hypso::render_scheme(result.dem, result.zones, result.midpoint.scheme, cfg), out / "midpoint.png");
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return 0;
}
