// Generates the bundled 8x8 digit dataset: glyph templates jittered by
// pixel shifts and uniform noise, written as label,f1..f64 CSV
// rows with features in [0,1]. Deterministic per seed; the committed
// data/ files come from the defaults below.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "zongd/dataset.hpp"
#include "zongd/rng.hpp"

namespace {

using zongd::Rng;
using zongd::Sample;

constexpr int kSide = 8;
constexpr double kGlyphContrast = 0.6;

double g_noise_amp = 0.25;  // uniform per-pixel noise amplitude

const char* const kGlyphs[10][kSide] = {
    {"..####..", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", ".#....#.", "..####.."},
    {"...##...", "..###...", "...##...", "...##...", "...##...", "...##...", "...##...", "..####.."},
    {"..####..", ".#....#.", "......#.", ".....#..", "....#...", "...#....", "..#.....", ".######."},
    {"..####..", ".#....#.", "......#.", "...###..", "......#.", "......#.", ".#....#.", "..####.."},
    {"....##..", "...#.#..", "..#..#..", ".#...#..", ".######.", ".....#..", ".....#..", ".....#.."},
    {".######.", ".#......", ".#......", ".#####..", "......#.", "......#.", ".#....#.", "..####.."},
    {"..####..", ".#......", ".#......", ".#####..", ".#....#.", ".#....#.", ".#....#.", "..####.."},
    {".######.", "......#.", ".....#..", ".....#..", "....#...", "....#...", "...#....", "...#...."},
    {"..####..", ".#....#.", ".#....#.", "..####..", ".#....#.", ".#....#.", ".#....#.", "..####.."},
    {"..####..", ".#....#.", ".#....#.", "..#####.", "......#.", "......#.", "......#.", "..####.."},
};

Sample make_sample(int digit, Rng& rng) {
  const int dx = static_cast<int>(rng.below(3)) - 1;
  const int dy = static_cast<int>(rng.below(3)) - 1;

  Sample sample;
  sample.label = digit;
  sample.x.assign(kSide * kSide, 0.0);
  for (int row = 0; row < kSide; ++row) {
    for (int col = 0; col < kSide; ++col) {
      const int src_row = row - dy;
      const int src_col = col - dx;
      double v = 0.0;
      if (src_row >= 0 && src_row < kSide && src_col >= 0 && src_col < kSide)
        v = kGlyphs[digit][src_row][src_col] == '#' ? kGlyphContrast : 0.0;
      v += g_noise_amp * rng.uniform(-1.0, 1.0);
      v = std::min(1.0, std::max(0.0, v));
      // four decimals keep the CSV compact without leaving [0,1]
      sample.x[row * kSide + col] = std::round(v * 1e4) / 1e4;
    }
  }
  return sample;
}

std::vector<Sample> make_set(int per_class, Rng& rng) {
  std::vector<Sample> samples;
  samples.reserve(10 * per_class);
  for (int i = 0; i < per_class; ++i)
    for (int digit = 0; digit < 10; ++digit) samples.push_back(make_sample(digit, rng));
  return samples;
}

}  // namespace

int main(int argc, char** argv) {
  std::string out_train = "data/digits_train.csv";
  std::string out_test = "data/digits_test.csv";
  int per_class_train = 200;
  int per_class_test = 40;
  uint64_t seed = 7;

  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&]() -> const char* {
      if (i + 1 >= argc) {
        std::fprintf(stderr, "missing value for %s\n", arg.c_str());
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--out-train") out_train = next();
    else if (arg == "--out-test") out_test = next();
    else if (arg == "--per-class-train") per_class_train = std::atoi(next());
    else if (arg == "--per-class-test") per_class_test = std::atoi(next());
    else if (arg == "--seed") seed = std::strtoull(next(), nullptr, 10);
    else if (arg == "--noise") g_noise_amp = std::atof(next());
    else {
      std::fprintf(stderr, "unknown flag %s\n", arg.c_str());
      return 2;
    }
  }

  Rng rng(seed);
  const auto train = make_set(per_class_train, rng);
  const auto test = make_set(per_class_test, rng);
  zongd::save_dataset(train, out_train);
  zongd::save_dataset(test, out_test);
  std::printf("wrote %zu train rows to %s and %zu test rows to %s\n", train.size(),
              out_train.c_str(), test.size(), out_test.c_str());
  return 0;
}
