#include "condbohm/sampling.hpp"

#include <random>

#include "condbohm/interpolate.hpp"

namespace condbohm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t member_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

std::vector<Point2> sample_ensemble(const ComplexField2D& psi, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::validation, "ensemble size must be at least 1");
  const Grid2D& g = psi.grid();
  const double peak = max_abs(psi);
  if (!(peak > 0.0)) throw Error(ErrorKind::validation, "cannot sample from a zero field");
  const double envelope = 1.3 * peak * peak;
  std::uniform_real_distribution<double> u1(g.axis1.x_min(), g.axis1.x_max());
  std::uniform_real_distribution<double> u2(g.axis2.x_min(), g.axis2.x_max());
  std::uniform_real_distribution<double> uy(0.0, envelope);
  std::vector<Point2> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::mt19937_64 rng(member_seed(seed, k));
    for (;;) {
      const Point2 p{u1(rng), u2(rng)};
      if (!g.contains(p)) continue;
      if (uy(rng) < std::norm(interpolate(psi, p))) {
        out[k] = p;
        break;
      }
    }
  }
  return out;
}

}  // namespace condbohm
