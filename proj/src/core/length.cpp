#include "core/length.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace segopt {

double dirac(double t, double epsilon) {
  const double a = std::abs(t);
  if (a > epsilon) return 0.0;
  return (1.0 + std::cos(std::numbers::pi * a / epsilon)) / (2.0 * epsilon);
}

double length_continuous(const ScalarField& phi, double epsilon) {
  const int w = phi.width();
  const int h = phi.height();
  double length = 0.0;
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0);
    const int yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const double d = dirac(phi.at(x, y), epsilon);
      if (d == 0.0) continue;
      const int xm = std::max(x - 1, 0);
      const int xp = std::min(x + 1, w - 1);
      const double gx = 0.5 * (phi.at(xp, y) - phi.at(xm, y));
      const double gy = 0.5 * (phi.at(x, yp) - phi.at(x, ym));
      length += d * std::sqrt(gx * gx + gy * gy);
    }
  }
  return length;
}

CroftonStencil crofton_weights(int order) {
  require(order == 4 || order == 8 || order == 16, ErrorCode::Unsupported,
          "crofton stencil order must be 4, 8 or 16");

  // One representative per undirected direction family, sorted by angle.
  std::vector<std::pair<int, int>> reps;
  if (order == 4) {
    reps = {{1, 0}, {0, 1}};
  } else if (order == 8) {
    reps = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  } else {
    reps = {{1, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 1}, {-1, 2}, {-1, 1}, {-2, 1}};
  }

  std::vector<double> angles(reps.size());
  for (std::size_t k = 0; k < reps.size(); ++k) {
    angles[k] = std::atan2(static_cast<double>(reps[k].second),
                           static_cast<double>(reps[k].first));
  }

  // Angular cell around direction k among all 2*order signed directions;
  // neighbors wrap modulo pi because families are undirected.
  CroftonStencil stencil;
  stencil.order = order;
  const int n = static_cast<int>(reps.size());
  for (int k = 0; k < n; ++k) {
    const double prev = (k == 0) ? angles[n - 1] - std::numbers::pi : angles[k - 1];
    const double next = (k == n - 1) ? angles[0] + std::numbers::pi : angles[k + 1];
    const double dtheta = 0.5 * (next - prev);
    const double len = std::hypot(static_cast<double>(reps[k].first),
                                  static_cast<double>(reps[k].second));
    stencil.directions.push_back(
        {reps[k].first, reps[k].second, dtheta / (2.0 * len)});
  }
  return stencil;
}

double crofton_cut_cost(const Labeling& s, const CroftonStencil& stencil) {
  const int w = s.width();
  const int h = s.height();
  double cost = 0.0;
  for (const auto& dir : stencil.directions) {
    const int x0 = std::max(0, -dir.dx);
    const int x1 = std::min(w, w - dir.dx);
    const int y0 = std::max(0, -dir.dy);
    const int y1 = std::min(h, h - dir.dy);
    double cuts = 0.0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        if (s.get(x, y) != s.get(x + dir.dx, y + dir.dy)) cuts += 1.0;
      }
    }
    cost += cuts * dir.weight;
  }
  return cost;
}

}  // namespace segopt
