#pragma once

#include <vector>

#include "hcpde/tensor.hpp"

namespace hcpde {

enum class AxisKind { SpaceBounded, SpacePeriodic, Time };

struct Axis {
  dim_t n = 0;
  double extent = 1.0;
  AxisKind kind = AxisKind::SpaceBounded;
};

/// Structured spatiotemporal grid: spatial axes first, time axis last.
/// Bounded and time axes include both endpoints; periodic axes omit the
/// duplicate endpoint.
struct Grid {
  std::vector<Axis> axes;

  int rank() const { return static_cast<int>(axes.size()); }
  dim_t n(int a) const { return axes[static_cast<size_t>(a)].n; }
  double extent(int a) const { return axes[static_cast<size_t>(a)].extent; }
  AxisKind kind(int a) const { return axes[static_cast<size_t>(a)].kind; }
  bool periodic(int a) const { return kind(a) == AxisKind::SpacePeriodic; }
  int time_axis() const { return rank() - 1; }

  double step(int a) const {
    const Axis& ax = axes[static_cast<size_t>(a)];
    return ax.kind == AxisKind::SpacePeriodic ? ax.extent / static_cast<double>(ax.n)
                                              : ax.extent / static_cast<double>(ax.n - 1);
  }
  double coord(int a, dim_t i) const { return static_cast<double>(i) * step(a); }

  Shape shape() const {
    Shape s;
    for (const Axis& ax : axes) s.push_back(ax.n);
    return s;
  }
  dim_t points() const { return shape_numel(shape()); }

  void validate() const;
};

/// Half-open index ranges per grid axis.
struct ExpertDomain {
  std::vector<dim_t> begin, end;

  Shape shape() const {
    Shape s;
    for (size_t i = 0; i < begin.size(); ++i) s.push_back(end[i] - begin[i]);
    return s;
  }
  dim_t points() const { return shape_numel(shape()); }
  bool covers_axis(const Grid& g, int a) const {
    return begin[static_cast<size_t>(a)] == 0 && end[static_cast<size_t>(a)] == g.n(a);
  }
  static ExpertDomain whole(const Grid& g) {
    ExpertDomain d;
    for (const Axis& ax : g.axes) {
      d.begin.push_back(0);
      d.end.push_back(ax.n);
    }
    return d;
  }
  bool operator==(const ExpertDomain&) const = default;
};

// Convenience constructors for the three systems.
Grid make_grid_ds(dim_t nx, dim_t nt, double t_final);
Grid make_grid_ns(dim_t nx, dim_t ny, dim_t nt, double t_final);
Grid make_grid_rd(dim_t nx, dim_t ny, dim_t nt, double t_final);

}  // namespace hcpde
