#include "cidal/swd.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace cidal {

namespace {

// Sort order by value, ties by original index.
std::vector<int> sort_order(const Vector& v) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&v](int a, int b) { return v(a) < v(b) || (v(a) == v(b) && a < b); });
  return idx;
}

void check_operands(const Matrix& x, const Matrix& y, const ProjectionSet& proj) {
  require(x.rows() == y.rows(), "sliced Wasserstein needs equal sample counts (" + std::to_string(x.rows()) +
                                    " vs " + std::to_string(y.rows()) + "); subsample the larger set");
  require(x.rows() >= 1, "sliced Wasserstein of empty sets");
  require_shape(x.cols() == y.cols() && x.cols() == proj.dimension(),
                "point width does not match projection dimension");
  require(proj.count() >= 1, "no projections");
}

SwdValueGrad evaluate(const Matrix& x, const Matrix& y, const ProjectionSet& proj, SwdOptions opts, bool want_grad) {
  check_operands(x, y, proj);
  const Eigen::Index m = x.rows();
  const Matrix px = x * proj.directions.transpose();  // M x L
  const Matrix py = y * proj.directions.transpose();

  SwdValueGrad out;
  // residual(j, l) = <gamma_l, x_j> - <gamma_l, y_match(j,l)>
  Matrix residual;
  if (want_grad) residual.resize(m, proj.count());
  for (int l = 0; l < proj.count(); ++l) {
    const Vector cx = px.col(l);
    const Vector cy = py.col(l);
    const auto sx = sort_order(cx);
    const auto sy = sort_order(cy);
    double s = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double r = cx(sx[static_cast<std::size_t>(i)]) - cy(sy[static_cast<std::size_t>(i)]);
      s += r * r;
      if (want_grad) residual(sx[static_cast<std::size_t>(i)], l) = r;
    }
    out.value += s;
  }
  const double scale = 1.0 / proj.count() / (opts.normalize_by_m ? static_cast<double>(m) : 1.0);
  out.value *= scale;
  if (want_grad) out.grad_x = (2.0 * scale) * residual * proj.directions;
  return out;
}

}  // namespace

ProjectionSet sample_projections(int dimension, int count, std::uint64_t seed) {
  require(dimension >= 1, "projection dimension must be >= 1");
  require(count >= 1, "projection count must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ProjectionSet set{Matrix(count, dimension), seed};
  for (int l = 0; l < count; ++l) {
    double norm = 0.0;
    do {
      for (int c = 0; c < dimension; ++c) set.directions(l, c) = normal(rng);
      norm = set.directions.row(l).norm();
    } while (norm < 1e-12);
    set.directions.row(l) /= norm;
  }
  return set;
}

double wasserstein1d_sq(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "1-D Wasserstein needs equal lengths (" + std::to_string(a.size()) + " vs " +
                                    std::to_string(b.size()) + ")");
  require(!a.empty(), "1-D Wasserstein of empty sets");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += (sa[i] - sb[i]) * (sa[i] - sb[i]);
  return s;
}

double sliced_wasserstein_sq(const Matrix& x, const Matrix& y, const ProjectionSet& proj, SwdOptions opts) {
  return evaluate(x, y, proj, opts, false).value;
}

Matrix sliced_wasserstein_grad_x(const Matrix& x, const Matrix& y, const ProjectionSet& proj, SwdOptions opts) {
  return evaluate(x, y, proj, opts, true).grad_x;
}

SwdValueGrad sliced_wasserstein_value_grad(const Matrix& x, const Matrix& y, const ProjectionSet& proj,
                                           SwdOptions opts) {
  return evaluate(x, y, proj, opts, true);
}

double exact_wasserstein_sq_small(const Matrix& x, const Matrix& y) {
  require(x.rows() == y.rows() && x.rows() >= 1, "exact Wasserstein oracle needs equal nonempty sets");
  require(x.rows() <= kExactWassersteinMaxPoints,
          "exact Wasserstein oracle refuses n > " + std::to_string(kExactWassersteinMaxPoints));
  require_shape(x.cols() == y.cols(), "point widths differ");
  const int n = static_cast<int>(x.rows());
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) cost(i, j) = (x.row(i) - y.row(j)).squaredNorm();

  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < n; ++i) c += cost(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

Matrix subsample_rows(const Matrix& x, int count, std::uint64_t seed) {
  require(count >= 0 && count <= x.rows(), "subsample count exceeds available rows");
  std::vector<int> idx(static_cast<std::size_t>(x.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates.
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(x.rows()) - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(pick(rng))]);
  }
  idx.resize(static_cast<std::size_t>(count));
  return gather_rows(x, idx);
}

}  // namespace cidal
