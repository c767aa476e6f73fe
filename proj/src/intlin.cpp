#include "gaplabel/intlin.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace gaplabel {

namespace {

auto floor_div(const Integer &a, const Integer &b) -> Integer {
  Integer q = a / b; // truncates toward zero
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

auto abs_value(const Integer &x) -> Integer { return x < 0 ? Integer(-x) : x; }

} // namespace

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {
  if (rows == 0 || cols == 0)
    throw std::invalid_argument("IntMatrix: dimensions must be positive");
}

IntMatrix::IntMatrix(
    std::initializer_list<std::initializer_list<std::int64_t>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  if (rows_ == 0 || cols_ == 0)
    throw std::invalid_argument("IntMatrix: dimensions must be positive");
  data_.reserve(rows_ * cols_);
  for (const auto &r : rows) {
    if (r.size() != cols_)
      throw std::invalid_argument("IntMatrix: ragged initializer");
    for (auto v : r) data_.emplace_back(v);
  }
}

auto IntMatrix::identity(std::size_t n) -> IntMatrix {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

auto IntMatrix::zero(std::size_t rows, std::size_t cols) -> IntMatrix {
  return IntMatrix(rows, cols);
}

auto IntMatrix::from_rows(const std::vector<std::vector<std::int64_t>> &rows)
    -> IntMatrix {
  if (rows.empty() || rows.front().empty())
    throw std::invalid_argument("IntMatrix: dimensions must be positive");
  IntMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols_)
      throw std::invalid_argument("IntMatrix: ragged rows");
    for (std::size_t c = 0; c < m.cols_; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

auto IntMatrix::transpose() const -> IntMatrix {
  IntMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

auto IntMatrix::row(std::size_t r) const -> IntVector {
  return {data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
          data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_)};
}

auto IntMatrix::is_zero() const -> bool {
  return std::all_of(data_.begin(), data_.end(),
                     [](const Integer &x) { return x == 0; });
}

auto IntMatrix::to_string() const -> std::string {
  std::ostringstream os;
  os << '[';
  for (std::size_t r = 0; r < rows_; ++r) {
    os << (r ? ",[" : "[");
    for (std::size_t c = 0; c < cols_; ++c) os << (c ? "," : "") << (*this)(r, c);
    os << ']';
  }
  os << ']';
  return os.str();
}

void IntMatrix::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t c = 0; c < cols_; ++c) std::swap((*this)(a, c), (*this)(b, c));
}

void IntMatrix::swap_cols(std::size_t a, std::size_t b) {
  if (a == b) return;
  for (std::size_t r = 0; r < rows_; ++r) std::swap((*this)(r, a), (*this)(r, b));
}

void IntMatrix::add_row_multiple(std::size_t dst, std::size_t src,
                                 const Integer &factor) {
  if (factor == 0) return;
  for (std::size_t c = 0; c < cols_; ++c) (*this)(dst, c) += factor * (*this)(src, c);
}

void IntMatrix::add_col_multiple(std::size_t dst, std::size_t src,
                                 const Integer &factor) {
  if (factor == 0) return;
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, dst) += factor * (*this)(r, src);
}

void IntMatrix::negate_row(std::size_t r) {
  for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = -(*this)(r, c);
}

void IntMatrix::negate_col(std::size_t c) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = -(*this)(r, c);
}

auto operator*(const IntMatrix &a, const IntMatrix &b) -> IntMatrix {
  if (a.cols() != b.rows())
    throw std::invalid_argument("IntMatrix product: shape mismatch");
  IntMatrix p(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) p(i, j) += a(i, k) * b(k, j);
    }
  return p;
}

auto operator-(const IntMatrix &a, const IntMatrix &b) -> IntMatrix {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("IntMatrix difference: shape mismatch");
  IntMatrix d(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d(i, j) = a(i, j) - b(i, j);
  return d;
}

auto operator*(const IntMatrix &m, const IntVector &v) -> IntVector {
  if (m.cols() != v.size())
    throw std::invalid_argument("IntMatrix-vector product: shape mismatch");
  IntVector out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

auto determinant(const IntMatrix &m) -> Integer {
  if (!m.is_square()) throw std::invalid_argument("determinant: non-square");
  const std::size_t n = m.rows();
  IntMatrix a = m;
  Integer sign = 1;
  Integer prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (a(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && a(p, k) == 0) ++p;
      if (p == n) return 0;
      a.swap_rows(k, p);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

auto to_int64(const Integer &x) -> std::int64_t {
  if (x > std::numeric_limits<std::int64_t>::max() ||
      x < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("integer does not fit in 64 bits: " + x.str());
  return static_cast<std::int64_t>(x);
}

auto LatticeBasis::as_rows() const -> IntMatrix {
  if (vectors.empty())
    throw std::logic_error("LatticeBasis::as_rows: empty basis");
  IntMatrix m(vectors.size(), dimension);
  for (std::size_t r = 0; r < vectors.size(); ++r)
    for (std::size_t c = 0; c < dimension; ++c) m(r, c) = vectors[r][c];
  return m;
}

auto LatticeBasis::contains(const IntVector &v) const -> bool {
  if (v.size() != dimension)
    throw std::invalid_argument("LatticeBasis::contains: dimension mismatch");
  const bool is_zero =
      std::all_of(v.begin(), v.end(), [](const Integer &x) { return x == 0; });
  if (vectors.empty()) return is_zero;
  // v lies in the lattice iff appending it does not change the HNF.
  const auto base = hermite_normal_form(as_rows()).H;
  IntMatrix ext(vectors.size() + 1, dimension);
  for (std::size_t r = 0; r < vectors.size(); ++r)
    for (std::size_t c = 0; c < dimension; ++c) ext(r, c) = vectors[r][c];
  for (std::size_t c = 0; c < dimension; ++c) ext(vectors.size(), c) = v[c];
  const auto grown = hermite_normal_form(ext).H;
  for (std::size_t r = 0; r < base.rows(); ++r)
    for (std::size_t c = 0; c < dimension; ++c)
      if (grown(r, c) != base(r, c)) return false;
  for (std::size_t c = 0; c < dimension; ++c)
    if (grown(base.rows(), c) != 0) return false;
  return true;
}

auto hermite_normal_form(const IntMatrix &m) -> HermiteForm {
  IntMatrix h = m;
  IntMatrix u = IntMatrix::identity(m.rows());
  const std::size_t rows = m.rows();
  std::size_t r = 0;
  for (std::size_t c = 0; c < m.cols() && r < rows; ++c) {
    bool has_pivot = false;
    for (;;) {
      // smallest nonzero magnitude in column c at or below row r
      std::optional<std::size_t> best;
      for (std::size_t i = r; i < rows; ++i)
        if (h(i, c) != 0 &&
            (!best || abs_value(h(i, c)) < abs_value(h(*best, c))))
          best = i;
      if (!best) break;
      has_pivot = true;
      h.swap_rows(r, *best);
      u.swap_rows(r, *best);
      bool cleared = true;
      for (std::size_t i = r + 1; i < rows; ++i) {
        if (h(i, c) == 0) continue;
        const Integer q = floor_div(h(i, c), h(r, c));
        h.add_row_multiple(i, r, -q);
        u.add_row_multiple(i, r, -q);
        if (h(i, c) != 0) cleared = false;
      }
      if (cleared) break;
    }
    if (!has_pivot) continue;
    if (h(r, c) < 0) {
      h.negate_row(r);
      u.negate_row(r);
    }
    for (std::size_t i = 0; i < r; ++i) {
      const Integer q = floor_div(h(i, c), h(r, c));
      h.add_row_multiple(i, r, -q);
      u.add_row_multiple(i, r, -q);
    }
    ++r;
  }
  return {std::move(h), std::move(u)};
}

auto smith_normal_form(const IntMatrix &m) -> SmithForm {
  IntMatrix d = m;
  IntMatrix u = IntMatrix::identity(m.rows());
  IntMatrix v = IntMatrix::identity(m.cols());
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  for (std::size_t t = 0; t < std::min(rows, cols); ++t) {
    for (;;) {
      std::optional<std::pair<std::size_t, std::size_t>> best;
      for (std::size_t i = t; i < rows; ++i)
        for (std::size_t j = t; j < cols; ++j)
          if (d(i, j) != 0 &&
              (!best || abs_value(d(i, j)) < abs_value(d(best->first, best->second))))
            best = std::pair{i, j};
      if (!best) return {std::move(u), std::move(d), std::move(v)};

      d.swap_rows(t, best->first);
      u.swap_rows(t, best->first);
      d.swap_cols(t, best->second);
      v.swap_cols(t, best->second);

      bool clean = true;
      for (std::size_t i = t + 1; i < rows; ++i) {
        if (d(i, t) == 0) continue;
        const Integer q = floor_div(d(i, t), d(t, t));
        d.add_row_multiple(i, t, -q);
        u.add_row_multiple(i, t, -q);
        if (d(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < cols; ++j) {
        if (d(t, j) == 0) continue;
        const Integer q = floor_div(d(t, j), d(t, t));
        d.add_col_multiple(j, t, -q);
        v.add_col_multiple(j, t, -q);
        if (d(t, j) != 0) clean = false;
      }
      if (!clean) continue;

      // d_t must divide every remaining entry; otherwise fold an offending
      // row into row t and reduce again.
      std::optional<std::size_t> offending;
      for (std::size_t i = t + 1; i < rows && !offending; ++i)
        for (std::size_t j = t + 1; j < cols; ++j)
          if (d(i, j) % d(t, t) != 0) {
            offending = i;
            break;
          }
      if (!offending) break;
      d.add_row_multiple(t, *offending, 1);
      u.add_row_multiple(t, *offending, 1);
    }
    if (d(t, t) < 0) {
      d.negate_row(t);
      u.negate_row(t);
    }
  }
  return {std::move(u), std::move(d), std::move(v)};
}

auto invariant_factors(const IntMatrix &m) -> IntVector {
  const auto snf = smith_normal_form(m);
  IntVector out;
  for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i)
    out.push_back(snf.D(i, i));
  return out;
}

auto integer_kernel(const IntMatrix &m) -> LatticeBasis {
  LatticeBasis basis{m.cols(), {}};
  // U * M^T = H: rows of U that map to zero rows of H span ker M.
  const auto hnf = hermite_normal_form(m.transpose());
  std::vector<IntVector> raw;
  for (std::size_t r = 0; r < hnf.H.rows(); ++r) {
    const auto h_row = hnf.H.row(r);
    if (std::all_of(h_row.begin(), h_row.end(),
                    [](const Integer &x) { return x == 0; }))
      raw.push_back(hnf.U.row(r));
  }
  if (raw.empty()) return basis;

  IntMatrix k(raw.size(), m.cols());
  for (std::size_t r = 0; r < raw.size(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) k(r, c) = raw[r][c];
  const auto reduced = hermite_normal_form(k).H;
  for (std::size_t r = 0; r < reduced.rows(); ++r) {
    auto row = reduced.row(r);
    if (std::any_of(row.begin(), row.end(), [](const Integer &x) { return x != 0; }))
      basis.vectors.push_back(std::move(row));
  }
  return basis;
}

auto unimodular_inverse(const IntMatrix &m) -> IntMatrix {
  if (!m.is_square())
    throw std::invalid_argument("unimodular_inverse: non-square matrix");
  auto hnf = hermite_normal_form(m);
  if (hnf.H != IntMatrix::identity(m.rows()))
    throw std::invalid_argument("unimodular_inverse: matrix is not unimodular: " +
                                m.to_string());
  return std::move(hnf.U);
}

} // namespace gaplabel
