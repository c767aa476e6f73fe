#pragma once

// Exact integer linear algebra: Hermite and Smith normal forms and integer
// kernels. Entries are unbounded integers, so no operation can overflow.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace gaplabel {

using Integer = boost::multiprecision::cpp_int;
using IntVector = std::vector<Integer>;

class IntMatrix {
public:
  IntMatrix(std::size_t rows, std::size_t cols);
  IntMatrix(std::initializer_list<std::initializer_list<std::int64_t>> rows);

  static auto identity(std::size_t n) -> IntMatrix;
  static auto zero(std::size_t rows, std::size_t cols) -> IntMatrix;
  static auto from_rows(const std::vector<std::vector<std::int64_t>> &rows)
      -> IntMatrix;

  [[nodiscard]] auto rows() const -> std::size_t { return rows_; }
  [[nodiscard]] auto cols() const -> std::size_t { return cols_; }

  auto operator()(std::size_t r, std::size_t c) -> Integer & {
    return data_[r * cols_ + c];
  }
  auto operator()(std::size_t r, std::size_t c) const -> const Integer & {
    return data_[r * cols_ + c];
  }

  [[nodiscard]] auto transpose() const -> IntMatrix;
  [[nodiscard]] auto row(std::size_t r) const -> IntVector;
  [[nodiscard]] auto is_zero() const -> bool;
  [[nodiscard]] auto is_square() const -> bool { return rows_ == cols_; }
  [[nodiscard]] auto to_string() const -> std::string;

  void swap_rows(std::size_t a, std::size_t b);
  void swap_cols(std::size_t a, std::size_t b);
  // row[dst] += factor * row[src]
  void add_row_multiple(std::size_t dst, std::size_t src, const Integer &factor);
  void add_col_multiple(std::size_t dst, std::size_t src, const Integer &factor);
  void negate_row(std::size_t r);
  void negate_col(std::size_t c);

  friend auto operator==(const IntMatrix &, const IntMatrix &) -> bool = default;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Integer> data_;
};

auto operator*(const IntMatrix &a, const IntMatrix &b) -> IntMatrix;
auto operator-(const IntMatrix &a, const IntMatrix &b) -> IntMatrix;
auto operator*(const IntMatrix &m, const IntVector &v) -> IntVector;

/// Exact determinant by fraction-free (Bareiss) elimination.
auto determinant(const IntMatrix &m) -> Integer;

/// Narrow an exact integer; throws std::overflow_error when it does not fit.
auto to_int64(const Integer &x) -> std::int64_t;

/// Basis of an integer lattice in Z^dimension.
struct LatticeBasis {
  std::size_t dimension = 0;
  std::vector<IntVector> vectors;

  [[nodiscard]] auto rank() const -> std::size_t { return vectors.size(); }
  [[nodiscard]] auto empty() const -> bool { return vectors.empty(); }
  /// Basis vectors as the rows of a matrix (rank x dimension).
  [[nodiscard]] auto as_rows() const -> IntMatrix;
  /// Exact test that v is an integer combination of the basis vectors.
  [[nodiscard]] auto contains(const IntVector &v) const -> bool;
};

struct HermiteForm {
  IntMatrix H; // row-style Hermite normal form of the input
  IntMatrix U; // unimodular, U * M = H
};

struct SmithForm {
  IntMatrix U; // unimodular, U * M * V = D
  IntMatrix D; // diagonal, d_1 | d_2 | ... , all >= 0
  IntMatrix V; // unimodular
};

/// Row-style HNF. Pivots are positive; entries above a pivot lie in [0, pivot).
auto hermite_normal_form(const IntMatrix &m) -> HermiteForm;

auto smith_normal_form(const IntMatrix &m) -> SmithForm;

/// Invariant factors d_1 | d_2 | ... read off the Smith form diagonal.
auto invariant_factors(const IntMatrix &m) -> IntVector;

/// Basis of { v in Z^cols : M v = 0 }, HNF-reduced so the output is canonical.
auto integer_kernel(const IntMatrix &m) -> LatticeBasis;

/// Inverse of a unimodular square matrix; throws std::invalid_argument otherwise.
auto unimodular_inverse(const IntMatrix &m) -> IntMatrix;

} // namespace gaplabel
