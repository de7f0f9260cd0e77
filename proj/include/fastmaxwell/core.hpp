#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fastmaxwell {

/// Dense row-major matrix. All coefficient arrays use this layout so that
/// the FFTW line batches and the binary dump format agree on element order.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double pi = std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Error hierarchy. Everything derives from Error so callers can catch once.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix dimensions do not match the layout an operation expects.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A spectral denominator vanished (or came within tolerance of it).
class ResonanceError : public Error {
 public:
  ResonanceError(int row, int col, double value, double scale)
      : Error("resonant mode (" + std::to_string(row) + ", " + std::to_string(col) +
              "): denominator " + std::to_string(value) + " vs scale " + std::to_string(scale)),
        row_(row),
        col_(col) {}
  int row() const { return row_; }
  int col() const { return col_; }

 private:
  int row_;
  int col_;
};

/// A configuration or argument violates an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A user callback produced a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// A dense factorization found the system numerically singular.
class SingularSystemError : public Error {
 public:
  using Error::Error;
};

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline void require_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw SizeError(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                    std::to_string(cols) + ", got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
}

}  // namespace fastmaxwell
