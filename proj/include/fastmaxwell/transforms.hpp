#pragma once

// Real trigonometric transforms on matrix lines.
//
// The six kinds are realized by the unnormalized matrices
//   DST1 -> S      (n-1)x(n-1),  S(k,j)  = sin(k j pi / n),            k,j = 1..n-1
//   DCT2 -> C^T    n x n,        C(k,j)  = nu_j cos((2k-1) j pi / 2n), k = 1..n, j = 0..n-1
//   DCT3 -> C
//   DST2 -> Sb^T   n x n,        Sb(k,j) = nu_j sin((2k-1) j pi / 2n), k = 1..n, j = 1..n
//   DST3 -> Sb
//   DCT1 -> Cb     (n+1)x(n+1),  Cb(k,j) = nu_k nu_j cos(k j pi / n),  k,j = 0..n
// with nu_0 = nu_n = 1/sqrt(2) and nu_j = 1 otherwise. Inverses carry 2/n:
//   S^-1 = (2/n) S, C^-1 = (2/n) C^T, Sb^-1 = (2/n) Sb^T, Cb^-1 = (2/n) Cb.

#include "fastmaxwell/core.hpp"

#include <fftw3.h>

#include <array>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string_view>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fastmaxwell {

enum class TransformKind { DST1, DST2, DST3, DCT1, DCT2, DCT3 };

/// Cols: every column is transformed, X <- T X.
/// Rows: every row is transformed,    X <- X T^T.
enum class Axis { Rows, Cols };

enum class Backend { Fast, Naive };

inline constexpr std::array<TransformKind, 6> all_transform_kinds = {
    TransformKind::DST1, TransformKind::DST2, TransformKind::DST3,
    TransformKind::DCT1, TransformKind::DCT2, TransformKind::DCT3};

inline std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::DST1: return "DST1";
    case TransformKind::DST2: return "DST2";
    case TransformKind::DST3: return "DST3";
    case TransformKind::DCT1: return "DCT1";
    case TransformKind::DCT2: return "DCT2";
    case TransformKind::DCT3: return "DCT3";
  }
  return "?";
}

/// Vector length a transform of partition size n acts on.
inline int transform_length(TransformKind kind, int n) {
  switch (kind) {
    case TransformKind::DST1: return n - 1;
    case TransformKind::DCT1: return n + 1;
    default: return n;
  }
}

/// Kind whose matrix, scaled by 2/n, inverts the given one.
inline TransformKind inverse_kind(TransformKind kind) {
  switch (kind) {
    case TransformKind::DST1: return TransformKind::DST1;
    case TransformKind::DCT1: return TransformKind::DCT1;
    case TransformKind::DST2: return TransformKind::DST3;
    case TransformKind::DST3: return TransformKind::DST2;
    case TransformKind::DCT2: return TransformKind::DCT3;
    case TransformKind::DCT3: return TransformKind::DCT2;
  }
  return kind;
}

struct ScaleFactors {
  std::vector<double> nu;  // indices 0..n
};

inline ScaleFactors scale_factors(int n) {
  if (n < 1) throw SizeError("scale_factors: n must be positive");
  ScaleFactors s;
  s.nu.assign(static_cast<std::size_t>(n) + 1, 1.0);
  s.nu.front() = std::sqrt(0.5);
  s.nu.back() = std::sqrt(0.5);
  return s;
}

inline void require_partition(int n, const char* what) {
  if (n < 2) throw SizeError(std::string(what) + ": unsupported partition size " + std::to_string(n));
}

/// Dense transform matrix, straight from the closed-form entries.
inline Matrix transform_matrix(TransformKind kind, int n) {
  require_partition(n, "transform_matrix");
  const auto nu = scale_factors(n).nu;
  const double dn = n;
  const int m = transform_length(kind, n);
  Matrix t(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      switch (kind) {
        case TransformKind::DST1:
          t(r, c) = std::sin((r + 1) * (c + 1) * pi / dn);
          break;
        case TransformKind::DCT3:  // C(k, j), k = r + 1, j = c
          t(r, c) = nu[c] * std::cos((2 * r + 1) * c * pi / (2 * dn));
          break;
        case TransformKind::DCT2:  // C^T
          t(r, c) = nu[r] * std::cos((2 * c + 1) * r * pi / (2 * dn));
          break;
        case TransformKind::DST3:  // Sb(k, j), k = r + 1, j = c + 1
          t(r, c) = nu[c + 1] * std::sin((2 * r + 1) * (c + 1) * pi / (2 * dn));
          break;
        case TransformKind::DST2:  // Sb^T
          t(r, c) = nu[r + 1] * std::sin((2 * c + 1) * (r + 1) * pi / (2 * dn));
          break;
        case TransformKind::DCT1:
          t(r, c) = nu[r] * nu[c] * std::cos(static_cast<double>(r) * c * pi / dn);
          break;
      }
    }
  }
  return t;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(double* p) const { fftw_free(p); }
};
using FftwBuffer = std::unique_ptr<double[], FftwFree>;

inline FftwBuffer fftw_buffer(std::size_t count) {
  auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * (count == 0 ? 1 : count)));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer(p);
}

// Thread-local line batch scratch; grows, never shrinks.
struct LineScratch {
  FftwBuffer data;
  std::size_t capacity = 0;
  double* get(std::size_t count) {
    if (count > capacity) {
      data = fftw_buffer(count);
      capacity = count;
    }
    return data.get();
  }
};

inline LineScratch& thread_scratch() {
  thread_local LineScratch scratch;
  return scratch;
}

class FftwPlan {
 public:
  FftwPlan(fftw_r2r_kind kind, int len, int howmany, int dist) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    auto tmp = fftw_buffer(static_cast<std::size_t>(howmany) * dist);
    int dims[1] = {len};
    fftw_r2r_kind kinds[1] = {kind};
    plan_ = fftw_plan_many_r2r(1, dims, howmany, tmp.get(), nullptr, 1, dist, tmp.get(), nullptr,
                               1, dist, kinds, FFTW_ESTIMATE);
    if (plan_ == nullptr) throw Error("FFTW failed to create a plan");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  // New-array execute; thread-safe in FFTW.
  void execute(double* data) const { fftw_execute_r2r(plan_, data, data); }

 private:
  fftw_plan plan_ = nullptr;
};

}  // namespace detail

/// Immutable description of one transform applied along one matrix axis.
/// Copies share the underlying FFTW plans; apply() may run concurrently on
/// distinct matrices.
class TransformPlan {
 public:
  static constexpr int block_lines = 16;

  TransformPlan(TransformKind kind, int n, Axis axis, Backend backend = Backend::Fast)
      : kind_(kind), n_(n), axis_(axis), backend_(backend) {
    require_partition(n, "TransformPlan");
    len_ = transform_length(kind, n);
    dist_ = len_ + (len_ % 2);
    if (backend_ == Backend::Naive) {
      dense_ = std::make_shared<const Matrix>(transform_matrix(kind, n));
      return;
    }
    build_scaling();
    fftw_r2r_kind fk = FFTW_RODFT00;
    switch (kind) {
      case TransformKind::DST1: fk = FFTW_RODFT00; break;
      case TransformKind::DST2: fk = FFTW_RODFT10; break;
      case TransformKind::DST3: fk = FFTW_RODFT01; break;
      case TransformKind::DCT1: fk = FFTW_REDFT00; break;
      case TransformKind::DCT2: fk = FFTW_REDFT10; break;
      case TransformKind::DCT3: fk = FFTW_REDFT01; break;
    }
    block_plan_ = std::make_shared<const detail::FftwPlan>(fk, len_, block_lines, dist_);
    single_plan_ = std::make_shared<const detail::FftwPlan>(fk, len_, 1, dist_);
  }

  TransformKind kind() const { return kind_; }
  int n() const { return n_; }
  int length() const { return len_; }
  Axis axis() const { return axis_; }
  Backend backend() const { return backend_; }

  void apply(Matrix& x) const {
    const Eigen::Index along = axis_ == Axis::Cols ? x.rows() : x.cols();
    if (along != len_) {
      throw SizeError("TransformPlan::apply(" + std::string(to_string(kind_)) + ", n=" +
                      std::to_string(n_) + "): line length " + std::to_string(along) +
                      ", expected " + std::to_string(len_));
    }
    if (x.size() == 0) return;
    if (backend_ == Backend::Naive) {
      if (axis_ == Axis::Cols) {
        x = (*dense_) * x;
      } else {
        x = x * dense_->transpose();
      }
      return;
    }
    apply_fast(x);
  }

  Matrix apply(const Matrix& x) const {
    Matrix y = x;
    apply(y);
    return y;
  }

 private:
  // FFTW's unnormalized r2r kinds differ from the matrices above by a factor
  // 2 and by the nu weights on the first/last entries; both are folded into
  // per-index pre/post scaling applied while gathering/scattering lines.
  void build_scaling() {
    const auto nu = scale_factors(n_).nu;
    const double r2 = std::sqrt(2.0);
    pre_.assign(len_, 1.0);
    post_.assign(len_, 0.5);
    switch (kind_) {
      case TransformKind::DST1:
        break;
      case TransformKind::DCT2:
        for (int j = 0; j < len_; ++j) post_[j] = 0.5 * nu[j];
        break;
      case TransformKind::DCT3:
        pre_[0] = r2;
        break;
      case TransformKind::DST2:
        for (int j = 0; j < len_; ++j) post_[j] = 0.5 * nu[j + 1];
        break;
      case TransformKind::DST3:
        pre_[len_ - 1] = r2;
        break;
      case TransformKind::DCT1:
        pre_.front() = r2;
        pre_.back() = r2;
        for (int j = 0; j < len_; ++j) post_[j] = 0.5 * nu[j];
        break;
    }
  }

  // Lines are processed in blocks of block_lines through an aligned
  // scratch buffer so column transforms of row-major data stay cache friendly.
  void apply_fast(Matrix& x) const {
    const bool cols = axis_ == Axis::Cols;
    const Eigen::Index lines = cols ? x.cols() : x.rows();
    const Eigen::Index nblocks = (lines + block_lines - 1) / block_lines;
    double* base = x.data();
    const Eigen::Index stride = x.cols();
#pragma omp parallel for schedule(static)
    for (Eigen::Index blk = 0; blk < nblocks; ++blk) {
      const Eigen::Index first = blk * block_lines;
      const int count = static_cast<int>(std::min<Eigen::Index>(block_lines, lines - first));
      double* buf = detail::thread_scratch().get(static_cast<std::size_t>(block_lines) * dist_);
      if (cols) {
        for (int k = 0; k < len_; ++k) {
          const double* row = base + k * stride + first;
          const double s = pre_[k];
          for (int b = 0; b < count; ++b) buf[b * dist_ + k] = s * row[b];
        }
      } else {
        for (int b = 0; b < count; ++b) {
          const double* row = base + (first + b) * stride;
          double* dst = buf + b * dist_;
          for (int k = 0; k < len_; ++k) dst[k] = pre_[k] * row[k];
        }
      }
      if (count == block_lines) {
        block_plan_->execute(buf);
      } else {
        for (int b = 0; b < count; ++b) single_plan_->execute(buf + b * dist_);
      }
      if (cols) {
        for (int k = 0; k < len_; ++k) {
          double* row = base + k * stride + first;
          const double s = post_[k];
          for (int b = 0; b < count; ++b) row[b] = s * buf[b * dist_ + k];
        }
      } else {
        for (int b = 0; b < count; ++b) {
          double* row = base + (first + b) * stride;
          const double* src = buf + b * dist_;
          for (int k = 0; k < len_; ++k) row[k] = post_[k] * src[k];
        }
      }
    }
  }

  TransformKind kind_;
  int n_;
  Axis axis_;
  Backend backend_;
  int len_ = 0;
  int dist_ = 0;
  std::vector<double> pre_;
  std::vector<double> post_;
  std::shared_ptr<const detail::FftwPlan> block_plan_;
  std::shared_ptr<const detail::FftwPlan> single_plan_;
  std::shared_ptr<const Matrix> dense_;
};

/// One-shot convenience: X transformed along `axis` by `kind`.
inline Matrix apply_transform(TransformKind kind, int n, Axis axis, const Matrix& x,
                              Backend backend = Backend::Fast) {
  return TransformPlan(kind, n, axis, backend).apply(x);
}

}  // namespace fastmaxwell
