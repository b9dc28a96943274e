#include "phfem/factorization.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>
#include <umfpack.h>

namespace phfem {

namespace {

std::string format_rcond(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", r);
  return buf;
}

// UMFPACK works on compressed columns. The CSR arrays of A are the CSC arrays
// of A^T, so we hand them over as-is and solve with the transposed system.
class UmfLu {
 public:
  UmfLu(const SparseMatrix& a, double tol) : tol_(tol) {
    umfpack_di_defaults(control_);
    control_[UMFPACK_IRSTEP] = 2;
    analyze(a);
    numeric(a);
  }
  ~UmfLu() { release(); }
  UmfLu(const UmfLu&) = delete;
  UmfLu& operator=(const UmfLu&) = delete;

  void refactor(const SparseMatrix& a) {
    if (!a.same_pattern(pattern_)) {
      release();
      analyze(a);
    } else if (numeric_) {
      umfpack_di_free_numeric(&numeric_);
    }
    numeric(a);
  }

  Vector solve(const Vector& b) const {
    Vector x(b.size());
    double info[UMFPACK_INFO];
    int st = umfpack_di_solve(UMFPACK_At, ap_.data(), ai_.data(), ax_.data(), x.data(), b.data(),
                              numeric_, control_, info);
    if (st < 0) throw Error("umfpack solve failed with status " + std::to_string(st));
    return x;
  }

 private:
  void copy(const SparseMatrix& a) {
    ap_.assign(a.row_offsets().begin(), a.row_offsets().end());
    ai_.assign(a.col_indices().begin(), a.col_indices().end());
    ax_.assign(a.values().begin(), a.values().end());
    n_ = static_cast<int>(a.rows());
  }

  void analyze(const SparseMatrix& a) {
    copy(a);
    pattern_ = a;
    double info[UMFPACK_INFO];
    int st = umfpack_di_symbolic(n_, n_, ap_.data(), ai_.data(), ax_.data(), &symbolic_, control_,
                                 info);
    if (st < 0) throw Error("umfpack symbolic analysis failed with status " + std::to_string(st));
  }

  void numeric(const SparseMatrix& a) {
    ax_.assign(a.values().begin(), a.values().end());
    double info[UMFPACK_INFO];
    int st = umfpack_di_numeric(ap_.data(), ai_.data(), ax_.data(), symbolic_, &numeric_,
                                control_, info);
    if (st < 0 && st != UMFPACK_WARNING_singular_matrix)
      throw Error("umfpack numeric factorization failed with status " + std::to_string(st));
    double rcond = info[UMFPACK_RCOND];
    if (st == UMFPACK_WARNING_singular_matrix || !(rcond > tol_)) {
      std::ptrdiff_t pivot = smallest_pivot();
      release();
      throw SingularMatrixError("matrix is numerically singular (rcond " + format_rcond(rcond) +
                                    ")",
                                pivot);
    }
  }

  std::ptrdiff_t smallest_pivot() const {
    std::vector<double> d(n_);
    std::vector<int> q(n_);
    umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr,
                           q.data(), d.data(), nullptr, nullptr, numeric_);
    std::size_t k = 0;
    for (std::size_t i = 1; i < d.size(); ++i)
      if (std::abs(d[i]) < std::abs(d[k])) k = i;
    return n_ > 0 ? q[k] : -1;
  }

  void release() {
    if (numeric_) umfpack_di_free_numeric(&numeric_);
    if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
    numeric_ = symbolic_ = nullptr;
  }

  double tol_;
  double control_[UMFPACK_CONTROL];
  void* symbolic_ = nullptr;
  void* numeric_ = nullptr;
  std::vector<int> ap_, ai_;
  std::vector<double> ax_;
  SparseMatrix pattern_;
  int n_ = 0;
};

// The pivot test runs on S A S with S = diag(|a_ii|)^-1/2, so badly scaled
// but well posed systems (Hermite dofs on graded meshes) are not rejected.
class Ldlt {
 public:
  using Csc = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

  Ldlt(const SparseMatrix& a, double tol) : tol_(tol) { refactor(a); }

  void refactor(const SparseMatrix& a) {
    a_ = Csc(a.eigen());
    scale_.resize(a_.rows());
    Vector d = a_.diagonal();
    for (Index i = 0; i < d.size(); ++i) scale_[i] = d[i] != 0.0 ? 1.0 / std::sqrt(std::abs(d[i])) : 1.0;
    scaled_ = scale_.asDiagonal() * a_ * scale_.asDiagonal();
    solver_.analyzePattern(scaled_);
    numeric();
  }

  Vector solve(const Vector& b) const {
    auto once = [&](const Vector& r) -> Vector {
      return scale_.cwiseProduct(Vector(solver_.solve(Vector(scale_.cwiseProduct(r)))));
    };
    Vector x = once(b);
    // One refinement sweep; cheap and brings residuals to roundoff level.
    x += once(b - a_ * x);
    return x;
  }

 private:
  void numeric() {
    solver_.factorize(scaled_);
    const Vector& d = solver_.vectorD();
    double dmax = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;
    Index k = 0;
    for (Index i = 1; i < d.size(); ++i)
      if (std::abs(d[i]) < std::abs(d[k])) k = i;
    if (solver_.info() != Eigen::Success || d.size() == 0 || !(std::abs(d[k]) > tol_ * dmax)) {
      std::ptrdiff_t pivot = d.size() ? solver_.permutationPinv().indices()(k) : -1;
      throw SingularMatrixError("symmetric matrix is numerically singular", pivot);
    }
  }

  double tol_;
  Csc a_, scaled_;
  Vector scale_;
  Eigen::SimplicialLDLT<Csc, Eigen::Lower, Eigen::AMDOrdering<int>> solver_;
};

}  // namespace

struct Factorization::Impl {
  std::unique_ptr<UmfLu> lu;
  std::unique_ptr<Ldlt> ldlt;
};

Factorization::Factorization() = default;
Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Factorization::Factorization(const SparseMatrix& a, bool symmetric, double pivot_tol)
    : symmetric_(symmetric), tol_(pivot_tol), n_(a.rows()) {
  if (a.rows() != a.cols()) throw DimensionError("factorize: matrix is not square");
  if (a.rows() == 0) throw DimensionError("factorize: empty matrix");
  auto impl = std::make_unique<Impl>();
  if (symmetric) {
    double scale = a.max_abs();
    double asym = (a - a.transpose()).max_abs();
    if (asym > 1e-12 * scale)
      throw InvalidArgument("factorize: symmetric path requested for a nonsymmetric matrix");
    impl->ldlt = std::make_unique<Ldlt>(a, pivot_tol);
  } else {
    impl->lu = std::make_unique<UmfLu>(a, pivot_tol);
  }
  impl_ = std::move(impl);
}

bool Factorization::valid() const { return impl_ != nullptr; }

Vector Factorization::solve(const Vector& b) const {
  if (!impl_) throw Error("solve on an invalid factorization handle");
  if (b.size() != n_) throw DimensionError("solve: right-hand side length mismatch");
  return impl_->lu ? impl_->lu->solve(b) : impl_->ldlt->solve(b);
}

void Factorization::refactor(const SparseMatrix& a) {
  if (!impl_) throw Error("refactor on an invalid factorization handle");
  if (a.rows() != n_ || a.cols() != n_) throw DimensionError("refactor: size changed");
  try {
    if (impl_->lu)
      impl_->lu->refactor(a);
    else
      impl_->ldlt->refactor(a);
  } catch (...) {
    impl_.reset();
    throw;
  }
}

Factorization factorize(const SparseMatrix& a, bool symmetric, double pivot_tol) {
  return Factorization(a, symmetric, pivot_tol);
}

Vector solve(const Factorization& f, const Vector& b) { return f.solve(b); }

}  // namespace phfem
