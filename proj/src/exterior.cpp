#include "weylrec/exterior.hpp"

#include <array>
#include <bit>
#include <sstream>

namespace weylrec {

namespace {

struct Move {
  int row;  // target basis rank
  int col;  // source basis rank
  int i;    // V(i, j)
  int j;
  int sign;
};

struct GradeTable {
  std::vector<MultiIndex> basis;
  std::vector<Move> moves;
};

struct Tables {
  std::array<std::array<GradeTable, kMaxDimension + 1>, kMaxDimension + 1> grades;
  std::array<std::array<int, 1u << kMaxDimension>, kMaxDimension + 1> rank{};
};

void lex_combinations(int n, int m, int start, std::uint32_t bits, std::vector<std::uint32_t>& out) {
  if (m == 0) {
    out.push_back(bits);
    return;
  }
  for (int i = start; i <= n - m; ++i) lex_combinations(n, m - 1, i + 1, bits | (1u << i), out);
}

int between_count(std::uint32_t bits, int lo, int hi) {
  if (hi - lo <= 1) return 0;
  const std::uint32_t mask = ((1u << hi) - 1u) & ~((1u << (lo + 1)) - 1u);
  return std::popcount(bits & mask);
}

Tables build_tables() {
  Tables t;
  for (int n = 1; n <= kMaxDimension; ++n) {
    t.rank[n].fill(-1);
    for (int m = 0; m <= n; ++m) {
      std::vector<std::uint32_t> masks;
      lex_combinations(n, m, 0, 0u, masks);
      GradeTable& g = t.grades[n][m];
      for (std::size_t r = 0; r < masks.size(); ++r) {
        g.basis.push_back(MultiIndex::from_bits(n, masks[r]));
        t.rank[n][masks[r]] = static_cast<int>(r);
      }
    }
    for (int m = 0; m <= n; ++m) {
      GradeTable& g = t.grades[n][m];
      for (std::size_t c = 0; c < g.basis.size(); ++c) {
        const std::uint32_t bits = g.basis[c].bits();
        for (int j = 0; j < n; ++j) {
          if (!((bits >> j) & 1u)) continue;
          for (int i = 0; i < n; ++i) {
            if (i == j) {
              g.moves.push_back({static_cast<int>(c), static_cast<int>(c), i, j, 1});
              continue;
            }
            if ((bits >> i) & 1u) continue;
            const std::uint32_t target = (bits & ~(1u << j)) | (1u << i);
            const int lo = std::min(i, j), hi = std::max(i, j);
            const int sign = (between_count(bits, lo, hi) % 2 == 0) ? 1 : -1;
            g.moves.push_back({t.rank[n][target], static_cast<int>(c), i, j, sign});
          }
        }
      }
    }
  }
  return t;
}

const Tables& tables() {
  static const Tables t = build_tables();
  return t;
}

void check_dimension(int n) {
  if (n < 1 || n > kMaxDimension) throw UsageError("exterior: dimension must be in 1..8");
}

}  // namespace

// ---------------------------------------------------------------------------

MultiIndex::MultiIndex(int n, std::span<const int> entries) : n_(n) {
  check_dimension(n);
  int prev = -1;
  for (int e : entries) {
    if (e <= prev || e >= n) throw UsageError("MultiIndex: entries must increase within [0, n)");
    bits_ |= 1u << e;
    prev = e;
  }
}

MultiIndex::MultiIndex(int n, std::initializer_list<int> entries)
    : MultiIndex(n, std::span<const int>(entries.begin(), entries.size())) {}

MultiIndex MultiIndex::from_bits(int n, std::uint32_t bits) {
  check_dimension(n);
  if (bits >> n) throw UsageError("MultiIndex: bits outside dimension");
  MultiIndex a;
  a.n_ = n;
  a.bits_ = bits;
  return a;
}

MultiIndex MultiIndex::range(int n, int first, int last) {
  std::uint32_t bits = 0;
  for (int i = std::max(first, 0); i < last; ++i) bits |= 1u << i;
  return from_bits(n, bits);
}

int MultiIndex::size() const { return std::popcount(bits_); }

std::vector<int> MultiIndex::entries() const {
  std::vector<int> e;
  for (int i = 0; i < n_; ++i)
    if ((bits_ >> i) & 1u) e.push_back(i);
  return e;
}

MultiIndex MultiIndex::with(int i) const {
  if (contains(i)) throw UsageError("MultiIndex::with: index already present");
  return from_bits(n_, bits_ | (1u << i));
}

MultiIndex MultiIndex::without(int i) const {
  if (!contains(i)) throw UsageError("MultiIndex::without: index absent");
  return from_bits(n_, bits_ & ~(1u << i));
}

std::string MultiIndex::to_string() const {
  std::ostringstream s;
  s << '(';
  bool first = true;
  for (int e : entries()) {
    if (!first) s << ',';
    s << e + 1;
    first = false;
  }
  s << ')';
  return s.str();
}

int permutation_sign(std::span<const int> seq) {
  int inversions = 0;
  for (std::size_t a = 0; a < seq.size(); ++a)
    for (std::size_t b = a + 1; b < seq.size(); ++b) {
      if (seq[a] == seq[b]) return 0;
      if (seq[a] > seq[b]) ++inversions;
    }
  return inversions % 2 == 0 ? 1 : -1;
}

int merge_sign(std::uint32_t alpha, std::uint32_t beta) {
  if (alpha & beta) return 0;
  // Inversions: pairs (a in alpha, b in beta) with a > b.
  int inversions = 0;
  for (std::uint32_t rest = beta; rest; rest &= rest - 1) {
    const int b = std::countr_zero(rest);
    inversions += std::popcount(alpha >> (b + 1));
  }
  return inversions % 2 == 0 ? 1 : -1;
}

Complement complement(const MultiIndex& alpha) {
  const int n = alpha.dimension();
  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1u);
  const std::uint32_t rest = full & ~alpha.bits();
  return {MultiIndex::from_bits(n, rest), merge_sign(alpha.bits(), rest)};
}

const std::vector<MultiIndex>& grade_basis(int n, int m) {
  check_dimension(n);
  if (m < 0 || m > n) throw UsageError("grade_basis: grade out of range");
  return tables().grades[n][m].basis;
}

std::size_t basis_rank(const MultiIndex& alpha) {
  return static_cast<std::size_t>(tables().rank[alpha.dimension()][alpha.bits()]);
}

std::size_t grade_dimension(int n, int m) { return grade_basis(n, m).size(); }

// ---------------------------------------------------------------------------

GradedTensor::GradedTensor(int n, int grade) : n_(n), grade_(grade) {
  coeffs_ = CVector::Zero(static_cast<Eigen::Index>(grade_dimension(n, grade)));
}

GradedTensor::GradedTensor(int n, int grade, CVector coeffs)
    : n_(n), grade_(grade), coeffs_(std::move(coeffs)) {
  if (static_cast<std::size_t>(coeffs_.size()) != grade_dimension(n, grade))
    throw UsageError("GradedTensor: coefficient count does not match grade");
}

GradedTensor GradedTensor::basis(const MultiIndex& alpha) {
  GradedTensor t(alpha.dimension(), alpha.size());
  t.coeffs_[static_cast<Eigen::Index>(basis_rank(alpha))] = 1.0;
  return t;
}

GradedTensor GradedTensor::scalar(int n, cplx value) {
  GradedTensor t(n, 0);
  t.coeffs_[0] = value;
  return t;
}

GradedTensor GradedTensor::vector(const CVector& v) {
  return GradedTensor(static_cast<int>(v.size()), 1, v);
}

cplx GradedTensor::coefficient(const MultiIndex& alpha) const {
  if (alpha.dimension() != n_ || alpha.size() != grade_)
    throw UsageError("GradedTensor::coefficient: multi-index does not match grade");
  return coeffs_[static_cast<Eigen::Index>(basis_rank(alpha))];
}

void GradedTensor::set(const MultiIndex& alpha, cplx value) {
  if (alpha.dimension() != n_ || alpha.size() != grade_)
    throw UsageError("GradedTensor::set: multi-index does not match grade");
  coeffs_[static_cast<Eigen::Index>(basis_rank(alpha))] = value;
}

cplx GradedTensor::top() const {
  if (grade_ != n_) throw UsageError("GradedTensor::top: tensor is not top grade");
  return coeffs_[0];
}

double GradedTensor::norm() const { return coeffs_.cwiseAbs().sum(); }

void GradedTensor::check_same(const GradedTensor& o) const {
  if (o.n_ != n_ || o.grade_ != grade_) throw UsageError("GradedTensor: grade mismatch");
}

GradedTensor& GradedTensor::operator+=(const GradedTensor& o) {
  check_same(o);
  coeffs_ += o.coeffs_;
  return *this;
}

GradedTensor& GradedTensor::operator-=(const GradedTensor& o) {
  check_same(o);
  coeffs_ -= o.coeffs_;
  return *this;
}

GradedTensor& GradedTensor::operator*=(cplx s) {
  coeffs_ *= s;
  return *this;
}

GradedTensor wedge(const GradedTensor& u, const GradedTensor& v) {
  if (u.dimension() != v.dimension()) throw UsageError("wedge: ambient dimensions differ");
  const int n = u.dimension();
  const int p = u.grade(), q = v.grade();
  if (p + q > n) throw UsageError("wedge: grade overflow");
  GradedTensor out(n, p + q);
  const auto& bu = grade_basis(n, p);
  const auto& bv = grade_basis(n, q);
  const auto& rank = tables().rank[n];
  for (std::size_t a = 0; a < bu.size(); ++a) {
    const cplx ua = u.coeffs()[static_cast<Eigen::Index>(a)];
    if (ua == cplx{}) continue;
    for (std::size_t b = 0; b < bv.size(); ++b) {
      const cplx vb = v.coeffs()[static_cast<Eigen::Index>(b)];
      if (vb == cplx{}) continue;
      const int s = merge_sign(bu[a].bits(), bv[b].bits());
      if (s == 0) continue;
      out.coeffs()[rank[bu[a].bits() | bv[b].bits()]] += static_cast<double>(s) * ua * vb;
    }
  }
  return out;
}

GradedTensor wedge_columns(const CMatrix& columns) {
  const int n = static_cast<int>(columns.rows());
  GradedTensor acc = GradedTensor::scalar(n, 1.0);
  for (Eigen::Index c = 0; c < columns.cols(); ++c)
    acc = wedge(acc, GradedTensor::vector(columns.col(c)));
  return acc;
}

void accumulate_derivation_extension(const CMatrix& V, int m, cplx s, CMatrix& out) {
  const int n = static_cast<int>(V.rows());
  if (V.cols() != n) throw UsageError("derivation_extension: matrix must be square");
  check_dimension(n);
  if (m < 0 || m > n) throw UsageError("derivation_extension: grade out of range");
  const GradeTable& g = tables().grades[n][m];
  const auto dim = static_cast<Eigen::Index>(g.basis.size());
  if (out.rows() != dim || out.cols() != dim)
    throw UsageError("derivation_extension: output has wrong size");
  for (const Move& mv : g.moves) {
    const cplx v = V(mv.i, mv.j);
    if (v == cplx{}) continue;
    out(mv.row, mv.col) += static_cast<double>(mv.sign) * s * v;
  }
}

CMatrix derivation_extension(const CMatrix& V, int m) {
  const int n = static_cast<int>(V.rows());
  check_dimension(n);
  if (m < 0 || m > n) throw UsageError("derivation_extension: grade out of range");
  const auto dim = static_cast<Eigen::Index>(grade_dimension(n, m));
  CMatrix out = CMatrix::Zero(dim, dim);
  accumulate_derivation_extension(V, m, 1.0, out);
  return out;
}

CMatrix multiplicative_extension(const CMatrix& V, int m) {
  const int n = static_cast<int>(V.rows());
  if (V.cols() != n) throw UsageError("multiplicative_extension: matrix must be square");
  const auto& basis = grade_basis(n, m);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  CMatrix out(dim, dim);
  if (m == 0) {
    out(0, 0) = 1.0;
    return out;
  }
  CMatrix sub(m, m);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const auto cols = basis[static_cast<std::size_t>(c)].entries();
    for (Eigen::Index r = 0; r < dim; ++r) {
      const auto rows = basis[static_cast<std::size_t>(r)].entries();
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) sub(a, b) = V(rows[a], cols[b]);
      out(r, c) = sub.determinant();
    }
  }
  return out;
}

GradedTensor act(const CMatrix& op, const GradedTensor& h) {
  if (op.cols() != h.coeffs().size()) throw UsageError("act: operator size mismatch");
  return GradedTensor(h.dimension(), h.grade(), op * h.coeffs());
}

namespace {

// |(V^(grade) e_source) ^ e_other|
cplx paired_top(const CMatrix& V, const MultiIndex& source, const MultiIndex& other) {
  const GradedTensor image = act(derivation_extension(V, source.size()), GradedTensor::basis(source));
  return wedge(image, GradedTensor::basis(other)).top();
}

// V_00 + ... + V_kk via |(V^(k+1) e_{0..k}) ^ e_{k+1..n-1}|.
cplx partial_trace(const CMatrix& V, int k) {
  if (k < 0) return 0.0;
  const int n = static_cast<int>(V.rows());
  return paired_top(V, MultiIndex::range(n, 0, k + 1), MultiIndex::range(n, k + 1, n));
}

}  // namespace

cplx entry_extract(const CMatrix& V, int i, int k) {
  const int n = static_cast<int>(V.rows());
  if (V.cols() != n) throw UsageError("entry_extract: matrix must be square");
  check_dimension(n);
  if (i < 0 || i >= n || k < 0 || k >= n) throw UsageError("entry_extract: index out of range");
  if (i > k) {
    // alpha = (0..k-1) u {i}; chi_alpha |(V^(k+1) e_{0..k}) ^ e_alpha'|
    const MultiIndex alpha = MultiIndex::range(n, 0, k).with(i);
    const Complement c = complement(alpha);
    return static_cast<double>(c.sign) * paired_top(V, MultiIndex::range(n, 0, k + 1), c.index);
  }
  if (i < k) {
    // alpha = (0..k-1) \ {i}, beta = alpha' \ {k};
    // |e_beta ^ e_beta'| |(V^(n-k) e_{k..n-1}) ^ e_beta'|
    const MultiIndex alpha = MultiIndex::range(n, 0, k).without(i);
    const MultiIndex beta = complement(alpha).index.without(k);
    const Complement cb = complement(beta);
    return static_cast<double>(cb.sign) * paired_top(V, MultiIndex::range(n, k, n), cb.index);
  }
  return partial_trace(V, k) - partial_trace(V, k - 1);
}

}  // namespace weylrec
