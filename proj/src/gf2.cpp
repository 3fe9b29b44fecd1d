#include "symext/gf2.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

namespace symext::gf2 {

namespace {

Word mask_n(int n) { return n >= 64 ? ~Word(0) : ((Word(1) << n) - 1); }

// Numeric value of a word with column 0 most significant (words are read
// left to right on paper).
Word msb_value(Word w, int n) {
  Word v = 0;
  for (int j = 0; j < n; ++j) v = (v << 1) | ((w >> j) & 1);
  return v;
}

void check_small(int m, int k) {
  if (m * k > 24 || k > 8)
    throw std::invalid_argument("gf2: orbit enumeration limited to m*k <= 24, k <= 8");
}

}  // namespace

ParityCheckMatrix::ParityCheckMatrix(int m_, int n_, std::vector<Word> rows_)
    : m(m_), n(n_), rows(std::move(rows_)) {
  if (n < 1 || n > 64) throw std::invalid_argument("ParityCheckMatrix: need 1 <= n <= 64");
  if (static_cast<int>(rows.size()) != m)
    throw std::invalid_argument("ParityCheckMatrix: row count mismatch");
  for (Word r : rows)
    if (r & ~mask_n(n)) throw std::invalid_argument("ParityCheckMatrix: row exceeds n columns");
}

ParityMatrix::ParityMatrix(int m_, int k_, std::vector<Word> rows_)
    : m(m_), k(k_), rows(std::move(rows_)) {
  if (k < 1 || k > 64) throw std::invalid_argument("ParityMatrix: need 1 <= k <= 64");
  if (static_cast<int>(rows.size()) != m)
    throw std::invalid_argument("ParityMatrix: row count mismatch");
  for (Word r : rows)
    if (r & ~mask_n(k)) throw std::invalid_argument("ParityMatrix: row exceeds k columns");
}

ParityCheckMatrix parse_matrix(const std::string& text) {
  std::vector<Word> rows;
  int n = -1;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    Word r = 0;
    for (size_t j = 0; j < line.size(); ++j) {
      if (line[j] == '1')
        r |= Word(1) << j;
      else if (line[j] != '0')
        throw std::invalid_argument("parse_matrix: expected '0'/'1'");
    }
    if (n < 0) n = static_cast<int>(line.size());
    if (n != static_cast<int>(line.size()))
      throw std::invalid_argument("parse_matrix: ragged rows");
    rows.push_back(r);
  }
  if (rows.empty()) throw std::invalid_argument("parse_matrix: empty input");
  const int m = static_cast<int>(rows.size());
  return ParityCheckMatrix(m, n, std::move(rows));
}

std::string row_string(Word row, int width) {
  std::string s(width, '0');
  for (int j = 0; j < width; ++j)
    if ((row >> j) & 1) s[j] = '1';
  return s;
}

std::string to_text(const ParityCheckMatrix& h) {
  std::string out;
  for (Word r : h.rows) {
    out += row_string(r, h.n);
    out += '\n';
  }
  return out;
}

ParityCheckMatrix rref(const ParityCheckMatrix& h) {
  std::vector<Word> rows = h.rows;
  int pivot_row = 0;
  for (int col = 0; col < h.n && pivot_row < h.m; ++col) {
    int sel = -1;
    for (int r = pivot_row; r < h.m; ++r)
      if ((rows[r] >> col) & 1) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    std::swap(rows[pivot_row], rows[sel]);
    for (int r = 0; r < h.m; ++r)
      if (r != pivot_row && ((rows[r] >> col) & 1)) rows[r] ^= rows[pivot_row];
    ++pivot_row;
  }
  return ParityCheckMatrix(h.m, h.n, std::move(rows));
}

int rank(const ParityCheckMatrix& h) {
  ParityCheckMatrix r = rref(h);
  int rk = 0;
  for (Word w : r.rows)
    if (w) ++rk;
  return rk;
}

SystematicForm to_systematic(const ParityCheckMatrix& h) {
  ParityCheckMatrix r = rref(h);
  for (Word w : r.rows)
    if (!w) throw std::invalid_argument("to_systematic: rank-deficient input");
  const int m = h.m, n = h.n, k = n - m;
  if (k < 1) throw std::invalid_argument("to_systematic: need m < n");

  // Greedy independent column selection from the right.
  std::vector<Word> basis;  // row space spanned by chosen columns (as m-bit vectors)
  std::vector<bool> chosen(n, false);
  std::vector<Word> cols(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if ((r.rows[i] >> j) & 1) cols[j] |= Word(1) << i;
  std::vector<Word> reducers;  // echelon basis of chosen column vectors
  int nchosen = 0;
  for (int j = n - 1; j >= 0 && nchosen < m; --j) {
    Word v = cols[j];
    for (Word b : reducers) v = std::min(v, v ^ b);
    if (v) {
      reducers.push_back(v);
      std::sort(reducers.rbegin(), reducers.rend());
      chosen[j] = true;
      ++nchosen;
    }
  }
  if (nchosen < m) throw std::invalid_argument("to_systematic: rank-deficient input");

  std::vector<int> perm(n);
  int kept = 0, piv = 0;
  std::vector<int> pivot_cols;
  for (int j = 0; j < n; ++j) {
    if (chosen[j]) {
      perm[j] = k + piv++;
      pivot_cols.push_back(j);
    } else {
      perm[j] = kept++;
    }
  }
  // Invert the pivot block by Gaussian elimination so that row i has its
  // pivot in pivot_cols[i].
  std::vector<Word> rows = r.rows;
  for (int i = 0; i < m; ++i) {
    int sel = -1;
    for (int t = i; t < m; ++t)
      if ((rows[t] >> pivot_cols[i]) & 1) {
        sel = t;
        break;
      }
    std::swap(rows[i], rows[sel]);
    for (int t = 0; t < m; ++t)
      if (t != i && ((rows[t] >> pivot_cols[i]) & 1)) rows[t] ^= rows[i];
  }
  std::vector<Word> prows(m, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (!chosen[j] && ((rows[i] >> j) & 1)) prows[i] |= Word(1) << perm[j];
  SystematicForm out;
  out.p = ParityMatrix(m, k, std::move(prows));
  out.column_permutation = std::move(perm);
  return out;
}

std::vector<ParityCheckMatrix> reduce(const ParityCheckMatrix& h, ReductionReport* report) {
  ReductionReport rep;
  ParityCheckMatrix r = rref(h);
  std::vector<Word> rows;
  for (Word w : r.rows)
    if (w) rows.push_back(w);
  rep.removed_zero_rows = h.m - static_cast<int>(rows.size());

  // Drop untouched bits (all-zero columns) and revealed bits (weight-1 rows);
  // neither removal can create new instances of the other.
  std::vector<int> col_of;  // surviving column -> original index
  for (int j = 0; j < h.n; ++j) col_of.push_back(j);
  auto drop_col = [&](int j) {
    const Word low = mask_n(j);
    for (Word& w : rows) w = (w & low) | ((w >> 1) & ~low);
    col_of.erase(col_of.begin() + j);
  };
  for (int j = static_cast<int>(col_of.size()) - 1; j >= 0; --j) {
    bool zero = true;
    for (Word w : rows) zero = zero && !((w >> j) & 1);
    if (zero) {
      rep.removed_zero_columns.push_back(col_of[j]);
      drop_col(j);
    }
  }
  std::reverse(rep.removed_zero_columns.begin(), rep.removed_zero_columns.end());
  for (bool again = true; again;) {
    again = false;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (std::popcount(rows[i]) == 1) {
        const int j = std::countr_zero(rows[i]);
        rep.revealed_bits.push_back(col_of[j]);
        rows.erase(rows.begin() + i);
        drop_col(j);
        again = true;
        break;
      }
    }
  }

  std::vector<ParityCheckMatrix> blocks;
  if (!rows.empty()) {
    const int m = static_cast<int>(rows.size());
    const int n = static_cast<int>(col_of.size());
    SystematicForm sf = to_systematic(ParityCheckMatrix(m, n, rows));
    const int k = n - m;
    // Connected components of the parity-matrix incidence graph.
    std::vector<int> row_comp(m, -1), col_comp(k, -1);
    int ncomp = 0;
    for (int seed = 0; seed < m; ++seed) {
      if (row_comp[seed] >= 0) continue;
      const int c = ncomp++;
      std::queue<std::pair<bool, int>> q;  // (is_row, index)
      q.emplace(true, seed);
      row_comp[seed] = c;
      while (!q.empty()) {
        auto [is_row, idx] = q.front();
        q.pop();
        if (is_row) {
          for (int j = 0; j < k; ++j)
            if (((sf.p.rows[idx] >> j) & 1) && col_comp[j] < 0) {
              col_comp[j] = c;
              q.emplace(false, j);
            }
        } else {
          for (int i = 0; i < m; ++i)
            if (((sf.p.rows[i] >> idx) & 1) && row_comp[i] < 0) {
              row_comp[i] = c;
              q.emplace(true, i);
            }
        }
      }
    }
    // Position -> original input column.
    std::vector<int> col_at(n);
    for (int j = 0; j < n; ++j) col_at[sf.column_permutation[j]] = col_of[j];
    for (int c = 0; c < ncomp; ++c) {
      std::vector<int> brows, bcols;
      for (int i = 0; i < m; ++i)
        if (row_comp[i] == c) brows.push_back(i);
      for (int j = 0; j < k; ++j)
        if (col_comp[j] == c) bcols.push_back(j);
      const int bm = static_cast<int>(brows.size());
      const int bk = static_cast<int>(bcols.size());
      std::vector<Word> bh(bm, 0);
      for (int i = 0; i < bm; ++i) {
        for (int j = 0; j < bk; ++j)
          if ((sf.p.rows[brows[i]] >> bcols[j]) & 1) bh[i] |= Word(1) << j;
        bh[i] |= Word(1) << (bk + i);
      }
      blocks.emplace_back(bm, bk + bm, std::move(bh));
      std::vector<int> part;
      for (int j : bcols) part.push_back(col_at[j]);
      for (int i : brows) part.push_back(col_at[k + i]);
      rep.direct_sum_blocks.push_back(std::move(part));
    }
  }
  if (report) *report = std::move(rep);
  return blocks;
}

bool is_irreducible(const ParityCheckMatrix& h) {
  ReductionReport rep;
  std::vector<ParityCheckMatrix> blocks = reduce(h, &rep);
  return rep.removed_zero_rows == 0 && rep.removed_zero_columns.empty() &&
         rep.revealed_bits.empty() && blocks.size() == 1;
}

namespace {

using Key = std::vector<Word>;  // sorted rows

// Least sorted-row tuple over all column permutations (rows compared by the
// bitmask value, so the canonical form is representation-determined).
Key canonical_key(const ParityMatrix& p) {
  std::vector<int> cols(p.k);
  for (int j = 0; j < p.k; ++j) cols[j] = j;
  Key best;
  do {
    std::vector<Word> rows(p.m, 0);
    for (int i = 0; i < p.m; ++i)
      for (int j = 0; j < p.k; ++j)
        if ((p.rows[i] >> cols[j]) & 1) rows[i] |= Word(1) << j;
    std::sort(rows.begin(), rows.end());
    if (best.empty() || rows < best) best = rows;
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

// Neighbors under operation (iii): for a 1 at (i,j), rows with a 1 in
// column j (other than row i) get row i added everywhere except column j.
std::vector<ParityMatrix> op3_neighbors(const ParityMatrix& p) {
  std::vector<ParityMatrix> out;
  for (int i = 0; i < p.m; ++i)
    for (int j = 0; j < p.k; ++j) {
      if (!((p.rows[i] >> j) & 1)) continue;
      ParityMatrix q = p;
      const Word add = p.rows[i] & ~(Word(1) << j);
      for (int t = 0; t < p.m; ++t)
        if (t != i && ((p.rows[t] >> j) & 1)) q.rows[t] ^= add;
      out.push_back(std::move(q));
    }
  return out;
}

// Full orbit as a set of canonical keys; also reports the least key.
std::set<Key> orbit_keys(const ParityMatrix& p, Key* least = nullptr) {
  check_small(p.m, p.k);
  std::set<Key> seen;
  std::queue<ParityMatrix> q;
  const Key start = canonical_key(p);
  seen.insert(start);
  q.push(ParityMatrix(p.m, p.k, start));
  Key best = start;
  while (!q.empty()) {
    ParityMatrix cur = q.front();
    q.pop();
    for (ParityMatrix& nb : op3_neighbors(cur)) {
      Key key = canonical_key(nb);
      if (seen.insert(key).second) {
        best = std::min(best, key);
        q.push(ParityMatrix(p.m, p.k, key));
      }
    }
  }
  if (least) *least = best;
  return seen;
}

}  // namespace

ParityMatrix canonical_form(const ParityMatrix& p) {
  Key least;
  orbit_keys(p, &least);
  return ParityMatrix(p.m, p.k, least);
}

bool equivalent(const ParityMatrix& p1, const ParityMatrix& p2) {
  if (p1.m != p2.m || p1.k != p2.k)
    throw std::invalid_argument("equivalent: shape mismatch");
  const std::set<Key> orbit = orbit_keys(p1);
  return orbit.count(canonical_key(p2)) > 0;
}

std::vector<ParityMatrix> enumerate_classes(int n, int k, bool irreducible_only) {
  if (k < 1 || k >= n) throw std::invalid_argument("enumerate_classes: need 1 <= k < n");
  const int m = n - k;
  check_small(m, k);
  const Word nrow = Word(1) << k;
  std::set<Key> visited;
  std::vector<ParityMatrix> reps;
  // Row multisets (nondecreasing row tuples) cover all matrices up to row
  // permutation, which is part of the group.
  std::vector<Word> rows(m, 0);
  auto recurse = [&](auto&& self, int pos, Word minrow) -> void {
    if (pos == m) {
      ParityMatrix p(m, k, rows);
      Key key = canonical_key(p);
      if (visited.count(key)) return;
      Key least;
      const std::set<Key> orbit = orbit_keys(p, &least);
      visited.insert(orbit.begin(), orbit.end());
      ParityMatrix rep(m, k, least);
      if (irreducible_only) {
        std::vector<Word> hrows = rep.rows;
        for (int i = 0; i < m; ++i) hrows[i] |= Word(1) << (k + i);
        if (!is_irreducible(ParityCheckMatrix(m, n, hrows))) return;
      }
      reps.push_back(std::move(rep));
      return;
    }
    for (Word r = minrow; r < nrow; ++r) {
      rows[pos] = r;
      self(self, pos + 1, r);
    }
  };
  recurse(recurse, 0, 0);
  return reps;
}

std::vector<std::string> class_label_headers(int k) {
  std::vector<std::string> headers;
  if (k == 3) {
    // Thesis column convention for k = 3.
    for (const char* s : {"100", "010", "001", "111", "110", "101", "011"}) headers.push_back(s);
    return headers;
  }
  std::vector<Word> vals;
  for (Word v = 1; v < (Word(1) << k); ++v) vals.push_back(v);
  std::sort(vals.begin(), vals.end(), [&](Word a, Word b) {
    const int wa = std::popcount(a), wb = std::popcount(b);
    if (wa != wb) return wa < wb;
    return msb_value(a, k) > msb_value(b, k);
  });
  for (Word v : vals) headers.push_back(row_string(v, k));
  return headers;
}

std::vector<int> row_multiset_label(const ParityMatrix& p) {
  const std::vector<std::string> headers = class_label_headers(p.k);
  std::vector<int> counts(headers.size(), 0);
  for (Word r : p.rows) {
    const std::string s = row_string(r, p.k);
    for (size_t i = 0; i < headers.size(); ++i)
      if (headers[i] == s) {
        ++counts[i];
        break;
      }
  }
  return counts;
}

namespace {

// All solutions of H x = a as particular + span(nullspace basis).
struct AffineSolutions {
  bool solvable = false;
  Word particular = 0;
  std::vector<Word> null_basis;
};

AffineSolutions solve(const ParityCheckMatrix& h, Word a) {
  // Eliminate on the augmented matrix [H | a].
  std::vector<Word> rows = h.rows;
  std::vector<int> rhs(h.m);
  for (int i = 0; i < h.m; ++i) rhs[i] = static_cast<int>((a >> i) & 1);
  std::vector<int> pivot_col(h.m, -1);
  int pr = 0;
  for (int col = 0; col < h.n && pr < h.m; ++col) {
    int sel = -1;
    for (int r = pr; r < h.m; ++r)
      if ((rows[r] >> col) & 1) {
        sel = r;
        break;
      }
    if (sel < 0) continue;
    std::swap(rows[pr], rows[sel]);
    std::swap(rhs[pr], rhs[sel]);
    for (int r = 0; r < h.m; ++r)
      if (r != pr && ((rows[r] >> col) & 1)) {
        rows[r] ^= rows[pr];
        rhs[r] ^= rhs[pr];
      }
    pivot_col[pr++] = col;
  }
  AffineSolutions out;
  for (int r = pr; r < h.m; ++r)
    if (rhs[r]) return out;  // inconsistent
  out.solvable = true;
  for (int r = 0; r < pr; ++r)
    if (rhs[r]) out.particular |= Word(1) << pivot_col[r];
  std::vector<bool> is_pivot(h.n, false);
  for (int r = 0; r < pr; ++r) is_pivot[pivot_col[r]] = true;
  for (int j = 0; j < h.n; ++j) {
    if (is_pivot[j]) continue;
    Word v = Word(1) << j;
    for (int r = 0; r < pr; ++r)
      if ((rows[r] >> j) & 1) v |= Word(1) << pivot_col[r];
    out.null_basis.push_back(v);
  }
  return out;
}

Word min_value_solution(const ParityCheckMatrix& h, Word a, bool* ok) {
  AffineSolutions s = solve(h, a);
  if (!s.solvable) {
    *ok = false;
    return 0;
  }
  *ok = true;
  Word best = s.particular;
  Word best_val = msb_value(best, h.n);
  const int kk = static_cast<int>(s.null_basis.size());
  for (Word u = 0; u < (Word(1) << kk); ++u) {
    Word x = s.particular;
    for (int b = 0; b < kk; ++b)
      if ((u >> b) & 1) x ^= s.null_basis[b];
    const Word v = msb_value(x, h.n);
    if (v < best_val) {
      best_val = v;
      best = x;
    }
  }
  return best;
}

}  // namespace

bool maurer_equivalent(const ParityCheckMatrix& h, Word data, Word r) {
  if (h.n > 12) throw std::invalid_argument("maurer_equivalent: n <= 12 required");
  if (rank(h) != h.m) throw std::invalid_argument("maurer_equivalent: H rank-deficient");
  const int k = h.n - h.m;
  SystematicForm sf = to_systematic(h);

  // Systematic encoder: index bits occupy the non-pivot positions, parity
  // bits the pivot positions, mapped back through the column permutation.
  auto encode = [&](Word idx) {
    Word parity = 0;
    for (int i = 0; i < h.m; ++i) {
      int bit = std::popcount(sf.p.rows[i] & idx) & 1;
      parity |= Word(bit) << i;
    }
    Word c = 0;
    for (int col = 0; col < h.n; ++col) {
      const int pos = sf.column_permutation[col];
      const int bit = pos < k ? static_cast<int>((idx >> pos) & 1)
                              : static_cast<int>((parity >> (pos - k)) & 1);
      c |= Word(bit) << col;
    }
    return c;
  };
  auto decode = [&](Word c, bool* ok) {
    Word idx = 0;
    for (int col = 0; col < h.n; ++col) {
      const int pos = sf.column_permutation[col];
      if (pos < k) idx |= ((c >> col) & 1) << pos;
    }
    *ok = encode(idx) == c;
    return idx;
  };

  // Announcement 1 -> announcement 2.
  const Word a = [&] {
    Word acc = 0;
    for (int i = 0; i < h.m; ++i) acc |= Word(std::popcount(h.rows[i] & data) & 1) << i;
    return acc;
  }();
  Word cj = 0;
  {
    Word best_val = ~Word(0);
    for (Word u = 0; u < (Word(1) << k); ++u) {
      const Word c = encode(u);
      const Word v = msb_value(c ^ data, h.n);
      if (v < best_val) {
        best_val = v;
        cj = c;
      }
    }
  }
  const Word m_word = encode(r) ^ cj ^ data;

  // Reconstruct (r, a) from m: a = H m, d0 = least solution of H x = a,
  // c_r = m + d0.
  Word a_from_m = 0;
  for (int i = 0; i < h.m; ++i)
    a_from_m |= Word(std::popcount(h.rows[i] & m_word) & 1) << i;
  bool ok = false;
  const Word d0 = min_value_solution(h, a_from_m, &ok);
  if (!ok) return false;
  bool dec_ok = false;
  const Word r_rec = decode(m_word ^ d0, &dec_ok);
  if (!dec_ok || a_from_m != a || r_rec != r) return false;

  // Reconstruct m from (r, a).
  bool ok2 = false;
  const Word d0b = min_value_solution(h, a, &ok2);
  if (!ok2) return false;
  const Word m_rec = encode(r) ^ d0b;
  return m_rec == m_word;
}

}  // namespace symext::gf2
