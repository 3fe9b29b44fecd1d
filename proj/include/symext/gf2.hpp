// GF(2) parity-check-matrix algebra for linear advantage distillation
// announcements: row reduction, systematic form, reducibility, equivalence
// classes of parity matrices, and the Maurer announcement-equivalence check.
//
// Rows are stored as 64-bit masks; bit j corresponds to column j, with
// column 0 the leftmost column of the written matrix.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace symext::gf2 {

using Word = std::uint64_t;

struct ParityCheckMatrix {
  int m = 0;  // announced parity bits (rows)
  int n = 0;  // block size (columns)
  std::vector<Word> rows;

  ParityCheckMatrix() = default;
  ParityCheckMatrix(int m_, int n_, std::vector<Word> rows_);
  bool operator==(const ParityCheckMatrix&) const = default;
};

struct ParityMatrix {
  int m = 0;  // rows
  int k = 0;  // columns (k = n - m)
  std::vector<Word> rows;

  ParityMatrix() = default;
  ParityMatrix(int m_, int k_, std::vector<Word> rows_);
  bool operator==(const ParityMatrix&) const = default;
};

// Parse/print: one row per line of '0'/'1' characters, leftmost column first.
ParityCheckMatrix parse_matrix(const std::string& text);
std::string to_text(const ParityCheckMatrix& h);
std::string row_string(Word row, int width);

// Row-reduced echelon form (unique). Zero rows are kept at the bottom.
ParityCheckMatrix rref(const ParityCheckMatrix& h);
int rank(const ParityCheckMatrix& h);

// Systematic form H ~ [P | 1_m] via row operations plus a column permutation.
// Pivot columns are chosen greedily from the right so that an
// already-systematic matrix gets the identity permutation.
// column_permutation[c] = position of the original column c.
struct SystematicForm {
  ParityMatrix p;
  std::vector<int> column_permutation;
};
SystematicForm to_systematic(const ParityCheckMatrix& h);

struct ReductionReport {
  int removed_zero_rows = 0;
  std::vector<int> removed_zero_columns;  // indices in the input matrix
  std::vector<int> revealed_bits;         // column indices removed via weight-1 rows
  std::vector<std::vector<int>> direct_sum_blocks;  // input-column partition per block
};

// Strip dependent rows, untouched bits and revealed bits, then split into
// direct-sum blocks (connected components of the parity-matrix incidence
// graph in systematic form). Blocks are returned in systematic form.
std::vector<ParityCheckMatrix> reduce(const ParityCheckMatrix& h, ReductionReport* report = nullptr);

bool is_irreducible(const ParityCheckMatrix& h);

// Orbit equivalence of parity matrices under (i) column permutations,
// (ii) row permutations, (iii) the pivot-exchange row update. Decided by
// breadth-first orbit enumeration over canonical forms.
bool equivalent(const ParityMatrix& p1, const ParityMatrix& p2);

// Lexicographically least orbit member (rows sorted ascending).
ParityMatrix canonical_form(const ParityMatrix& p);

// All equivalence classes of m x k parity matrices for block size n (m = n-k),
// one canonical representative each, every m x k matrix covered.
std::vector<ParityMatrix> enumerate_classes(int n, int k, bool irreducible_only);

// Row-multiset label: counts of rows equal to each nonzero k-bit string in
// the thesis column convention (for k=3: 100 010 001 111 110 101 011).
std::vector<std::string> class_label_headers(int k);
std::vector<int> row_multiset_label(const ParityMatrix& p);

// True iff announcing (r, H d) and announcing the Maurer word
// m = c_r + c_j + d reveal the same information, verified by reconstructing
// each announcement from the other. Requires n <= 12.
bool maurer_equivalent(const ParityCheckMatrix& h, Word data, Word r);

}  // namespace symext::gf2
