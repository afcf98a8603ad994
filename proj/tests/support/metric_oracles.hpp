#pragma once

// Brute-force metric references over pre-tokenized text. N-grams are kept as
// space-joined strings in flat lists and matched by linear scan.

#include <string>
#include <vector>

namespace qctc::oracle {

struct CiderCase {
  std::vector<std::string> candidate;
  std::vector<std::vector<std::string>> references;
};

// Mean over cases of 10 x (CIDEr-D similarity averaged over n and references).
double cider_d(const std::vector<CiderCase>& corpus);

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
std::vector<double> symmetric_eigenvalues(std::vector<std::vector<double>> a);

}  // namespace qctc::oracle
