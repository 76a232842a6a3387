#include "ras/alignment.hpp"

#include <cmath>
#include <cstdint>

namespace ras {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_alpha: return "InvalidAlpha";
    case Errc::empty_reference: return "EmptyReference";
    case Errc::ref_contains_placeholder: return "RefContainsPlaceholder";
    case Errc::placeholder_in_plain_alignment: return "PlaceholderInPlainAlignment";
    case Errc::bar_out_of_range: return "BarOutOfRange";
    case Errc::empty_corpus: return "EmptyCorpus";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::empty_records: return "EmptyRecords";
    case Errc::empty_group: return "EmptyGroup";
    case Errc::parse_error: return "ParseError";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::confidence_length_mismatch: return "ConfidenceLengthMismatch";
    case Errc::malformed_request: return "MalformedRequest";
    case Errc::io_error: return "IoError";
    case Errc::internal: return "InternalError";
  }
  return "UnknownError";
}

const char* op_kind_name(OpKind k) {
  switch (k) {
    case OpKind::match: return "match";
    case OpKind::substitute: return "substitute";
    case OpKind::del: return "delete";
    case OpKind::insert_word: return "insert";
    case OpKind::ph_absorb: return "ph_absorb";
    case OpKind::ph_insert: return "ph_insert";
  }
  return "?";
}

bool WordSeq::has_placeholder() const {
  for (const Word& w : words)
    if (w.is_ph) return true;
  return false;
}

int WordSeq::placeholder_count() const {
  int n = 0;
  for (const Word& w : words) n += w.is_ph ? 1 : 0;
  return n;
}

std::string WordSeq::to_string() const {
  std::string out;
  for (const Word& w : words) {
    if (!out.empty()) out += ' ';
    out += w.is_ph ? std::string(kPhToken) : w.text;
  }
  return out;
}

double AlignOp::cost(double alpha) const {
  switch (kind) {
    case OpKind::match: return 0.0;
    case OpKind::substitute:
    case OpKind::del:
    case OpKind::insert_word: return 1.0;
    case OpKind::ph_absorb: return alpha * ref_span();
    case OpKind::ph_insert: return alpha;
  }
  return 0.0;
}

namespace {

// DP cell for one (ref suffix, hyp suffix) pair: the exact cost
// decomposition units + alpha*ph plus the match count used as tie-break.
struct Cell {
  int32_t units = 0;
  int32_t ph = 0;
  int32_t matches = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

Cell add(const Cell& c, int32_t du, int32_t dp, int32_t dm) {
  return {c.units + du, c.ph + dp, c.matches + dm};
}

// Exact total order on costs of the form units + alpha*ph. alpha is
// decomposed into an integer mantissa and a power-of-two scale so the
// comparison is pure integer arithmetic; no rounding can reorder candidates,
// which keeps the reference and fast DP bit-identical and makes the order
// invariant under the alpha*i offset the fast path relies on.
class CostOrder {
 public:
  explicit CostOrder(double alpha) {
    int exp = 0;
    double frac = std::frexp(alpha, &exp);                // alpha = frac * 2^exp
    mant_ = static_cast<int64_t>(std::ldexp(frac, 53));   // exact 53-bit integer
    shift_ = 53 - exp;                                    // alpha = mant_ * 2^-shift_
    exact_wide_ = shift_ <= 80;
  }

  // units_a + alpha*ph_a < units_b + alpha*ph_b, exactly.
  bool less(int64_t units_a, int64_t ph_a, int64_t units_b, int64_t ph_b) const {
    if (exact_wide_) {
      __int128 v = (static_cast<__int128>(units_a - units_b) << shift_) +
                   static_cast<__int128>(ph_a - ph_b) * mant_;
      return v < 0;
    }
    // alpha < 2^-27: at utterance scale the ph mass can never offset a unit.
    if (units_a != units_b) return units_a < units_b;
    return ph_a < ph_b;
  }

  // Strictly better alignment value: lower cost, then more matches.
  bool better(const Cell& a, const Cell& b) const {
    if (less(a.units, a.ph, b.units, b.ph)) return true;
    if (less(b.units, b.ph, a.units, a.ph)) return false;
    return a.matches > b.matches;
  }

 private:
  int64_t mant_ = 0;
  int shift_ = 0;
  bool exact_wide_ = true;
};

class Table {
 public:
  Table(int n, int m)
      : cols_(m + 1), cells_(static_cast<size_t>(n + 1) * static_cast<size_t>(m + 1)) {}

  Cell& at(int i, int j) { return cells_[static_cast<size_t>(i) * cols_ + j]; }
  const Cell& at(int i, int j) const { return cells_[static_cast<size_t>(i) * cols_ + j]; }

 private:
  size_t cols_;
  std::vector<Cell> cells_;
};

// Suffix DP: cell (i,j) is the optimal value for aligning ref[i:) with
// hyp[j:). The placeholder transition scans absorb end points e in (i, N];
// the fast variant folds that scan into a running minimum per placeholder
// column keyed by (units, ph + e), which is independent of i. Both variants
// compare candidates with the same exact order, so they fill identical
// tables.
void fill(Table& t, const WordSeq& ref, const WordSeq& hyp, const CostOrder& ord, bool fast) {
  const int n = ref.size();
  const int m = hyp.size();

  t.at(n, m) = Cell{};
  for (int i = n - 1; i >= 0; --i) t.at(i, m) = Cell{static_cast<int32_t>(n - i), 0, 0};
  for (int j = m - 1; j >= 0; --j)
    t.at(n, j) = add(t.at(n, j + 1), hyp[j].is_ph ? 0 : 1, hyp[j].is_ph ? 1 : 0, 0);

  std::vector<Cell> absorb;          // running absorb key per hyp position
  std::vector<char> absorb_live;
  if (fast) {
    absorb.resize(static_cast<size_t>(m));
    absorb_live.assign(static_cast<size_t>(m), 0);
  }

  for (int i = n - 1; i >= 0; --i) {
    if (fast) {
      // Absorb end point e = i+1 enters the window before row i is filled.
      const int e = i + 1;
      for (int j = 0; j < m; ++j) {
        if (!hyp[j].is_ph) continue;
        Cell key = add(t.at(e, j + 1), 0, e, 0);
        // Ties keep the newer key so the smallest end point wins, matching
        // the reference scan below.
        if (!absorb_live[j] || !ord.better(absorb[j], key)) {
          absorb[j] = key;
          absorb_live[j] = 1;
        }
      }
    }
    for (int j = m - 1; j >= 0; --j) {
      Cell best{};
      bool have = false;
      auto consider = [&](const Cell& cand) {
        if (!have || ord.better(cand, best)) {
          best = cand;
          have = true;
        }
      };
      if (hyp[j].is_ph) {
        if (fast) {
          consider(add(absorb[j], 0, -i, 0));
        } else {
          Cell key{};
          bool have_key = false;
          for (int e = i + 1; e <= n; ++e) {
            Cell cand = add(t.at(e, j + 1), 0, e, 0);
            if (!have_key || ord.better(cand, key)) {
              key = cand;
              have_key = true;
            }
          }
          consider(add(key, 0, -i, 0));
        }
        consider(add(t.at(i + 1, j), 1, 0, 0));  // delete ref word
        consider(add(t.at(i, j + 1), 0, 1, 0));  // placeholder aligns to nothing
      } else {
        const bool eq = !ref[i].is_ph && ref[i].text == hyp[j].text;
        consider(add(t.at(i + 1, j + 1), eq ? 0 : 1, 0, eq ? 1 : 0));
        consider(add(t.at(i + 1, j), 1, 0, 0));  // delete
        consider(add(t.at(i, j + 1), 1, 0, 0));  // insert hyp word
      }
      t.at(i, j) = best;
    }
  }
}

// Walks the table from (0,0), emitting the first candidate whose value
// matches the cell exactly. Candidate order fixes the remaining ties:
// diagonal op, absorb with the smallest span, delete, insert. Because the
// check is exact integer equality on (units, ph, matches), the reference and
// fast tables reconstruct identical traces.
std::vector<AlignOp> reconstruct(const Table& t, const WordSeq& ref, const WordSeq& hyp) {
  const int n = ref.size();
  const int m = hyp.size();
  std::vector<AlignOp> ops;
  int i = 0, j = 0;
  while (i < n || j < m) {
    const Cell cur = t.at(i, j);
    if (j == m) {
      ops.push_back({OpKind::del, i, i + 1, -1});
      ++i;
      continue;
    }
    bool stepped = false;
    if (hyp[j].is_ph) {
      for (int e = i + 1; e <= n && !stepped; ++e) {
        if (cur == add(t.at(e, j + 1), 0, e - i, 0)) {
          ops.push_back({OpKind::ph_absorb, i, e, j});
          i = e;
          ++j;
          stepped = true;
        }
      }
      if (!stepped && i < n && cur == add(t.at(i + 1, j), 1, 0, 0)) {
        ops.push_back({OpKind::del, i, i + 1, -1});
        ++i;
        stepped = true;
      }
      if (!stepped && cur == add(t.at(i, j + 1), 0, 1, 0)) {
        ops.push_back({OpKind::ph_insert, i, i, j});
        ++j;
        stepped = true;
      }
    } else {
      if (i < n) {
        const bool eq = !ref[i].is_ph && ref[i].text == hyp[j].text;
        if (cur == add(t.at(i + 1, j + 1), eq ? 0 : 1, 0, eq ? 1 : 0)) {
          ops.push_back({eq ? OpKind::match : OpKind::substitute, i, i + 1, j});
          ++i;
          ++j;
          stepped = true;
        }
        if (!stepped && cur == add(t.at(i + 1, j), 1, 0, 0)) {
          ops.push_back({OpKind::del, i, i + 1, -1});
          ++i;
          stepped = true;
        }
      }
      if (!stepped && cur == add(t.at(i, j + 1), 1, 0, 0)) {
        ops.push_back({OpKind::insert_word, i, i, j});
        ++j;
        stepped = true;
      }
    }
    if (!stepped) fail(Errc::internal, "alignment reconstruction lost the optimum");
  }
  return ops;
}

void validate_reference(const WordSeq& ref) {
  if (ref.empty()) fail(Errc::empty_reference, "reference must contain at least one word");
  if (ref.has_placeholder())
    fail(Errc::ref_contains_placeholder, "reference must not contain placeholders");
}

AlignmentResult weighted_impl(const WordSeq& ref, const WordSeq& hyp, AlphaParam alpha,
                              bool fast) {
  validate_reference(ref);
  const CostOrder ord(alpha.value());
  Table t(ref.size(), hyp.size());
  fill(t, ref, hyp, ord, fast);

  const Cell root = t.at(0, 0);
  AlignmentResult out;
  out.unit_ops = root.units;
  out.ph_words = root.ph;
  out.matches = root.matches;
  out.cost = root.units + alpha.value() * root.ph;
  out.trace = reconstruct(t, ref, hyp);
  return out;
}

}  // namespace

WordSeq normalize_hypothesis(const WordSeq& raw) {
  WordSeq out;
  out.words.reserve(raw.words.size());
  for (const Word& w : raw.words) {
    if (w.is_ph && !out.words.empty() && out.words.back().is_ph) continue;
    out.words.push_back(w);
  }
  return out;
}

AlignmentResult weighted_edit_distance(const WordSeq& ref, const WordSeq& hyp,
                                       AlphaParam alpha) {
  return weighted_impl(ref, hyp, alpha, /*fast=*/false);
}

AlignmentResult weighted_edit_distance_fast(const WordSeq& ref, const WordSeq& hyp,
                                            AlphaParam alpha) {
  return weighted_impl(ref, hyp, alpha, /*fast=*/true);
}

WerAlignment wer_align(const WordSeq& ref, const WordSeq& hyp) {
  validate_reference(ref);
  if (hyp.has_placeholder())
    fail(Errc::placeholder_in_plain_alignment,
         "plain word alignment does not accept placeholders");

  // With no placeholder columns the weighted DP is the standard unit-cost
  // alignment; alpha never enters a comparison.
  AlignmentResult ar = weighted_impl(ref, hyp, AlphaParam(0.5), /*fast=*/true);
  WerAlignment out;
  out.trace = std::move(ar.trace);
  out.counts.ref_len = ref.size();
  for (const AlignOp& op : out.trace) {
    switch (op.kind) {
      case OpKind::match: ++out.counts.hits; break;
      case OpKind::substitute: ++out.counts.substitutions; break;
      case OpKind::del: ++out.counts.deletions; break;
      case OpKind::insert_word: ++out.counts.insertions; break;
      default: fail(Errc::internal, "placeholder op in plain alignment trace");
    }
  }
  return out;
}

}  // namespace ras
