#pragma once

// Words in a direct product of free groups F_{s1} x ... x F_{sm}.
//
// Generators are x_{i,j} with i the factor and j the index inside the factor.
// Letters from different factors commute; letters inside one factor satisfy
// no relation besides x x^{-1} = e. The identity is the empty word.

#include <algorithm>
#include <charconv>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace leinert {

class MalformedWord : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The tuple (s_1, ..., s_m) describing F_{s1} x ... x F_{sm}.
class GroupSignature {
 public:
  explicit GroupSignature(std::vector<unsigned> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("group signature needs at least one factor");
    offsets_.reserve(factors_.size());
    unsigned total = 0;
    for (unsigned s : factors_) {
      if (s == 0) throw std::invalid_argument("every free factor needs rank >= 1");
      offsets_.push_back(total);
      total += s;
    }
    total_ = total;
  }

  /// Accepts "F2xF2", "F1xF1xF1", "Z3" (alias for F1xF1xF1) and "F4".
  static GroupSignature parse(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("invalid group signature '" + std::string(text) + "'"); };
    if (text.empty()) throw fail();
    auto read_uint = [&](std::string_view digits) {
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) throw fail();
      return value;
    };
    if (text.front() == 'Z' || text.front() == 'z') {
      unsigned m = read_uint(text.substr(1));
      if (m == 0) throw fail();
      return GroupSignature(std::vector<unsigned>(m, 1u));
    }
    std::vector<unsigned> factors;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t next = text.find_first_of("xX", pos);
      std::string_view part = text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos);
      if (part.size() < 2 || (part.front() != 'F' && part.front() != 'f')) throw fail();
      factors.push_back(read_uint(part.substr(1)));
      if (next == std::string_view::npos) break;
      pos = next + 1;
    }
    try {
      return GroupSignature(std::move(factors));
    } catch (const std::invalid_argument&) {
      throw fail();
    }
  }

  std::size_t factor_count() const noexcept { return factors_.size(); }
  unsigned rank(std::size_t factor) const { return factors_.at(factor); }
  std::span<const unsigned> factors() const noexcept { return factors_; }

  /// s = |X|, the total number of generators.
  unsigned total_generators() const noexcept { return total_; }

  /// Dense index in [0, s) of generator x_{factor, gen}.
  unsigned base_index(std::size_t factor, unsigned gen) const { return offsets_.at(factor) + gen; }

  std::pair<std::uint16_t, std::uint16_t> base_at(unsigned index) const {
    if (index >= total_) throw std::out_of_range("generator index out of range");
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    auto factor = static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);
    return {static_cast<std::uint16_t>(factor), static_cast<std::uint16_t>(index - offsets_[factor])};
  }

  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (i) out += 'x';
      out += 'F' + std::to_string(factors_[i]);
    }
    return out;
  }

  friend bool operator==(const GroupSignature& a, const GroupSignature& b) { return a.factors_ == b.factors_; }

 private:
  std::vector<unsigned> factors_;
  std::vector<unsigned> offsets_;
  unsigned total_ = 0;
};

/// x_{factor,gen}^{exp}; factor and gen are 0-based, exp is -1 or +1.
struct Letter {
  std::uint16_t factor = 0;
  std::uint16_t gen = 0;
  std::int8_t exp = 1;

  constexpr Letter inverse() const noexcept { return {factor, gen, static_cast<std::int8_t>(-exp)}; }
  constexpr bool same_base(const Letter& o) const noexcept { return factor == o.factor && gen == o.gen; }
  constexpr bool commutes_with(const Letter& o) const noexcept { return factor != o.factor || same_base(o); }

  friend constexpr auto operator<=>(const Letter&, const Letter&) = default;
};

constexpr Letter inverse_of(Letter l) noexcept { return l.inverse(); }

inline bool in_range(const GroupSignature& sig, const Letter& l) noexcept {
  return l.factor < sig.factor_count() && l.gen < sig.factors()[l.factor] && (l.exp == 1 || l.exp == -1);
}

/// Dense code 2*base + (exp > 0); preserves the (factor, gen, exp) order.
inline std::uint32_t encode(const GroupSignature& sig, const Letter& l) {
  return 2 * sig.base_index(l.factor, l.gen) + (l.exp > 0 ? 1u : 0u);
}

inline Letter decode(const GroupSignature& sig, std::uint32_t code) {
  auto [f, g] = sig.base_at(code / 2);
  return {f, g, static_cast<std::int8_t>(code % 2 ? 1 : -1)};
}

inline std::string format_letter(const Letter& l) {
  std::string out = "f" + std::to_string(l.factor + 1) + "g" + std::to_string(l.gen + 1);
  if (l.exp < 0) out += '\'';
  return out;
}

inline Letter parse_letter(const GroupSignature& sig, std::string_view tok) {
  auto fail = [&] { return MalformedWord("malformed letter '" + std::string(tok) + "'"); };
  std::int8_t exp = 1;
  if (!tok.empty() && tok.back() == '\'') {
    exp = -1;
    tok.remove_suffix(1);
  }
  if (tok.size() < 4 || tok.front() != 'f') throw fail();
  auto g_pos = tok.find('g');
  if (g_pos == std::string_view::npos) throw fail();
  unsigned f = 0, g = 0;
  auto fs = tok.substr(1, g_pos - 1), gs = tok.substr(g_pos + 1);
  auto r1 = std::from_chars(fs.data(), fs.data() + fs.size(), f);
  auto r2 = std::from_chars(gs.data(), gs.data() + gs.size(), g);
  if (r1.ec != std::errc{} || r1.ptr != fs.data() + fs.size() || r2.ec != std::errc{} ||
      r2.ptr != gs.data() + gs.size() || f == 0 || g == 0)
    throw fail();
  Letter l{static_cast<std::uint16_t>(f - 1), static_cast<std::uint16_t>(g - 1), exp};
  if (!in_range(sig, l)) throw MalformedWord("letter '" + std::string(tok) + "' out of range for " + sig.to_string());
  return l;
}

class Word {
 public:
  explicit Word(GroupSignature sig, std::vector<Letter> letters = {})
      : sig_(std::move(sig)), letters_(std::move(letters)) {
    for (const auto& l : letters_)
      if (!in_range(sig_, l)) throw MalformedWord("letter " + format_letter(l) + " out of range for " + sig_.to_string());
  }

  /// Space separated letters such as "f1g1' f1g2"; "" and "e" give the empty word.
  static Word parse(const GroupSignature& sig, std::string_view text) {
    std::vector<Letter> letters;
    std::size_t pos = 0;
    while (pos < text.size()) {
      while (pos < text.size() && text[pos] == ' ') ++pos;
      if (pos >= text.size()) break;
      std::size_t end = text.find(' ', pos);
      auto tok = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
      if (tok != "e") letters.push_back(parse_letter(sig, tok));
      pos = end == std::string_view::npos ? text.size() : end;
    }
    return Word(sig, std::move(letters));
  }

  const GroupSignature& signature() const noexcept { return sig_; }
  std::span<const Letter> letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool empty() const noexcept { return letters_.empty(); }
  const Letter& operator[](std::size_t i) const { return letters_[i]; }

  Word slice(std::size_t pos, std::size_t len) const {
    return Word(sig_, std::vector<Letter>(letters_.begin() + static_cast<std::ptrdiff_t>(pos),
                                          letters_.begin() + static_cast<std::ptrdiff_t>(pos + len)));
  }

  /// Concatenation u*v.
  friend Word operator*(const Word& u, const Word& v) {
    if (!(u.sig_ == v.sig_)) throw std::invalid_argument("words from different groups");
    std::vector<Letter> out(u.letters_);
    out.insert(out.end(), v.letters_.begin(), v.letters_.end());
    return Word(u.sig_, std::move(out));
  }

  std::string to_string() const {
    if (letters_.empty()) return "e";
    std::string out;
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      if (i) out += ' ';
      out += format_letter(letters_[i]);
    }
    return out;
  }

  friend bool operator==(const Word& a, const Word& b) { return a.sig_ == b.sig_ && a.letters_ == b.letters_; }

 private:
  GroupSignature sig_;
  std::vector<Letter> letters_;
};

/// Letter of a single free factor.
struct FreeLetter {
  std::uint16_t gen = 0;
  std::int8_t exp = 1;
  friend constexpr auto operator<=>(const FreeLetter&, const FreeLetter&) = default;
};

/// Tuple of freely reduced factor projections. Right multiplication by a
/// letter is a push or a cancelling pop on that factor's stack.
class NormalForm {
 public:
  NormalForm() = default;
  explicit NormalForm(std::size_t factors) : per_factor_(factors) {}

  void multiply(const Letter& l) {
    auto& stack = per_factor_[l.factor];
    if (!stack.empty() && stack.back().gen == l.gen && stack.back().exp == -l.exp) {
      stack.pop_back();
      --length_;
    } else {
      stack.push_back({l.gen, l.exp});
      ++length_;
    }
  }

  NormalForm times(const Letter& l) const {
    NormalForm out(*this);
    out.multiply(l);
    return out;
  }

  bool is_identity() const noexcept { return length_ == 0; }
  /// Sum of the reduced lengths of all factor projections.
  std::size_t length() const noexcept { return length_; }
  std::size_t factor_count() const noexcept { return per_factor_.size(); }
  std::span<const FreeLetter> factor(std::size_t i) const { return per_factor_.at(i); }

  friend bool operator==(const NormalForm& a, const NormalForm& b) { return a.per_factor_ == b.per_factor_; }
  friend auto operator<=>(const NormalForm& a, const NormalForm& b) { return a.per_factor_ <=> b.per_factor_; }

  std::size_t hash() const noexcept {
    std::size_t h = 0x9e3779b97f4a7c15ull ^ per_factor_.size();
    for (const auto& stack : per_factor_) {
      h = h * 1099511628211ull + 0x2545f491u;
      for (const auto& fl : stack) h = (h ^ (std::size_t(fl.gen) * 2 + (fl.exp > 0))) * 1099511628211ull;
    }
    return h;
  }

 private:
  std::vector<std::vector<FreeLetter>> per_factor_;
  std::size_t length_ = 0;
};

struct NormalFormHash {
  std::size_t operator()(const NormalForm& nf) const noexcept { return nf.hash(); }
};

inline NormalForm normal_form(const GroupSignature& sig, std::span<const Letter> letters) {
  NormalForm nf(sig.factor_count());
  for (const auto& l : letters) {
    if (!in_range(sig, l)) throw MalformedWord("letter " + format_letter(l) + " out of range for " + sig.to_string());
    nf.multiply(l);
  }
  return nf;
}

inline NormalForm normal_form(const Word& w) { return normal_form(w.signature(), w.letters()); }

inline bool reduces_to_identity(const GroupSignature& sig, std::span<const Letter> letters) {
  return normal_form(sig, letters).is_identity();
}

enum class StringKind { Valid, Reduced, Neither };

struct StringClass {
  StringKind kind = StringKind::Neither;
  /// For Valid strings: the bases x_1, ..., x_{2n} of x_1^{-1} x_2 ... x_{2n-1}^{-1} x_{2n}.
  std::vector<Letter> bases;
};

/// Even length n >= 2, exponents -1,+1,-1,..., adjacent bases distinct.
inline bool is_valid_string(std::span<const Letter> w) noexcept {
  if (w.empty() || w.size() % 2) return false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].exp != (i % 2 == 0 ? -1 : 1)) return false;
    if (i + 1 < w.size() && w[i].same_base(w[i + 1])) return false;
  }
  return true;
}

/// No adjacent cancelling pair x^{e} x^{-e}.
inline bool satisfies_reduced_condition(std::span<const Letter> w) noexcept {
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (w[i].same_base(w[i + 1]) && w[i].exp != w[i + 1].exp) return false;
  return true;
}

/// Valid takes precedence over Reduced. The empty string is Neither.
inline StringClass classify_string(std::span<const Letter> w) {
  StringClass out;
  if (w.empty()) return out;
  if (is_valid_string(w)) {
    out.kind = StringKind::Valid;
    out.bases.reserve(w.size());
    for (auto l : w) out.bases.push_back({l.factor, l.gen, 1});
  } else if (satisfies_reduced_condition(w)) {
    out.kind = StringKind::Reduced;
  }
  return out;
}

inline StringClass classify_string(const Word& w) { return classify_string(w.letters()); }

inline Word conjugate(const Word& w) {
  std::vector<Letter> out;
  out.reserve(w.size());
  for (auto l : w.letters()) out.push_back(l.inverse());
  return Word(w.signature(), std::move(out));
}

inline bool is_bad(const GroupSignature& sig, std::span<const Letter> w) {
  if (classify_string(w).kind == StringKind::Neither) return false;
  return reduces_to_identity(sig, w);
}

inline bool is_bad(const Word& w) { return is_bad(w.signature(), w.letters()); }

/// All contiguous runs, ordered by start position then length.
inline std::vector<Word> substrings(const Word& w) {
  std::vector<Word> out;
  out.reserve(w.size() * (w.size() + 1) / 2);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t len = 1; i + len <= w.size(); ++len) out.push_back(w.slice(i, len));
  return out;
}

/// True when some proper contiguous substring of w is bad.
inline bool has_proper_bad_substring(const GroupSignature& sig, std::span<const Letter> w) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    NormalForm nf(sig.factor_count());
    for (std::size_t j = i; j < w.size(); ++j) {
      nf.multiply(w[j]);
      std::size_t len = j - i + 1;
      if (len == w.size()) break;
      if (nf.is_identity() && classify_string(w.subspan(i, len)).kind != StringKind::Neither) return true;
    }
  }
  return false;
}

inline bool is_kernel(const GroupSignature& sig, std::span<const Letter> w) {
  return is_bad(sig, w) && !has_proper_bad_substring(sig, w);
}

inline bool is_kernel(const Word& w) { return is_kernel(w.signature(), w.letters()); }

/// The size() rotations of w starting with w itself; {w} for the empty word.
inline std::vector<Word> cyclic_rotations(const Word& w) {
  if (w.empty()) return {w};
  std::vector<Word> out;
  out.reserve(w.size());
  for (std::size_t r = 0; r < w.size(); ++r) {
    std::vector<Letter> rot(w.letters().begin() + static_cast<std::ptrdiff_t>(r), w.letters().end());
    rot.insert(rot.end(), w.letters().begin(), w.letters().begin() + static_cast<std::ptrdiff_t>(r));
    out.emplace_back(w.signature(), std::move(rot));
  }
  return out;
}

/// Exponent sum per generator, indexed by GroupSignature::base_index.
inline std::vector<int> abelianization(const GroupSignature& sig, std::span<const Letter> w) {
  std::vector<int> out(sig.total_generators(), 0);
  for (auto l : w) out[sig.base_index(l.factor, l.gen)] += l.exp;
  return out;
}

}  // namespace leinert
