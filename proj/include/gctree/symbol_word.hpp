#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace gct {

using Symbol = std::uint8_t;

/// Finite or eventually periodic word over {1..d}. Periodic words are kept in
/// canonical form (shortest preperiod, primitive period), so equality of the
/// stored form is equality of the infinite expansions.
class SymbolWord {
 public:
  SymbolWord() = default;
  explicit SymbolWord(std::vector<Symbol> symbols);
  static SymbolWord periodic(std::vector<Symbol> preperiod, std::vector<Symbol> period);
  /// "1212" (finite) or "1(21)" (preperiod 1, period 21); symbols above 9 use
  /// comma separation, e.g. "1,12,(3,4)".
  static SymbolWord parse(std::string_view text);

  bool is_periodic() const { return period_ > 0; }
  /// Number of stored symbols: the finite length, or preperiod + period.
  std::size_t stored_size() const { return symbols_.size(); }
  std::size_t preperiod() const { return is_periodic() ? symbols_.size() - period_ : symbols_.size(); }
  std::size_t period() const { return period_; }
  const std::vector<Symbol>& symbols() const { return symbols_; }

  /// Symbol at position i of the (possibly infinite) expansion.
  Symbol at(std::size_t i) const;
  /// First n symbols of the expansion.
  std::vector<Symbol> prefix(std::size_t n) const;
  /// Shift by k positions.
  SymbolWord shifted(std::size_t k) const;
  Symbol max_symbol() const;

  std::string to_string() const;

  friend bool operator==(const SymbolWord& a, const SymbolWord& b) {
    return a.period_ == b.period_ && a.symbols_ == b.symbols_;
  }

 private:
  std::vector<Symbol> symbols_;
  std::size_t period_ = 0;
};

std::string word_string(const std::vector<Symbol>& symbols);

}  // namespace gct
