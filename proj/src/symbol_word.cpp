#include "gctree/symbol_word.hpp"

#include <algorithm>

#include "gctree/error.hpp"

namespace gct {

namespace {

void check_symbols(const std::vector<Symbol>& s) {
  for (Symbol c : s) {
    if (c == 0) throw Error(ErrorKind::InvalidArgument, "symbols are numbered from 1");
  }
}

}  // namespace

SymbolWord::SymbolWord(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) { check_symbols(symbols_); }

SymbolWord SymbolWord::periodic(std::vector<Symbol> preperiod, std::vector<Symbol> period) {
  if (period.empty()) throw Error(ErrorKind::InvalidArgument, "periodic tail must have period >= 1");
  check_symbols(preperiod);
  check_symbols(period);
  // Primitive period.
  const std::size_t q = period.size();
  for (std::size_t p = 1; p < q; ++p) {
    if (q % p != 0) continue;
    bool repeats = true;
    for (std::size_t i = p; i < q && repeats; ++i) repeats = period[i] == period[i - p];
    if (repeats) {
      period.resize(p);
      break;
    }
  }
  // Absorb trailing preperiod symbols into the cycle.
  while (!preperiod.empty() && preperiod.back() == period.back()) {
    preperiod.pop_back();
    std::rotate(period.rbegin(), period.rbegin() + 1, period.rend());
  }
  SymbolWord w;
  w.symbols_ = std::move(preperiod);
  w.symbols_.insert(w.symbols_.end(), period.begin(), period.end());
  w.period_ = period.size();
  return w;
}

SymbolWord SymbolWord::parse(std::string_view text) {
  std::vector<Symbol> pre, per;
  bool in_period = false;
  bool saw_period = false;
  const bool commas = text.find(',') != std::string_view::npos;
  std::size_t i = 0;
  auto push = [&](unsigned v) {
    if (v == 0 || v > 255) throw Error(ErrorKind::InvalidArgument, "symbol out of range in word '" + std::string(text) + "'");
    (in_period ? per : pre).push_back(static_cast<Symbol>(v));
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == '(') {
      if (in_period || saw_period) throw Error(ErrorKind::InvalidArgument, "malformed word");
      in_period = true;
      saw_period = true;
      ++i;
    } else if (c == ')') {
      if (!in_period) throw Error(ErrorKind::InvalidArgument, "malformed word");
      in_period = false;
      ++i;
      if (i != text.size()) throw Error(ErrorKind::InvalidArgument, "periodic block must end the word");
    } else if (c == ',' || c == ' ') {
      ++i;
    } else if (c >= '0' && c <= '9') {
      if (commas) {
        unsigned v = 0;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') v = v * 10 + static_cast<unsigned>(text[i++] - '0');
        push(v);
      } else {
        push(static_cast<unsigned>(c - '0'));
        ++i;
      }
    } else {
      throw Error(ErrorKind::InvalidArgument, "unexpected character in word '" + std::string(text) + "'");
    }
  }
  if (in_period) throw Error(ErrorKind::InvalidArgument, "unterminated periodic block");
  if (saw_period) return periodic(std::move(pre), std::move(per));
  return SymbolWord(std::move(pre));
}

Symbol SymbolWord::at(std::size_t i) const {
  if (i < symbols_.size()) return symbols_[i];
  if (!is_periodic()) throw Error(ErrorKind::DepthUnavailable, "index beyond a finite word");
  const std::size_t pre = preperiod();
  return symbols_[pre + (i - pre) % period_];
}

std::vector<Symbol> SymbolWord::prefix(std::size_t n) const {
  std::vector<Symbol> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(at(i));
  return out;
}

SymbolWord SymbolWord::shifted(std::size_t k) const {
  if (!is_periodic()) {
    if (k > symbols_.size()) throw Error(ErrorKind::DepthUnavailable, "shift beyond a finite word");
    return SymbolWord(std::vector<Symbol>(symbols_.begin() + static_cast<std::ptrdiff_t>(k), symbols_.end()));
  }
  const std::size_t pre = preperiod();
  std::vector<Symbol> new_pre;
  for (std::size_t i = k; i < pre; ++i) new_pre.push_back(symbols_[i]);
  std::vector<Symbol> cycle;
  const std::size_t start = k > pre ? k : pre;
  for (std::size_t i = 0; i < period_; ++i) cycle.push_back(at(start + i));
  return periodic(std::move(new_pre), std::move(cycle));
}

Symbol SymbolWord::max_symbol() const {
  return symbols_.empty() ? Symbol{0} : *std::max_element(symbols_.begin(), symbols_.end());
}

std::string word_string(const std::vector<Symbol>& symbols) {
  const bool wide = std::any_of(symbols.begin(), symbols.end(), [](Symbol s) { return s > 9; });
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (wide && i) out += ',';
    out += std::to_string(static_cast<unsigned>(symbols[i]));
  }
  return out;
}

std::string SymbolWord::to_string() const {
  if (!is_periodic()) return word_string(symbols_);
  const bool wide = max_symbol() > 9;
  const std::size_t pre = preperiod();
  std::vector<Symbol> head(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(pre));
  std::vector<Symbol> cycle(symbols_.begin() + static_cast<std::ptrdiff_t>(pre), symbols_.end());
  std::string out = word_string(head);
  if (wide && !head.empty()) out += ',';
  out += '(' + word_string(cycle) + ')';
  return out;
}

}  // namespace gct
