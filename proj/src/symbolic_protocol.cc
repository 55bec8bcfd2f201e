// Copyright 2026 The maclab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maclab/symbolic_protocol.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "maclab/error.h"
#include "maclab/mac_env.h"

namespace maclab {
namespace {

constexpr Predicate kAllPredicates[] = {Predicate::kState, Predicate::kUp,
                                        Predicate::kDn, Predicate::kAction};

std::optional<Predicate> PredicateFromName(std::string_view name) {
  for (Predicate p : kAllPredicates) {
    if (PredicateName(p) == name) return p;
  }
  return std::nullopt;
}

bool IsSymbolChar(char c) {
  return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
}

bool AllDigits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// Symbol shapes accepted when no explicit vocabulary is declared.
bool InDefaultDomain(Predicate pred, const std::string& symbol) {
  switch (pred) {
    case Predicate::kState:
      return AllDigits(symbol);
    case Predicate::kAction:
      return UeActionFromName(symbol).has_value();
    case Predicate::kUp:
    case Predicate::kDn:
      return symbol.size() > 1 && symbol[0] == 'm' &&
             AllDigits(std::string_view(symbol).substr(1));
  }
  return false;
}

class Cursor {
 public:
  Cursor(std::string_view text, int line) : text_(text), line_(line) {}

  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return AtEnd() ? '\0' : text_[pos_]; }

  [[noreturn]] void Error(const std::string& message) const {
    throw SyntaxError(line_, static_cast<int>(pos_) + 1, message);
  }

  void Expect(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) != literal) {
      Error("expected '" + std::string(literal) + "'");
    }
    pos_ += literal.size();
  }

  bool Accept(std::string_view literal) {
    if (text_.substr(pos_, literal.size()) != literal) return false;
    pos_ += literal.size();
    return true;
  }

  std::string_view TakeWhile(bool (*pred)(char)) {
    const std::size_t start = pos_;
    while (!AtEnd() && pred(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  double Prob() {
    const std::size_t start = pos_;
    const auto whole = TakeWhile([](char c) { return c >= '0' && c <= '9'; });
    if (whole.empty()) Error("expected a probability");
    if (Accept(".")) {
      const auto frac = TakeWhile([](char c) { return c >= '0' && c <= '9'; });
      if (frac.empty() || frac.size() > 6) {
        Error("probability needs 1 to 6 fractional digits");
      }
    }
    const double p = std::stod(std::string(text_.substr(start, pos_ - start)));
    if (p > 1.0) {
      pos_ = start;
      Error("probability above 1");
    }
    return p;
  }

  Term ParseTerm() {
    Term term;
    const std::size_t start = pos_;
    const auto name = TakeWhile([](char c) { return c >= 'a' && c <= 'z'; });
    const auto pred = PredicateFromName(name);
    if (!pred) {
      pos_ = start;
      Error("expected one of state, up, dn, action");
    }
    term.pred = *pred;
    Expect("(");
    const std::size_t agent_start = pos_;
    if (Accept("bs")) {
      term.agent = kBsAgent;
    } else if (Accept("ue")) {
      const auto digits = TakeWhile([](char c) { return c >= '0' && c <= '9'; });
      if (digits.empty() || std::stoi(std::string(digits)) < 1) {
        pos_ = agent_start;
        Error("expected an agent ue<digits> (from ue1) or bs");
      }
      term.agent = std::stoi(std::string(digits)) - 1;
    } else {
      Error("expected an agent ue<digits> or bs");
    }
    Expect(",");
    const auto symbol = TakeWhile(IsSymbolChar);
    if (symbol.empty()) Error("expected a symbol [a-z0-9_]+");
    term.symbol = std::string(symbol);
    Expect(")");
    return term;
  }

  std::size_t pos() const { return pos_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

Clause ParseClauseAt(std::string_view line, int line_number) {
  Cursor cursor(line, line_number);
  Clause clause;
  clause.prob = cursor.Prob();
  cursor.Expect("::");
  clause.head = cursor.ParseTerm();
  if (cursor.Accept(" :- ")) {
    clause.body.push_back(cursor.ParseTerm());
    while (cursor.Accept(", ")) clause.body.push_back(cursor.ParseTerm());
  }
  if (cursor.AtEnd()) cursor.Error("missing terminal '.'");
  cursor.Expect(".");
  if (!cursor.AtEnd()) cursor.Error("unexpected text after '.'");
  return clause;
}

bool ClauseLess(const Clause& a, const Clause& b) {
  return std::tie(a.head.agent, a.head.pred, a.head.symbol, a.body) <
         std::tie(b.head.agent, b.head.pred, b.head.symbol, b.body);
}

bool SameRule(const Clause& a, const Clause& b) {
  return a.head == b.head && a.body == b.body;
}

void CheckVocabulary(const Clause& clause, const Vocabulary& vocab) {
  auto check = [&](const Term& t) {
    if (!vocab.Contains(t.pred, t.symbol)) {
      Fail(ErrorKind::kVocabulary,
           "symbol '" + t.symbol + "' is not in the " +
               std::string(PredicateName(t.pred)) + " vocabulary (term " +
               TermText(t) + ")");
    }
  };
  check(clause.head);
  for (const Term& t : clause.body) check(t);
}

}  // namespace

std::string_view PredicateName(Predicate pred) {
  switch (pred) {
    case Predicate::kState:
      return "state";
    case Predicate::kUp:
      return "up";
    case Predicate::kDn:
      return "dn";
    case Predicate::kAction:
      return "action";
  }
  return "?";
}

std::string AgentName(int agent) {
  return agent == kBsAgent ? "bs" : "ue" + std::to_string(agent + 1);
}

std::string TermText(const Term& term) {
  return std::string(PredicateName(term.pred)) + "(" + AgentName(term.agent) +
         "," + term.symbol + ")";
}

bool Vocabulary::Contains(Predicate pred, const std::string& symbol) const {
  const auto it = symbols.find(pred);
  return it != symbols.end() && it->second.count(symbol) > 0;
}

std::size_t Vocabulary::Size() const {
  std::size_t n = 0;
  for (const auto& [pred, set] : symbols) n += set.size();
  return n;
}

Vocabulary Vocabulary::Default(int codebook_size, int buffer_cap) {
  Vocabulary v;
  for (int s = 0; s <= buffer_cap; ++s) {
    v.symbols[Predicate::kState].insert(std::to_string(s));
  }
  for (int a = 0; a < kNumUeActions; ++a) {
    v.symbols[Predicate::kAction].insert(
        std::string(UeActionName(static_cast<UeAction>(a))));
  }
  for (int k = 0; k < codebook_size; ++k) {
    v.symbols[Predicate::kUp].insert("m" + std::to_string(k));
    v.symbols[Predicate::kDn].insert("m" + std::to_string(k));
  }
  return v;
}

int SymbolicProtocol::NumAgents() const {
  int n = 0;
  for (const Clause& c : clauses) {
    n = std::max(n, c.head.agent + 1);
    for (const Term& t : c.body) n = std::max(n, t.agent + 1);
  }
  return n;
}

void Canonicalize(SymbolicProtocol& protocol) {
  for (Clause& c : protocol.clauses) {
    if (!(c.prob >= 0.0 && c.prob <= 1.0)) {
      Fail(ErrorKind::kValidation,
           "clause " + ClauseText(c) + " has probability outside [0, 1]");
    }
    if (c.head.pred == Predicate::kState) {
      Fail(ErrorKind::kValidation,
           "clause " + ClauseText(c) + " derives a state term");
    }
    for (const Term& t : c.body) {
      if (t.pred == Predicate::kAction) {
        Fail(ErrorKind::kValidation,
             "clause " + ClauseText(c) + " has an action term in its body");
      }
    }
    CheckVocabulary(c, protocol.vocabulary);
    std::sort(c.body.begin(), c.body.end());
  }
  std::stable_sort(protocol.clauses.begin(), protocol.clauses.end(),
                   ClauseLess);
  for (std::size_t i = 1; i < protocol.clauses.size(); ++i) {
    if (SameRule(protocol.clauses[i - 1], protocol.clauses[i])) {
      Fail(ErrorKind::kValidation,
           "duplicate clause " + ClauseText(protocol.clauses[i]));
    }
  }
}

std::string FormatProb(double p) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", p);
  std::string s = buf;
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string ClauseText(const Clause& clause) {
  std::string s = FormatProb(clause.prob) + "::" + TermText(clause.head);
  for (std::size_t i = 0; i < clause.body.size(); ++i) {
    s += i == 0 ? " :- " : ", ";
    s += TermText(clause.body[i]);
  }
  return s + ".";
}

std::string Serialize(const SymbolicProtocol& protocol) {
  std::ostringstream out;
  if (!protocol.provenance.empty()) {
    out << "% provenance: " << protocol.provenance << "\n";
  }
  for (Predicate p : kAllPredicates) {
    const auto it = protocol.vocabulary.symbols.find(p);
    if (it == protocol.vocabulary.symbols.end() || it->second.empty()) continue;
    out << "% vocab " << PredicateName(p) << ":";
    for (const std::string& s : it->second) out << ' ' << s;
    out << "\n";
  }
  for (const Clause& c : protocol.clauses) out << ClauseText(c) << "\n";
  return out.str();
}

std::size_t ClauseBytes(const SymbolicProtocol& protocol) {
  std::size_t bytes = 0;
  for (const Clause& c : protocol.clauses) bytes += ClauseText(c).size() + 1;
  return bytes;
}

Clause ParseClause(std::string_view line) { return ParseClauseAt(line, 1); }

SymbolicProtocol Parse(std::string_view text,
                       const std::optional<Vocabulary>& fallback) {
  SymbolicProtocol protocol;
  Vocabulary declared;
  bool has_declared = false;
  std::vector<std::pair<int, Clause>> parsed;

  int line_number = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    ++line_number;
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;

    if (!line.empty() && line.front() == '%') {
      constexpr std::string_view kProvenance = "% provenance: ";
      constexpr std::string_view kVocab = "% vocab ";
      if (line.substr(0, kProvenance.size()) == kProvenance) {
        protocol.provenance = std::string(line.substr(kProvenance.size()));
      } else if (line.substr(0, kVocab.size()) == kVocab) {
        const auto rest = line.substr(kVocab.size());
        const auto colon = rest.find(':');
        const auto pred = colon == std::string_view::npos
                              ? std::nullopt
                              : PredicateFromName(rest.substr(0, colon));
        if (!pred) {
          throw SyntaxError(line_number, static_cast<int>(kVocab.size()) + 1,
                            "vocab line needs '<predicate>:'");
        }
        std::istringstream words{std::string(rest.substr(colon + 1))};
        auto& set = declared.symbols[*pred];
        for (std::string w; words >> w;) set.insert(w);
        has_declared = true;
      }
      continue;
    }
    parsed.emplace_back(line_number, ParseClauseAt(line, line_number));
  }

  if (has_declared) {
    protocol.vocabulary = std::move(declared);
  } else if (fallback) {
    protocol.vocabulary = *fallback;
  } else {
    for (const auto& [line, clause] : parsed) {
      auto add = [&](const Term& t) {
        if (!InDefaultDomain(t.pred, t.symbol)) {
          Fail(ErrorKind::kVocabulary,
               "line " + std::to_string(line) + ": symbol '" + t.symbol +
                   "' is not a valid " + std::string(PredicateName(t.pred)) +
                   " symbol");
        }
        protocol.vocabulary.symbols[t.pred].insert(t.symbol);
      };
      add(clause.head);
      for (const Term& t : clause.body) add(t);
    }
  }
  for (const auto& [line, clause] : parsed) {
    try {
      CheckVocabulary(clause, protocol.vocabulary);
    } catch (const Error& e) {
      Fail(ErrorKind::kVocabulary,
           "line " + std::to_string(line) + ": " + e.what());
    }
    protocol.clauses.push_back(clause);
  }
  Canonicalize(protocol);
  return protocol;
}

std::optional<int> FindClause(const SymbolicProtocol& protocol,
                              const Clause& clause) {
  Clause probe = clause;
  std::sort(probe.body.begin(), probe.body.end());
  for (std::size_t i = 0; i < protocol.clauses.size(); ++i) {
    if (SameRule(protocol.clauses[i], probe)) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace maclab
