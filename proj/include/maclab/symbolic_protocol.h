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

#ifndef MACLAB_SYMBOLIC_PROTOCOL_H_
#define MACLAB_SYMBOLIC_PROTOCOL_H_

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace maclab {

// Declaration order is the canonical clause order within an agent.
enum class Predicate { kState = 0, kUp = 1, kDn = 2, kAction = 3 };

std::string_view PredicateName(Predicate pred);

// Agent index 0 prints as "ue1"; the base station prints as "bs".
inline constexpr int kBsAgent = -1;
std::string AgentName(int agent);

struct Term {
  Predicate pred = Predicate::kState;
  int agent = 0;
  std::string symbol;

  auto operator<=>(const Term&) const = default;
};

std::string TermText(const Term& term);

struct Clause {
  double prob = 1.0;
  Term head;
  std::vector<Term> body;  // empty for facts
};

// Per-predicate symbol sets, shared by all agents.
struct Vocabulary {
  std::map<Predicate, std::set<std::string>> symbols;

  bool Contains(Predicate pred, const std::string& symbol) const;
  std::size_t Size() const;  // total symbol count over all predicates

  // States 0..buffer_cap, the three actions, and codewords m0..m{K-1} on
  // both message predicates.
  static Vocabulary Default(int codebook_size, int buffer_cap);
};

struct SymbolicProtocol {
  std::vector<Clause> clauses;  // canonical order; ids are positions
  Vocabulary vocabulary;
  std::string provenance;

  int NumAgents() const;  // 1 + largest UE index used by any clause
};

// Sorts clauses by (agent, predicate, head symbol, body) and body terms
// within each clause. Duplicate (head, body) pairs, probabilities outside
// [0, 1] and symbols outside the vocabulary raise kValidation.
void Canonicalize(SymbolicProtocol& protocol);

// Shortest decimal with at most six fractional digits.
std::string FormatProb(double p);
std::string ClauseText(const Clause& clause);

// Text form: "% provenance:" and "% vocab <pred>:" header comments followed
// by one clause per line in canonical order.
std::string Serialize(const SymbolicProtocol& protocol);
// Bytes of the clause lines alone (header comments excluded).
std::size_t ClauseBytes(const SymbolicProtocol& protocol);

// Parses clause text. Vocabulary comes from "% vocab" lines when present,
// otherwise from `fallback`; without either, states must be decimal, actions
// one of access/silence/discard and messages m<digits>. Throws SyntaxError
// on grammar violations and kVocabulary on unknown symbols.
SymbolicProtocol Parse(std::string_view text,
                       const std::optional<Vocabulary>& fallback = std::nullopt);

// Parses a single clause line (no trailing newline).
Clause ParseClause(std::string_view line);

std::optional<int> FindClause(const SymbolicProtocol& protocol,
                              const Clause& clause);

}  // namespace maclab

#endif  // MACLAB_SYMBOLIC_PROTOCOL_H_
