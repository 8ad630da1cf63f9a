#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isslab/common.hpp"

namespace isslab::lattice {

// Stability-property identifiers known to the knowledge base.
const std::vector<std::string>& atom_ids();
bool is_atom(const std::string& id);

enum class ContextFlag {
    General,
    FiniteDim,
    Linear,
    SemilinearDiamond,
    NoInput,
    BiLipschitz,
};

using ContextSet = std::set<ContextFlag>;

std::string format_context(const ContextSet& ctx);
ContextSet parse_context(const std::string& text);  // flags joined with '+'

struct Rule {
    std::set<std::string> premises;
    std::set<std::string> conclusions;
    ContextSet context;
    std::string location;  // stable rule identifier
    std::string quote;     // formal statement of the implication
};

struct NonImplication {
    std::set<std::string> premises;
    std::string non_conclusion;
    std::string witness;  // catalog system id or named counterexample
    std::string quote;
};

struct Deduction {
    std::string atom;
    std::vector<std::size_t> trace;  // rule indices; empty = given fact
};

struct KnowledgeBase {
    std::vector<Rule> rules;
    std::vector<NonImplication> non_implications;
};

// Parse the rule text format, one entry per line:
//   CTX: A & B => C, D @ "location" | "quote"
//   CTX: A & B !=> C @ witness:SystemId | "quote"
// CTX is one or more flags joined with '+'; '#' starts a comment line.
KnowledgeBase load_rules(const std::string& text);

// The built-in seed rule set shipped with the library.
const std::string& builtin_seed_text();
const KnowledgeBase& builtin_kb();

// Least fixed point of forward chaining over the rules applicable in the
// given context; every derived atom carries a breadth-first minimal trace.
std::map<std::string, Deduction> closure(const KnowledgeBase& kb,
                                         const std::set<std::string>& facts,
                                         const ContextSet& context);

enum class QueryStatus { DerivedYes, BlockedNo, Unknown };

struct QueryResult {
    QueryStatus status = QueryStatus::Unknown;
    std::optional<Deduction> derivation;       // set for DerivedYes
    std::optional<NonImplication> blocker;     // set for BlockedNo
};

QueryResult query(const KnowledgeBase& kb, const std::set<std::string>& facts,
                  const std::string& target, const ContextSet& context);

struct Conflict {
    std::string atom;
    Deduction derivation;
};

// Atoms claimed false that the rules derive from the atoms claimed true.
std::vector<Conflict> consistency_check(const KnowledgeBase& kb,
                                        const std::set<std::string>& witnessed_true,
                                        const std::set<std::string>& witnessed_false,
                                        const ContextSet& context);

// Re-derive a deduction by applying its cited rules in order; true when the
// final step concludes the deduction's atom.
bool replay_trace(const KnowledgeBase& kb, const std::set<std::string>& facts,
                  const Deduction& deduction);

}  // namespace isslab::lattice
