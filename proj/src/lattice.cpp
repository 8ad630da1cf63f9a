#include "isslab/lattice.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace isslab::lattice {

namespace {

const std::vector<std::string> kAtoms = {
    "ISS",     "LISS",    "sISS",   "UAG",     "sAG",     "AG",      "ULIM",
    "sLIM",    "LIM",     "UGS",    "ULS",     "UGB",     "BRS",     "CEP",
    "FC",      "ISS_LF",  "ncISS_LF", "0-UGAS", "0-UAS",  "0-GAS",   "0-UGATT",
    "0-GATT",  "0-UGS",   "0-ULS",  "0-LIM",   "0-ULIM",  "LF_coercive",
    "LF_noncoercive",
};

const std::vector<std::pair<std::string, ContextFlag>> kFlags = {
    {"General", ContextFlag::General},
    {"FiniteDim", ContextFlag::FiniteDim},
    {"Linear", ContextFlag::Linear},
    {"SemilinearDiamond", ContextFlag::SemilinearDiamond},
    {"NoInput", ContextFlag::NoInput},
    {"BiLipschitz", ContextFlag::BiLipschitz},
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = s.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(s.substr(pos));
            return out;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + sep.size();
    }
}

void require_atom(const std::string& id, int line) {
    if (!is_atom(id))
        throw ParseError("unknown atom '" + id + "'", line);
}

std::string unquote(const std::string& s, int line) {
    std::string t = trim(s);
    if (t.size() < 2 || t.front() != '"' || t.back() != '"')
        throw ParseError("expected a quoted string, got '" + t + "'", line);
    return t.substr(1, t.size() - 2);
}

// General rules always fire; structural rules fire when the query carries a
// matching flag (flags union the applicable rules). A plain General query
// therefore admits only General rules.
bool rule_applies(const Rule& rule, const ContextSet& query) {
    if (rule.context.count(ContextFlag::General)) return true;
    for (ContextFlag f : query)
        if (rule.context.count(f)) return true;
    return false;
}

void validate_atoms(const std::set<std::string>& ids, const char* what) {
    for (const auto& id : ids)
        if (!is_atom(id)) throw DomainError(std::string("unknown atom '") + id + "' in " + what);
}

}  // namespace

const std::vector<std::string>& atom_ids() { return kAtoms; }

bool is_atom(const std::string& id) {
    return std::find(kAtoms.begin(), kAtoms.end(), id) != kAtoms.end();
}

std::string format_context(const ContextSet& ctx) {
    std::string out;
    for (const auto& [name, flag] : kFlags) {
        if (!ctx.count(flag)) continue;
        if (!out.empty()) out += "+";
        out += name;
    }
    return out;
}

ContextSet parse_context(const std::string& text) {
    ContextSet ctx;
    for (const auto& part : split(text, "+")) {
        std::string name = trim(part);
        bool found = false;
        for (const auto& [fname, flag] : kFlags) {
            if (fname == name) {
                ctx.insert(flag);
                found = true;
                break;
            }
        }
        if (!found) throw ParseError("unknown context flag '" + name + "'");
    }
    if (ctx.empty()) throw ParseError("empty context");
    return ctx;
}

KnowledgeBase load_rules(const std::string& text) {
    KnowledgeBase kb;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        std::size_t colon = line.find(':');
        if (colon == std::string::npos)
            throw ParseError("missing ':' after the context", line_no);
        ContextSet ctx;
        try {
            ctx = parse_context(line.substr(0, colon));
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line_no);
        }
        std::string body = trim(line.substr(colon + 1));

        std::size_t at = body.find('@');
        if (at == std::string::npos)
            throw ParseError("missing '@' citation section", line_no);
        std::string impl = trim(body.substr(0, at));
        std::string cite = trim(body.substr(at + 1));

        bool negative = impl.find("!=>") != std::string::npos;
        std::string arrow = negative ? "!=>" : "=>";
        std::size_t arrow_pos = impl.find(arrow);
        if (arrow_pos == std::string::npos)
            throw ParseError("missing '=>' or '!=>' arrow", line_no);

        std::set<std::string> premises;
        for (const auto& p : split(impl.substr(0, arrow_pos), "&")) {
            std::string id = trim(p);
            if (id.empty()) throw ParseError("empty premise", line_no);
            require_atom(id, line_no);
            premises.insert(id);
        }
        if (premises.empty()) throw ParseError("rule needs at least one premise", line_no);

        std::string rhs = trim(impl.substr(arrow_pos + arrow.size()));

        std::size_t bar = cite.find('|');
        if (bar == std::string::npos)
            throw ParseError("missing '|' before the quote", line_no);
        std::string quote = unquote(cite.substr(bar + 1), line_no);
        std::string loc_part = trim(cite.substr(0, bar));

        if (negative) {
            if (loc_part.rfind("witness:", 0) != 0)
                throw ParseError("non-implication needs a 'witness:<id>' citation", line_no);
            NonImplication ni;
            ni.premises = premises;
            ni.non_conclusion = trim(rhs);
            require_atom(ni.non_conclusion, line_no);
            ni.witness = trim(loc_part.substr(8));
            if (ni.witness.empty()) throw ParseError("empty witness id", line_no);
            ni.quote = quote;
            kb.non_implications.push_back(std::move(ni));
        } else {
            Rule rule;
            rule.premises = premises;
            for (const auto& c : split(rhs, ",")) {
                std::string id = trim(c);
                if (id.empty()) throw ParseError("empty conclusion", line_no);
                require_atom(id, line_no);
                rule.conclusions.insert(id);
            }
            if (rule.conclusions.empty())
                throw ParseError("rule needs at least one conclusion", line_no);
            rule.context = ctx;
            rule.location = unquote(loc_part, line_no);
            rule.quote = quote;
            kb.rules.push_back(std::move(rule));
        }
    }
    return kb;
}

std::map<std::string, Deduction> closure(const KnowledgeBase& kb,
                                         const std::set<std::string>& facts,
                                         const ContextSet& context) {
    validate_atoms(facts, "facts");
    std::map<std::string, Deduction> derived;
    for (const auto& f : facts) derived[f] = Deduction{f, {}};

    // layered breadth-first rounds: atoms found in a round become available in
    // the next one, so each trace has minimal derivation depth
    bool progress = true;
    while (progress) {
        progress = false;
        std::vector<std::pair<std::string, Deduction>> found;
        for (std::size_t ri = 0; ri < kb.rules.size(); ++ri) {
            const Rule& rule = kb.rules[ri];
            if (!rule_applies(rule, context)) continue;
            bool ready = true;
            for (const auto& p : rule.premises)
                if (!derived.count(p)) {
                    ready = false;
                    break;
                }
            if (!ready) continue;
            for (const auto& c : rule.conclusions) {
                if (derived.count(c)) continue;
                bool already = false;
                for (const auto& [atom, unused] : found)
                    if (atom == c) {
                        already = true;
                        break;
                    }
                if (already) continue;
                Deduction d;
                d.atom = c;
                for (const auto& p : rule.premises)
                    for (std::size_t step : derived[p].trace)
                        if (std::find(d.trace.begin(), d.trace.end(), step) == d.trace.end())
                            d.trace.push_back(step);
                d.trace.push_back(ri);
                found.emplace_back(c, std::move(d));
            }
        }
        for (auto& [atom, ded] : found) {
            derived.emplace(atom, std::move(ded));
            progress = true;
        }
    }
    return derived;
}

QueryResult query(const KnowledgeBase& kb, const std::set<std::string>& facts,
                  const std::string& target, const ContextSet& context) {
    if (!is_atom(target)) throw DomainError("unknown atom '" + target + "' in target");
    auto cl = closure(kb, facts, context);
    QueryResult res;
    auto it = cl.find(target);
    if (it != cl.end()) {
        res.status = QueryStatus::DerivedYes;
        res.derivation = it->second;
        return res;
    }
    for (const auto& ni : kb.non_implications) {
        if (ni.non_conclusion != target) continue;
        bool subset = true;
        for (const auto& p : ni.premises)
            if (!facts.count(p)) {
                subset = false;
                break;
            }
        if (subset) {
            res.status = QueryStatus::BlockedNo;
            res.blocker = ni;
            return res;
        }
    }
    res.status = QueryStatus::Unknown;
    return res;
}

std::vector<Conflict> consistency_check(const KnowledgeBase& kb,
                                        const std::set<std::string>& witnessed_true,
                                        const std::set<std::string>& witnessed_false,
                                        const ContextSet& context) {
    validate_atoms(witnessed_false, "witnessed_false");
    for (const auto& a : witnessed_true)
        if (witnessed_false.count(a))
            throw DomainError("witnessed sets overlap on '" + a + "'");
    auto cl = closure(kb, witnessed_true, context);
    std::vector<Conflict> conflicts;
    for (const auto& bad : witnessed_false) {
        auto it = cl.find(bad);
        if (it != cl.end()) conflicts.push_back({bad, it->second});
    }
    return conflicts;
}

bool replay_trace(const KnowledgeBase& kb, const std::set<std::string>& facts,
                  const Deduction& deduction) {
    std::set<std::string> have = facts;
    if (deduction.trace.empty()) return have.count(deduction.atom) > 0;
    for (std::size_t step : deduction.trace) {
        if (step >= kb.rules.size()) return false;
        const Rule& rule = kb.rules[step];
        for (const auto& p : rule.premises)
            if (!have.count(p)) return false;
        for (const auto& c : rule.conclusions) have.insert(c);
    }
    const Rule& last = kb.rules[deduction.trace.back()];
    return last.conclusions.count(deduction.atom) > 0 && have.count(deduction.atom) > 0;
}

// ---- built-in seed ----

namespace detail {
// defined in the generated embedding unit
extern const char* embedded_seed_text();
}  // namespace detail

const std::string& builtin_seed_text() {
    static const std::string text = detail::embedded_seed_text();
    return text;
}

const KnowledgeBase& builtin_kb() {
    static const KnowledgeBase kb = load_rules(builtin_seed_text());
    return kb;
}

}  // namespace isslab::lattice
