#include "qbound/query.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace qbound {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_number(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
}

bool is_identifier(const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), is_word_char) && !std::isdigit(static_cast<unsigned char>(s[0]));
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += v[i];
    }
    return out;
}

}  // namespace

Query::Query(std::string name, std::vector<std::string> head, std::vector<Atom> body)
    : name_(std::move(name)), head_(std::move(head)), body_(std::move(body)) {
    if (body_.empty()) throw std::invalid_argument("query body is empty");
    if (head_.empty()) throw std::invalid_argument("query head is empty");
    std::set<std::string> body_vars;
    std::map<std::string, std::size_t> arity;
    for (const auto& atom : body_) {
        if (atom.relation.empty()) throw std::invalid_argument("atom with empty relation name");
        if (atom.args.empty()) throw std::invalid_argument("atom " + atom.relation + " has no arguments");
        auto [it, fresh] = arity.emplace(atom.relation, atom.args.size());
        if (!fresh && it->second != atom.args.size())
            throw std::invalid_argument("relation " + atom.relation + " used with different arities");
        for (const auto& v : atom.args) {
            if (!is_identifier(v)) throw std::invalid_argument("invalid variable name '" + v + "'");
            body_vars.insert(v);
        }
    }
    for (const auto& v : head_) {
        if (!body_vars.contains(v)) throw std::invalid_argument("head variable " + v + " does not appear in the body");
    }
    if (body_vars.size() > 31) throw std::invalid_argument("queries are limited to 31 variables");
    vars_.assign(body_vars.begin(), body_vars.end());
}

std::optional<std::size_t> Query::index_of(const std::string& var) const {
    auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
    if (it == vars_.end() || *it != var) return std::nullopt;
    return static_cast<std::size_t>(it - vars_.begin());
}

VarSet Query::mask_of(std::span<const std::string> vars) const {
    VarSet s;
    for (const auto& v : vars) {
        auto i = index_of(v);
        if (!i) throw std::invalid_argument("unknown variable " + v);
        s = s | VarSet::single(*i);
    }
    return s;
}

std::vector<std::string> Query::names_of(VarSet s) const {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < vars_.size(); ++i)
        if (s.contains(i)) out.push_back(vars_[i]);
    return out;
}

std::map<std::string, std::size_t> Query::relation_arities() const {
    std::map<std::string, std::size_t> out;
    for (const auto& a : body_) out.emplace(a.relation, a.args.size());
    return out;
}

std::optional<FunctionalDependency> normalize_fd(FunctionalDependency fd) {
    fd.lhs = sorted_unique(std::move(fd.lhs));
    fd.rhs = sorted_unique(std::move(fd.rhs));
    std::vector<std::string> rhs;
    std::set_difference(fd.rhs.begin(), fd.rhs.end(), fd.lhs.begin(), fd.lhs.end(), std::back_inserter(rhs));
    fd.rhs = std::move(rhs);
    if (fd.rhs.empty()) return std::nullopt;
    return fd;
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line), column_(column) {}

// ---------------------------------------------------------------------------
// DSL parsing

namespace {

struct Token {
    std::string text;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size();) {
        char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
            continue;
        }
        if (c == '\n') {
            ++line;
            col = 1;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            ++col;
            continue;
        }
        if (is_word_char(c)) {
            std::size_t j = i;
            while (j < text.size() && is_word_char(text[j])) ++j;
            out.push_back({text.substr(i, j - i), line, col});
            col += j - i;
            i = j;
            continue;
        }
        if ((c == ':' && i + 1 < text.size() && text[i + 1] == '-') ||
            (c == '-' && i + 1 < text.size() && text[i + 1] == '>')) {
            out.push_back({text.substr(i, 2), line, col});
            i += 2;
            col += 2;
            continue;
        }
        if (std::string_view("(){},:=.").find(c) != std::string_view::npos) {
            out.push_back({std::string(1, c), line, col});
            ++i;
            ++col;
            continue;
        }
        throw ParseError(line, col, std::string("unexpected character '") + c + "'");
    }
    return out;
}

// Anchored fd items before resolution against the query.
struct RawAnchoredFd {
    std::string relation;
    std::vector<Token> lhs, rhs;
    Token where;
};

struct RawVarFd {
    std::vector<Token> lhs, rhs;
    Token where;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {
        Token end{"<end of input>", 1, 1};
        if (!toks_.empty()) end = {end.text, toks_.back().line, toks_.back().column + toks_.back().text.size()};
        toks_.push_back(end);
    }

    ProblemSpec parse() {
        while (pos_ + 1 < toks_.size()) statement();
        if (!query_) throw ParseError(1, 1, "no query statement");
        return resolve();
    }

private:
    const Token& peek() const { return toks_[pos_]; }

    Token next() {
        Token t = toks_[pos_];
        if (pos_ + 1 < toks_.size()) ++pos_;
        return t;
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const { throw ParseError(t.line, t.column, msg); }

    Token expect(const std::string& s) {
        Token t = next();
        if (t.text != s) fail(t, "expected '" + s + "', found '" + t.text + "'");
        return t;
    }

    Token word() {
        Token t = next();
        if (t.text.empty() || !is_word_char(t.text[0])) fail(t, "expected a name, found '" + t.text + "'");
        return t;
    }

    Token identifier() {
        Token t = word();
        if (!is_identifier(t.text)) fail(t, "expected an identifier, found '" + t.text + "'");
        return t;
    }

    std::vector<Token> list_until(const std::string& close, bool allow_numbers) {
        std::vector<Token> out;
        if (peek().text == close) {
            next();
            return out;
        }
        for (;;) {
            out.push_back(allow_numbers ? word() : identifier());
            Token t = next();
            if (t.text == close) return out;
            if (t.text != ",") fail(t, "expected ',' or '" + close + "', found '" + t.text + "'");
        }
    }

    static std::vector<std::string> texts(const std::vector<Token>& ts) {
        std::vector<std::string> out;
        for (const auto& t : ts) out.push_back(t.text);
        return out;
    }

    void statement() {
        Token kw = word();
        if (kw.text == "query") {
            if (query_) fail(kw, "duplicate query statement");
            Token name = identifier();
            expect("(");
            auto head = list_until(")", false);
            expect(":-");
            std::vector<Atom> body;
            for (;;) {
                Token rel = identifier();
                expect("(");
                auto args = list_until(")", false);
                if (args.empty()) fail(rel, "atom " + rel.text + " has no arguments");
                body.push_back({rel.text, texts(args)});
                Token t = next();
                if (t.text == ".") break;
                if (t.text != ",") fail(t, "expected ',' or '.', found '" + t.text + "'");
            }
            try {
                query_.emplace(name.text, texts(head), std::move(body));
            } catch (const std::invalid_argument& e) {
                fail(kw, e.what());
            }
        } else if (kw.text == "fd") {
            if (peek().text == "{") {
                next();
                RawVarFd fd{list_until("}", false), {}, kw};
                expect("->");
                expect("{");
                fd.rhs = list_until("}", false);
                expect(".");
                var_fds_.push_back(std::move(fd));
            } else {
                Token rel = identifier();
                expect(":");
                expect("{");
                RawAnchoredFd fd{rel.text, list_until("}", true), {}, kw};
                expect("->");
                expect("{");
                fd.rhs = list_until("}", true);
                expect(".");
                anchored_fds_.push_back(std::move(fd));
            }
        } else if (kw.text == "size") {
            Token rel = identifier();
            expect("=");
            Token n = next();
            if (!is_number(n.text)) fail(n, "expected a positive integer, found '" + n.text + "'");
            double v = std::stod(n.text);
            if (v < 1) fail(n, "relation size must be positive");
            expect(".");
            sizes_[rel.text] = v;
        } else {
            fail(kw, "unknown statement '" + kw.text + "'");
        }
    }

    ProblemSpec resolve() {
        const Query& q = *query_;
        ProblemSpec spec{q, {}, sizes_};
        for (const auto& raw : var_fds_) {
            for (const auto* side : {&raw.lhs, &raw.rhs})
                for (const auto& t : *side)
                    if (!q.index_of(t.text)) fail(t, "unknown variable " + t.text + " in functional dependency");
            if (raw.lhs.empty() || raw.rhs.empty()) fail(raw.where, "functional dependency sides must be non-empty");
            if (auto fd = normalize_fd({texts(raw.lhs), texts(raw.rhs), std::nullopt})) spec.fds.push_back(*fd);
        }
        auto arities = q.relation_arities();
        for (const auto& raw : anchored_fds_) {
            auto it = arities.find(raw.relation);
            if (it == arities.end()) fail(raw.where, "unknown relation " + raw.relation + " in functional dependency");
            const Atom* first = nullptr;
            for (const auto& a : q.body())
                if (a.relation == raw.relation) {
                    first = &a;
                    break;
                }
            auto positions = [&](const std::vector<Token>& items) {
                std::vector<std::size_t> out;
                for (const auto& t : items) {
                    if (is_number(t.text)) {
                        std::size_t p = std::stoul(t.text);
                        if (p < 1 || p > it->second) fail(t, "position " + t.text + " out of range for " + raw.relation);
                        out.push_back(p - 1);
                    } else {
                        auto f = std::find(first->args.begin(), first->args.end(), t.text);
                        if (f == first->args.end())
                            fail(t, "variable " + t.text + " does not occur in " + raw.relation);
                        out.push_back(static_cast<std::size_t>(f - first->args.begin()));
                    }
                }
                std::sort(out.begin(), out.end());
                out.erase(std::unique(out.begin(), out.end()), out.end());
                return out;
            };
            if (raw.lhs.empty() || raw.rhs.empty()) fail(raw.where, "functional dependency sides must be non-empty");
            FdAnchor anchor{raw.relation, positions(raw.lhs), positions(raw.rhs)};
            std::vector<std::size_t> rhs;
            std::set_difference(anchor.rhs.begin(), anchor.rhs.end(), anchor.lhs.begin(), anchor.lhs.end(),
                                std::back_inserter(rhs));
            if (rhs.empty()) continue;
            anchor.rhs = rhs;
            FunctionalDependency fd;
            for (auto p : anchor.lhs) fd.lhs.push_back(first->args[p]);
            for (auto p : anchor.rhs) fd.rhs.push_back(first->args[p]);
            fd.lhs = sorted_unique(fd.lhs);
            fd.rhs = sorted_unique(fd.rhs);
            fd.anchor = std::move(anchor);
            spec.fds.push_back(std::move(fd));
        }
        return spec;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::optional<Query> query_;
    std::vector<RawVarFd> var_fds_;
    std::vector<RawAnchoredFd> anchored_fds_;
    std::map<std::string, double> sizes_;
};

}  // namespace

ProblemSpec parse_spec(const std::string& text) { return Parser(tokenize(text)).parse(); }

std::string to_string(const Query& q) {
    std::string out = "query " + q.name() + "(" + join(q.head(), ",") + ") :- ";
    for (std::size_t j = 0; j < q.body().size(); ++j) {
        if (j) out += ", ";
        out += q.body()[j].relation + "(" + join(q.body()[j].args, ",") + ")";
    }
    return out + ".";
}

std::string to_string(const FunctionalDependency& fd) {
    if (fd.anchor) {
        auto positions = [](const std::vector<std::size_t>& ps) {
            std::string s;
            for (std::size_t i = 0; i < ps.size(); ++i) s += (i ? "," : "") + std::to_string(ps[i] + 1);
            return s;
        };
        return "fd " + fd.anchor->relation + ": {" + positions(fd.anchor->lhs) + "} -> {" +
               positions(fd.anchor->rhs) + "}.";
    }
    return "fd {" + join(fd.lhs, ",") + "} -> {" + join(fd.rhs, ",") + "}.";
}

std::string to_dsl(const ProblemSpec& spec) {
    std::ostringstream out;
    out << to_string(spec.query) << "\n";
    for (const auto& fd : spec.fds) out << to_string(fd) << "\n";
    for (const auto& [rel, n] : spec.sizes) out << "size " << rel << " = " << static_cast<unsigned long long>(n) << ".\n";
    return out.str();
}

// ---------------------------------------------------------------------------

std::vector<FunctionalDependency> lift_fds(const Query& query, std::span<const FunctionalDependency> fds) {
    std::vector<FunctionalDependency> out;
    auto add = [&](FunctionalDependency fd) {
        fd.anchor.reset();
        auto n = normalize_fd(std::move(fd));
        if (n && std::find(out.begin(), out.end(), *n) == out.end()) out.push_back(std::move(*n));
    };
    for (const auto& fd : fds) {
        if (!fd.anchor) {
            add(fd);
            continue;
        }
        for (const auto& atom : query.body()) {
            if (atom.relation != fd.anchor->relation) continue;
            FunctionalDependency inst;
            for (auto p : fd.anchor->lhs) inst.lhs.push_back(atom.args.at(p));
            for (auto p : fd.anchor->rhs) inst.rhs.push_back(atom.args.at(p));
            add(std::move(inst));
        }
    }
    return out;
}

ChaseResult chase_detailed(const Query& query, std::span<const FunctionalDependency> fds) {
    std::vector<std::string> head = query.head();
    std::vector<Atom> body = query.body();
    std::map<std::string, std::string> renaming;

    auto unify = [&](const std::string& a, const std::string& b) {
        const std::string keep = std::min(a, b), drop = std::max(a, b);
        for (auto& v : head)
            if (v == drop) v = keep;
        for (auto& atom : body)
            for (auto& v : atom.args)
                if (v == drop) v = keep;
        for (auto& [from, to] : renaming)
            if (to == drop) to = keep;
        renaming[drop] = keep;
    };

    bool changed = true;
    bool any = false;
    while (changed) {
        changed = false;
        for (const auto& fd : fds) {
            if (!fd.anchor) continue;
            const auto& anc = *fd.anchor;
            for (std::size_t i = 0; i < body.size() && !changed; ++i) {
                if (body[i].relation != anc.relation) continue;
                for (std::size_t j = i + 1; j < body.size() && !changed; ++j) {
                    if (body[j].relation != anc.relation) continue;
                    bool agree = std::all_of(anc.lhs.begin(), anc.lhs.end(),
                                             [&](std::size_t p) { return body[i].args[p] == body[j].args[p]; });
                    if (!agree) continue;
                    for (auto p : anc.rhs) {
                        if (body[i].args[p] != body[j].args[p]) {
                            unify(body[i].args[p], body[j].args[p]);
                            changed = any = true;
                            break;
                        }
                    }
                }
            }
            if (changed) break;
        }
    }
    if (any) {
        // Atoms made identical by unification collapse into one.
        std::vector<Atom> dedup;
        for (auto& a : body)
            if (std::find(dedup.begin(), dedup.end(), a) == dedup.end()) dedup.push_back(std::move(a));
        body = std::move(dedup);
    }
    return {Query(query.name(), std::move(head), std::move(body)), std::move(renaming)};
}

Query chase(const Query& query, std::span<const FunctionalDependency> fds) { return chase_detailed(query, fds).query; }

BoundProblem prepare(const Query& query, std::span<const FunctionalDependency> fds) {
    auto [chased, renaming] = chase_detailed(query, fds);
    auto rename = [&](std::vector<std::string> vs) {
        for (auto& v : vs)
            if (auto it = renaming.find(v); it != renaming.end()) v = it->second;
        return sorted_unique(std::move(vs));
    };
    std::vector<FunctionalDependency> renamed, anchored;
    for (const auto& fd : fds) {
        FunctionalDependency r{rename(fd.lhs), rename(fd.rhs), fd.anchor};
        if (r.anchor) anchored.push_back(r);
        renamed.push_back(std::move(r));
    }
    auto var_fds = lift_fds(chased, renamed);
    return {std::move(chased), std::move(var_fds), std::move(anchored)};
}

Hypergraph hypergraph(const Query& query) {
    Hypergraph g{query.variables(), {}};
    for (std::size_t j = 0; j < query.body().size(); ++j) g.edges.push_back(query.atom_set(j));
    return g;
}

SubsetIndex::SubsetIndex(std::size_t n) : n_(n) {
    if (n == 0 || n > 20) throw std::invalid_argument("SubsetIndex supports 1..20 variables");
}

std::size_t SubsetIndex::index(VarSet s) const {
    if (s.empty() || !s.subset_of(VarSet::full(n_))) throw std::out_of_range("subset outside index range");
    return s.bits;
}

VarSet SubsetIndex::subset(std::size_t index) const {
    if (index == 0 || index > count()) throw std::out_of_range("subset index outside 1..2^n-1");
    return VarSet{static_cast<std::uint32_t>(index)};
}

}  // namespace qbound
