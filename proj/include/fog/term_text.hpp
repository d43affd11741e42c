#pragma once

#include "fog/terms.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fog {

// Inline syntax: `A(D(x5,C(x2,B)),x5,B)`. Nullary nonterminals may be written `B`
// or `B()`. Cyclic terms use labels: `#1=A(#1)` is the term A(A(A(...))).
TermId parse_term(TermStore& ts, std::string_view text);
std::string format_term(const TermStore& ts, TermId t);

// Graph format, one definition per line:
//   node n1 = A(x1, n2)
//   node n2 = x3
//   root E = n1
// Node references may point forward. Blank lines and `#` comments are ignored.
using NamedTerms = std::vector<std::pair<std::string, TermId>>;
NamedTerms parse_term_graph(TermStore& ts, std::string_view text);
std::string format_term_graph(const TermStore& ts, const NamedTerms& roots);

}  // namespace fog
