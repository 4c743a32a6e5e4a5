#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ovconv/realization.hpp"

namespace ovconv {

// An alternating word over the index set {1, ..., I}; empty allowed.
struct Word {
    std::vector<int> letters;

    Word() = default;
    explicit Word(std::vector<int> ls) : letters(std::move(ls)) {}
    int length() const { return static_cast<int>(letters.size()); }
    bool empty() const { return letters.empty(); }
    int first() const { return letters.front(); }
    int last() const { return letters.back(); }
    bool alternating() const;
    Word prepend(int i) const;
    bool operator==(const Word& o) const { return letters == o.letters; }
    std::string str() const;
};

// A word-pattern set J_i in K(I). Builtins expand to the word sets of the
// standard independences; which convolution a pair of specs encodes: {FREE,FREE} -> boxplus, {BOOLEAN,BOOLEAN} -> uplus,
// {MONOTONE_LOW, MONOTONE_HIGH} -> mu1 |> mu2, {ORTHO_1, ORTHO_2} -> mu1 |- mu2,
// {SFREE_1, SFREE_2} -> mu1 boxright mu2.
class JSpec {
public:
    enum class Kind {
        Free,
        Boolean,       // {empty, (i)} for the algebra i it is attached to
        MonotoneLow,   // {empty, (1)}
        MonotoneHigh,  // {empty, (1), (2), (2,1)}
        Ortho1,        // {empty, (1)}
        Ortho2,        // {(1), (2,1)}
        SFree1,        // {w : last letter 1} + {empty}
        SFree2,        // {w : last letter 1}
        Custom,
    };

    static JSpec builtin(Kind k);
    // explicit word list plus an optional "last=<i>" suffix rule
    static JSpec custom(std::vector<Word> words, std::optional<int> suffix_last = {});

    Kind kind() const { return kind_; }
    const std::vector<Word>& words() const { return words_; }
    std::optional<int> suffix_last() const { return suffix_last_; }
    // membership of w in J_i, where self is the 1-based algebra index the spec
    // is attached to (only the Boolean builtin depends on it)
    bool contains(const Word& w, int self) const;
    std::string str() const;

private:
    Kind kind_ = Kind::Free;
    std::vector<Word> words_;
    std::optional<int> suffix_last_;
};

std::optional<JSpec::Kind> jspec_kind_from_string(std::string_view s);
std::string jspec_kind_name(JSpec::Kind k);

// Prepend-closure over all alternating words up to length L-1:
// (i not= i1, ..., im) in J_i  iff  (i, i1, ..., im) in J_i.
bool jspec_compatible(std::span<const JSpec> specs, int max_len);

// The reduced amalgamated free product of the modules of a family of (joint)
// realizations, truncated at tensor length L. Words are enumerated
// lexicographically by (length, letters); the word (i1,...,il) carries
// multiplicity m_{i1} * ... * m_{il} and its block occupies mult * d rows. All
// operators act by left multiplication on the (total rows) x d module; the
// state is the top d x d corner.
class FockSpace {
public:
    FockSpace(std::vector<JointRealization> algebras, int truncation,
              Index row_cap = kDefaultRowCap);
    static FockSpace from_realizations(const std::vector<Realization>& reals, int truncation,
                                       Index row_cap = kDefaultRowCap);

    static constexpr Index kDefaultRowCap = 200000;

    int d() const { return d_; }
    int truncation() const { return truncation_; }
    int algebra_count() const { return static_cast<int>(algebras_.size()); }
    int tuple_size() const { return algebras_.front().k(); }
    Index rows() const { return rows_; }
    int word_count() const { return static_cast<int>(words_.size()); }
    const Word& word(int idx) const { return words_[idx]; }

    // lambda_i(x(i,l)) as a dense operator; i is 1-based
    const Matrix& lambda(int i, int l = 0) const;
    // diagonal word-pattern projection P_{J}
    Matrix projection(const JSpec& spec, int self) const;
    // P_{J_i} lambda_i(x(i,l)); requires the whole family to be compatible
    Matrix j_operator(std::span<const JSpec> specs, int i, int l = 0) const;
    // X_l = sum_i P_{J_i} lambda_i(x(i,l))
    Matrix convolution_operator(std::span<const JSpec> specs, int l = 0) const;

    // <xi, b0 X b1 X ... X bk xi> for the J-additive convolution operator;
    // factors optionally assigns the tuple component per X (default 0).
    // Exact for degrees k <= L; larger degrees are rejected.
    Matrix j_moment(std::span<const JSpec> specs, std::span<const Matrix> word,
                    std::span<const int> factors = {}) const;

    // left action of b in B on the whole truncated module
    Matrix left_action(const Matrix& b) const;
    // the truncated module viewed as B.xi (+) (everything else): packages a
    // selfadjoint operator on it as a Realization
    Realization compress_to_realization(const Matrix& x) const;

private:
    int word_index(const Word& w) const;

    int d_ = 1;
    int truncation_ = 1;
    std::vector<JointRealization> algebras_;
    std::vector<Word> words_;
    std::vector<Index> mult_;    // per word
    std::vector<Index> offset_;  // row offset per word
    Index rows_ = 0;
    std::vector<std::vector<Matrix>> lambda_;  // [algebra][component]
};

}  // namespace ovconv
