#include "ovconv/fock.hpp"

#include <algorithm>

namespace ovconv {

bool Word::alternating() const {
    for (std::size_t i = 1; i < letters.size(); ++i)
        if (letters[i] == letters[i - 1]) return false;
    return true;
}

Word Word::prepend(int i) const {
    Word out;
    out.letters.reserve(letters.size() + 1);
    out.letters.push_back(i);
    out.letters.insert(out.letters.end(), letters.begin(), letters.end());
    return out;
}

std::string Word::str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < letters.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(letters[i]);
    }
    return s + ")";
}

JSpec JSpec::builtin(Kind k) {
    if (k == Kind::Custom) throw InputError("JSpec: CUSTOM requires explicit words");
    JSpec spec;
    spec.kind_ = k;
    return spec;
}

JSpec JSpec::custom(std::vector<Word> words, std::optional<int> suffix_last) {
    for (const auto& w : words)
        if (!w.alternating()) throw InputError("JSpec: word not alternating: " + w.str());
    JSpec spec;
    spec.kind_ = Kind::Custom;
    spec.words_ = std::move(words);
    spec.suffix_last_ = suffix_last;
    return spec;
}

bool JSpec::contains(const Word& w, int self) const {
    const auto is = [&](std::initializer_list<int> ls) {
        return w.letters == std::vector<int>(ls);
    };
    switch (kind_) {
        case Kind::Free:
            return true;
        case Kind::Boolean:
            return w.empty() || is({self});
        case Kind::MonotoneLow:
            return w.empty() || is({1});
        case Kind::MonotoneHigh:
            return w.empty() || is({1}) || is({2}) || is({2, 1});
        case Kind::Ortho1:
            return w.empty() || is({1});
        case Kind::Ortho2:
            return is({1}) || is({2, 1});
        case Kind::SFree1:
            return w.empty() || w.last() == 1;
        case Kind::SFree2:
            return !w.empty() && w.last() == 1;
        case Kind::Custom: {
            if (std::find(words_.begin(), words_.end(), w) != words_.end()) return true;
            return suffix_last_ && !w.empty() && w.last() == *suffix_last_;
        }
    }
    return false;
}

std::string jspec_kind_name(JSpec::Kind k) {
    switch (k) {
        case JSpec::Kind::Free: return "FREE";
        case JSpec::Kind::Boolean: return "BOOLEAN";
        case JSpec::Kind::MonotoneLow: return "MONOTONE_LOW";
        case JSpec::Kind::MonotoneHigh: return "MONOTONE_HIGH";
        case JSpec::Kind::Ortho1: return "ORTHO_1";
        case JSpec::Kind::Ortho2: return "ORTHO_2";
        case JSpec::Kind::SFree1: return "SFREE_1";
        case JSpec::Kind::SFree2: return "SFREE_2";
        case JSpec::Kind::Custom: return "CUSTOM";
    }
    return "?";
}

std::optional<JSpec::Kind> jspec_kind_from_string(std::string_view s) {
    using K = JSpec::Kind;
    for (K k : {K::Free, K::Boolean, K::MonotoneLow, K::MonotoneHigh, K::Ortho1, K::Ortho2,
                K::SFree1, K::SFree2, K::Custom})
        if (s == jspec_kind_name(k)) return k;
    return std::nullopt;
}

std::string JSpec::str() const { return jspec_kind_name(kind_); }

namespace {

// all alternating words over {1..count} of length <= max_len, by (length, lex)
std::vector<Word> enumerate_words(int count, int max_len) {
    std::vector<Word> out;
    out.emplace_back();
    std::vector<Word> prev{Word{}};
    for (int len = 1; len <= max_len; ++len) {
        std::vector<Word> cur;
        for (const auto& w : prev)
            for (int i = 1; i <= count; ++i) {
                if (!w.empty() && w.first() == i) continue;
                cur.push_back(w.prepend(i));
            }
        std::sort(cur.begin(), cur.end(),
                  [](const Word& a, const Word& b) { return a.letters < b.letters; });
        for (auto& w : cur) out.push_back(w);
        prev = std::move(cur);
    }
    return out;
}

}  // namespace

bool jspec_compatible(std::span<const JSpec> specs, int max_len) {
    const int count = static_cast<int>(specs.size());
    const auto words = enumerate_words(count, std::max(0, max_len - 1));
    for (int i = 1; i <= count; ++i) {
        const JSpec& spec = specs[i - 1];
        for (const auto& w : words) {
            if (!w.empty() && w.first() == i) continue;
            if (spec.contains(w, i) != spec.contains(w.prepend(i), i)) return false;
        }
    }
    return true;
}

FockSpace::FockSpace(std::vector<JointRealization> algebras, int truncation, Index row_cap)
    : truncation_(truncation), algebras_(std::move(algebras)) {
    if (algebras_.empty()) throw DimensionMismatch("FockSpace: need at least one algebra");
    if (truncation_ < 1) throw InputError("FockSpace: truncation must be >= 1");
    d_ = algebras_.front().d();
    const int k = algebras_.front().k();
    for (const auto& a : algebras_)
        if (a.d() != d_ || a.k() != k)
            throw DimensionMismatch("FockSpace: algebras must share d and tuple size");

    const int count = static_cast<int>(algebras_.size());
    words_ = enumerate_words(count, truncation_);
    mult_.resize(words_.size());
    offset_.resize(words_.size());
    rows_ = 0;
    for (std::size_t wi = 0; wi < words_.size(); ++wi) {
        Index mult = 1;
        for (int letter : words_[wi].letters) mult *= algebras_[letter - 1].m();
        mult_[wi] = mult;
        offset_[wi] = rows_;
        rows_ += mult * d_;
        if (rows_ > row_cap)
            throw TruncationTooLarge("FockSpace: module exceeds the row cap of " +
                                     std::to_string(row_cap));
    }

    // assemble lambda_i(x(i,l)): scalar part on words not starting with i,
    // creation/annihilation as an adjoint pair, T_i on the leading i-leg
    lambda_.assign(count, {});
    for (int i = 1; i <= count; ++i) {
        const JointRealization& alg = algebras_[i - 1];
        for (int l = 0; l < k; ++l) {
            const Realization comp = alg.component(l);
            Matrix op = Matrix::Zero(rows_, rows_);
            for (std::size_t wi = 0; wi < words_.size(); ++wi) {
                const Word& w = words_[wi];
                const Index mult = mult_[wi], off = offset_[wi];
                if (mult == 0) continue;
                if (w.empty() || w.first() != i) {
                    op.block(off, off, mult * d_, mult * d_) +=
                        kron(Matrix::Identity(mult, mult), comp.p());
                    if (w.length() < truncation_ && comp.m() > 0) {
                        const int ti = word_index(w.prepend(i));
                        const Matrix create =
                            amplify_blocks(comp.alpha_vec(), static_cast<int>(mult), d_);
                        op.block(offset_[ti], off, mult_[ti] * d_, mult * d_) += create;
                        op.block(off, offset_[ti], mult * d_, mult_[ti] * d_) += create.adjoint();
                    }
                } else {
                    const Word rest(std::vector<int>(w.letters.begin() + 1, w.letters.end()));
                    const Index rest_mult = mult_[word_index(rest)];
                    op.block(off, off, mult * d_, mult * d_) +=
                        amplify_blocks(comp.t(), static_cast<int>(rest_mult), d_);
                }
            }
            lambda_[i - 1].push_back(std::move(op));
        }
    }
}

FockSpace FockSpace::from_realizations(const std::vector<Realization>& reals, int truncation,
                                       Index row_cap) {
    std::vector<JointRealization> algebras;
    algebras.reserve(reals.size());
    for (const auto& r : reals) algebras.push_back(JointRealization::from_components({r}));
    return FockSpace(std::move(algebras), truncation, row_cap);
}

int FockSpace::word_index(const Word& w) const {
    for (std::size_t i = 0; i < words_.size(); ++i)
        if (words_[i] == w) return static_cast<int>(i);
    throw InputError("FockSpace: word not in the truncated module: " + w.str());
}

const Matrix& FockSpace::lambda(int i, int l) const {
    if (i < 1 || i > algebra_count()) throw DimensionMismatch("FockSpace: algebra index");
    return lambda_[i - 1].at(l);
}

Matrix FockSpace::projection(const JSpec& spec, int self) const {
    Matrix p = Matrix::Zero(rows_, rows_);
    for (std::size_t wi = 0; wi < words_.size(); ++wi)
        if (spec.contains(words_[wi], self))
            p.block(offset_[wi], offset_[wi], mult_[wi] * d_, mult_[wi] * d_) =
                Matrix::Identity(mult_[wi] * d_, mult_[wi] * d_);
    return p;
}

Matrix FockSpace::j_operator(std::span<const JSpec> specs, int i, int l) const {
    if (static_cast<int>(specs.size()) != algebra_count())
        throw DimensionMismatch("j_operator: one spec per algebra required");
    if (!jspec_compatible(specs, truncation_))
        throw IncompatibleSpec("j_operator: the spec family is not I-compatible");
    // P_J is a diagonal word-block projection: zero the excluded rows
    Matrix op = lambda(i, l);
    for (std::size_t wi = 0; wi < words_.size(); ++wi)
        if (!specs[i - 1].contains(words_[wi], i))
            op.middleRows(offset_[wi], mult_[wi] * d_).setZero();
    return op;
}

Matrix FockSpace::convolution_operator(std::span<const JSpec> specs, int l) const {
    Matrix x = Matrix::Zero(rows_, rows_);
    for (int i = 1; i <= algebra_count(); ++i) x += j_operator(specs, i, l);
    return x;
}

Matrix FockSpace::left_action(const Matrix& b) const {
    if (b.rows() != d_ || b.cols() != d_) throw DimensionMismatch("left_action: b must be d x d");
    Matrix out = Matrix::Zero(rows_, rows_);
    for (std::size_t wi = 0; wi < words_.size(); ++wi)
        if (mult_[wi] > 0)
            out.block(offset_[wi], offset_[wi], mult_[wi] * d_, mult_[wi] * d_) =
                kron(Matrix::Identity(mult_[wi], mult_[wi]), b);
    return out;
}

Matrix FockSpace::j_moment(std::span<const JSpec> specs, std::span<const Matrix> word,
                           std::span<const int> factors) const {
    if (word.empty()) throw DimensionMismatch("j_moment: word must contain at least b0");
    const int degree = static_cast<int>(word.size()) - 1;
    if (degree > truncation_)
        throw DegreeExceedsTruncation("j_moment: degree " + std::to_string(degree) +
                                      " exceeds truncation " + std::to_string(truncation_));
    if (!factors.empty() && static_cast<int>(factors.size()) != degree)
        throw DimensionMismatch("j_moment: factor assignment must cover each X");
    if (!jspec_compatible(specs, truncation_))
        throw IncompatibleSpec("j_moment: the spec family is not I-compatible");

    std::vector<Matrix> xs(tuple_size());
    std::vector<bool> built(tuple_size(), false);
    auto x_of = [&](int l) -> const Matrix& {
        if (!built[l]) {
            xs[l] = convolution_operator(specs, l);
            built[l] = true;
        }
        return xs[l];
    };
    // left action of b applied blockwise: kron(I_mult, b) on each word block
    auto apply_left = [&](const Matrix& b, Matrix& v) {
        if (b.rows() != d_ || b.cols() != d_)
            throw DimensionMismatch("j_moment: word entries must be d x d");
        for (std::size_t wi = 0; wi < words_.size(); ++wi)
            for (Index leg = 0; leg < mult_[wi]; ++leg) {
                auto rows = v.middleRows(offset_[wi] + leg * d_, d_);
                rows = b * rows;
            }
    };

    Matrix v = Matrix::Zero(rows_, d_);
    v.topLeftCorner(d_, d_) = Matrix::Identity(d_, d_);  // xi
    for (std::size_t idx = word.size(); idx-- > 0;) {
        apply_left(word[idx], v);
        if (idx > 0) {
            const int l = factors.empty() ? 0 : factors[idx - 1];
            v = x_of(l) * v;
        }
    }
    return v.topLeftCorner(d_, d_);
}

Realization FockSpace::compress_to_realization(const Matrix& x) const {
    if (x.rows() != rows_ || x.cols() != rows_)
        throw DimensionMismatch("compress_to_realization: operator shape mismatch");
    const Matrix xs = 0.5 * (x + x.adjoint());
    const int m = static_cast<int>(rows_ / d_) - 1;
    return Realization(d_, m, xs.topLeftCorner(d_, d_), xs.block(d_, 0, Index(m) * d_, d_),
                       xs.bottomRightCorner(Index(m) * d_, Index(m) * d_));
}

}  // namespace ovconv
