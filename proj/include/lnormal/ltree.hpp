#pragma once

// Words over the alphabet {1, 2, ...} and the binary probability tree built
// on them. Node u has a left child u1 (edge probability p_{last digit}) and a
// right child u+ (last digit incremented, probability q_{last digit}). The
// root is the word "1"; the depth of a node is its digit sum.

#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace lnormal {

/// Finite string of digits >= 1. The empty word is allowed.
class Word {
public:
    Word() = default;
    Word(std::initializer_list<Digit> digits) : Word(std::vector<Digit>(digits)) {}
    explicit Word(std::vector<Digit> digits) : digits_(std::move(digits))
    {
        for (Digit d : digits_)
            if (d == 0) throw std::invalid_argument("word digits must be >= 1");
    }
    explicit Word(std::span<const Digit> digits) : Word(std::vector<Digit>(digits.begin(), digits.end())) {}

    /// Parses "1,1,2"; the empty string is the empty word.
    static Word parse(std::string_view text)
    {
        std::vector<Digit> out;
        if (text.empty()) return Word{};
        std::size_t pos = 0;
        while (true) {
            auto comma = text.find(',', pos);
            auto field = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
            if (field.empty() || field.size() > 9 || !std::all_of(field.begin(), field.end(), [](char c) {
                    return c >= '0' && c <= '9';
                }))
                throw std::invalid_argument("malformed word '" + std::string(text) + "'");
            out.push_back(static_cast<Digit>(std::stoul(std::string(field))));
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        return Word(std::move(out));
    }

    std::span<const Digit> digits() const { return digits_; }
    std::size_t size() const { return digits_.size(); }
    bool empty() const { return digits_.empty(); }
    Digit operator[](std::size_t i) const { return digits_[i]; }
    Digit back() const { return digits_.back(); }

    Word concat(const Word& other) const
    {
        std::vector<Digit> out = digits_;
        out.insert(out.end(), other.digits_.begin(), other.digits_.end());
        return Word(std::move(out));
    }

    Word append(Digit d) const
    {
        std::vector<Digit> out = digits_;
        out.push_back(d);
        return Word(std::move(out));
    }

    bool starts_with(const Word& prefix) const
    {
        return prefix.size() <= size() && std::equal(prefix.digits_.begin(), prefix.digits_.end(), digits_.begin());
    }

    /// Digits joined by commas, e.g. "1,1,2".
    std::string to_string() const
    {
        std::string s;
        for (std::size_t i = 0; i < digits_.size(); ++i) {
            if (i) s += ',';
            s += std::to_string(digits_[i]);
        }
        return s;
    }

    // Lexicographic with a proper prefix sorting first.
    friend auto operator<=>(const Word&, const Word&) = default;
    friend bool operator==(const Word&, const Word&) = default;

private:
    std::vector<Digit> digits_;
};

struct WordHash {
    std::size_t operator()(const Word& w) const noexcept
    {
        std::uint64_t h = 1469598103934665603ULL;
        for (Digit d : w.digits()) {
            h ^= d;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

inline std::uint64_t depth(std::span<const Digit> digits)
{
    return std::accumulate(digits.begin(), digits.end(), std::uint64_t{0});
}

/// Digit sum; equals the number of nodes on the path from the root.
inline std::uint64_t depth(const Word& w) { return depth(w.digits()); }

/// u+ : last digit incremented.
inline Word successor(const Word& w)
{
    if (w.empty()) throw std::invalid_argument("the empty word has no successor");
    std::vector<Digit> d(w.digits().begin(), w.digits().end());
    ++d.back();
    return Word(std::move(d));
}

inline std::pair<Word, Word> children(const Word& w)
{
    if (w.empty()) throw std::invalid_argument("the empty word is not a tree node");
    return {w.append(1), successor(w)};
}

/// Inverse of the child relation. The root "1" has no parent.
inline Word parent(const Word& w)
{
    if (depth(w) < 2) throw std::invalid_argument("word '" + w.to_string() + "' has no parent");
    std::vector<Digit> d(w.digits().begin(), w.digits().end());
    if (d.back() == 1)
        d.pop_back();
    else
        --d.back();
    return Word(std::move(d));
}

/// The unique v with w in {v11, v2, v+1, (v+)+}.
inline Word grandparent(const Word& w)
{
    if (depth(w) < 3) throw std::invalid_argument("grandparent needs depth >= 3, got '" + w.to_string() + "'");
    return parent(parent(w));
}

// Words of depth n are compositions of n. Marking the partial sums
// s_1 < ... < s_{k-1} of a composition as bits (n-1-s_i) gives a bijection to
// [0, 2^(n-1)), and canonical (lexicographic) order is descending code order.
inline std::uint64_t composition_code(std::span<const Digit> digits, std::uint64_t n)
{
    std::uint64_t code = 0, partial = 0;
    for (std::size_t i = 0; i + 1 < digits.size(); ++i) {
        partial += digits[i];
        code |= std::uint64_t{1} << (n - 1 - partial);
    }
    return code;
}

/// Position of a depth-n word in the canonically ordered generation G(n).
inline std::uint64_t canonical_index(std::span<const Digit> digits, std::uint64_t n)
{
    return ((std::uint64_t{1} << (n - 1)) - 1) - composition_code(digits, n);
}

struct GenerationLimits {
    unsigned max_level = 22;  ///< at most 2^21 words per generation
};

/// All words of depth n in canonical order.
struct Generation {
    unsigned n = 0;
    std::vector<Word> words;

    std::size_t index_of(const Word& w) const
    {
        if (depth(w) != n) throw std::invalid_argument("word '" + w.to_string() + "' is not in G(" + std::to_string(n) + ")");
        return static_cast<std::size_t>(canonical_index(w.digits(), n));
    }
};

/// G(n), built by expanding children level by level. |G(n)| = 2^(n-1).
inline Generation generation(unsigned n, const GenerationLimits& limits = {})
{
    if (n == 0) throw std::invalid_argument("generation depth must be >= 1");
    if (n > limits.max_level)
        throw ResourceError("G(" + std::to_string(n) + ") has 2^" + std::to_string(n - 1)
                            + " words, above the configured level cap " + std::to_string(limits.max_level));
    std::vector<Word> level{Word{1}};
    for (unsigned m = 1; m < n; ++m) {
        std::vector<Word> next;
        next.reserve(level.size() * 2);
        for (const auto& w : level) {
            auto [left, right] = children(w);
            next.push_back(std::move(left));
            next.push_back(std::move(right));
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        level = std::move(next);
    }
    return Generation{n, std::move(level)};
}

/// mu(w) = prod L_{w_i}; mu(empty) = 1.
inline Rational mu(const ProbabilitySequence& seq, std::span<const Digit> digits)
{
    Rational r = 1;
    for (Digit d : digits) r *= seq.length(d);
    return r;
}

inline Rational mu(const ProbabilitySequence& seq, const Word& w) { return mu(seq, w.digits()); }

/// Product of the edge probabilities from the root to w. Uses W(d) = tail(d)
/// for single digits and W(uv) = W(u1) W(v) = mu(u) W(v), so
/// W(w_1..w_k) = L_{w_1} ... L_{w_{k-1}} tail(w_k).
inline Rational weight(const ProbabilitySequence& seq, std::span<const Digit> digits)
{
    if (digits.empty()) throw std::invalid_argument("weight of the empty word is undefined");
    Rational r = mu(seq, digits.first(digits.size() - 1));
    r *= seq.tail(digits.back());
    return r;
}

inline Rational weight(const ProbabilitySequence& seq, const Word& w) { return weight(seq, w.digits()); }

/// Delta_1 .. Delta_n with Delta_n = sum_{u in G(n)} W(u)|u|, via
/// Delta_1 = 1, Delta_n = 1 + sum_{d<n} L_d Delta_{n-d}.
inline std::vector<Rational> delta_sequence(const ProbabilitySequence& seq, unsigned n)
{
    if (n == 0) throw std::invalid_argument("delta index must be >= 1");
    std::vector<Rational> lengths, deltas;
    lengths.reserve(n);
    deltas.reserve(n);
    for (unsigned d = 1; d <= n; ++d) lengths.push_back(seq.length(d));
    deltas.emplace_back(1);
    for (unsigned m = 2; m <= n; ++m) {
        Rational v = 1;
        for (unsigned d = 1; d < m; ++d) v += lengths[d - 1] * deltas[m - d - 1];
        deltas.push_back(v);
    }
    return deltas;
}

inline Rational delta(const ProbabilitySequence& seq, unsigned n) { return delta_sequence(seq, n).back(); }

}  // namespace lnormal
