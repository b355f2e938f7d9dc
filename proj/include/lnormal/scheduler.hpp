#pragma once

// Per-depth plan for the tree sequence: how many copies of each word of
// depth n are emitted (n! in total, each within 1 of n! W(u)) and in which
// order, so that every run of (n-2)! consecutive words carries close to
// (n-2)! W(beta) words with grandparent beta.
//
// Counts use largest-remainder apportionment with canonical tie-breaking.
// The emission order first lays the copies out family by family (grandparent
// in canonical order, then its four grandchildren in canonical order) and
// then deals that list round-robin over the n(n-1) groups.

#include "lnormal/ltree.hpp"
#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lnormal {

struct PlanLimits {
    GenerationLimits generation{};
    unsigned max_depth = 20;  ///< n! must fit the 64-bit counters
};

class DepthPlan {
public:
    struct Run {
        std::uint32_t word;   ///< index into generation().words
        std::uint64_t count;
    };

    DepthPlan(Generation gen, std::vector<std::uint64_t> counts, std::vector<Run> runs)
        : gen_(std::move(gen)), counts_(std::move(counts)), runs_(std::move(runs))
    {
        total_ = std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
    }

    unsigned depth() const { return gen_.n; }
    const Generation& generation() const { return gen_; }
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    std::uint64_t count(const Word& w) const { return counts_.at(gen_.index_of(w)); }
    std::uint64_t total_words() const { return total_; }

    /// Family-ordered layout before dealing into groups.
    const std::vector<Run>& runs() const { return runs_; }

    /// (n-2)! for n >= 3.
    std::optional<std::uint64_t> group_size() const
    {
        if (depth() < 3) return std::nullopt;
        return total_ / group_count_raw();
    }

    /// n(n-1) for n >= 3.
    std::optional<std::uint64_t> group_count() const
    {
        if (depth() < 3) return std::nullopt;
        return group_count_raw();
    }

    /// Calls f(word_index, group) for each emitted word in order; group is
    /// 1-based, or 0 when n < 3. Memory use is O(|G(n)|).
    template <class F>
    void for_each_emitted(F&& f) const
    {
        if (depth() < 3) {
            for (const auto& r : runs_)
                for (std::uint64_t c = 0; c < r.count; ++c) f(r.word, std::uint64_t{0});
            return;
        }
        const std::uint64_t groups = group_count_raw();
        const std::uint64_t size = total_ / groups;
        for (std::uint64_t k = 0; k < groups; ++k) {
            std::size_t run = 0;
            std::uint64_t run_end = runs_.empty() ? 0 : runs_[0].count;
            for (std::uint64_t t = 0; t < size; ++t) {
                const std::uint64_t j = t * groups + k;  // 0-based position in the family layout
                while (j >= run_end) run_end += runs_[++run].count;
                f(runs_[run].word, k + 1);
            }
        }
    }

    std::vector<std::uint32_t> emission_indices() const
    {
        std::vector<std::uint32_t> out;
        out.reserve(total_);
        for_each_emitted([&](std::uint32_t w, std::uint64_t) { out.push_back(w); });
        return out;
    }

    std::vector<Word> emission() const
    {
        std::vector<Word> out;
        out.reserve(total_);
        for_each_emitted([&](std::uint32_t w, std::uint64_t) { out.push_back(gen_.words[w]); });
        return out;
    }

private:
    std::uint64_t group_count_raw() const { return std::uint64_t{depth()} * (depth() - 1); }

    Generation gen_;
    std::vector<std::uint64_t> counts_;
    std::vector<Run> runs_;
    std::uint64_t total_ = 0;
};

/// Largest-remainder apportionment of `total` seats over exact quotas summing
/// to `total`. Ties in the fractional part go to the lower index.
inline std::vector<std::uint64_t> largest_remainder(const std::vector<Rational>& quotas, std::uint64_t total)
{
    std::vector<std::uint64_t> seats(quotas.size());
    std::vector<Rational> fractions(quotas.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < quotas.size(); ++i) {
        if (quotas[i] < 0) throw std::invalid_argument("negative quota");
        Integer f = floor_of(quotas[i]);
        seats[i] = to_u64(f);
        fractions[i] = quotas[i] - Rational(f);
        assigned += seats[i];
    }
    if (assigned > total) throw std::invalid_argument("quotas exceed the seat total");
    std::vector<std::size_t> order(quotas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fractions[a] > fractions[b]; });
    std::uint64_t remaining = total - assigned;
    if (remaining > quotas.size()) throw std::invalid_argument("quotas fall short of the seat total");
    for (std::uint64_t i = 0; i < remaining; ++i) ++seats[order[i]];
    return seats;
}

inline DepthPlan plan_depth(const ProbabilitySequence& seq, unsigned n, const PlanLimits& limits = {})
{
    if (n == 0) throw std::invalid_argument("plan depth must be >= 1");
    if (n > limits.max_depth)
        throw ResourceError("depth " + std::to_string(n) + " exceeds the plan depth cap "
                            + std::to_string(limits.max_depth));
    Generation gen = generation(n, limits.generation);
    const Integer fact = factorial(n);
    std::vector<Rational> quotas;
    quotas.reserve(gen.words.size());
    for (const auto& w : gen.words) quotas.emplace_back(Rational(fact) * weight(seq, w));
    std::vector<std::uint64_t> counts = largest_remainder(quotas, to_u64(fact));

    std::vector<DepthPlan::Run> runs;
    runs.reserve(gen.words.size());
    auto push = [&](std::size_t idx) {
        if (counts[idx] > 0) runs.push_back({static_cast<std::uint32_t>(idx), counts[idx]});
    };
    if (n < 3) {
        for (std::size_t i = 0; i < gen.words.size(); ++i) push(i);
    } else {
        for (const auto& beta : generation(n - 2, limits.generation).words) {
            auto [b1, bplus] = children(beta);
            auto [b11, b2] = children(b1);
            auto [bp1, bpp] = children(bplus);
            for (const Word* w : {&b11, &b2, &bp1, &bpp}) push(gen.index_of(*w));
        }
    }
    return DepthPlan(std::move(gen), std::move(counts), std::move(runs));
}

struct PlanErrors {
    std::vector<Rational> word_errors;                ///< e_u, aligned with G(n)
    std::vector<std::vector<Rational>> group_errors;  ///< [k-1][beta index in G(n-2)]; empty for n < 3
    Rational max_word_error = 0;                      ///< max |e_u|
    Rational max_group_error = 0;                     ///< max |e^k_beta|
};

/// e_u = count(u) - n! W(u) and e^k_beta = #{w in group k : grandparent(w) = beta} - (n-2)! W(beta).
inline PlanErrors plan_errors(const DepthPlan& plan, const ProbabilitySequence& seq)
{
    PlanErrors out;
    const unsigned n = plan.depth();
    const auto& words = plan.generation().words;
    const Rational fact(factorial(n));
    out.word_errors.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        Rational e = Rational(from_u64(plan.counts()[i])) - fact * weight(seq, words[i]);
        out.max_word_error = std::max(out.max_word_error, abs_of(e));
        out.word_errors.push_back(std::move(e));
    }
    if (n < 3) return out;

    const Generation parents = generation(n - 2);
    std::vector<std::uint32_t> gp(words.size());
    for (std::size_t i = 0; i < words.size(); ++i)
        gp[i] = static_cast<std::uint32_t>(parents.index_of(grandparent(words[i])));
    std::vector<Rational> targets;
    const Rational small_fact(factorial(n - 2));
    for (const auto& b : parents.words) targets.emplace_back(small_fact * weight(seq, b));

    const std::uint64_t groups = *plan.group_count();
    std::vector<std::vector<std::uint64_t>> tallies(groups, std::vector<std::uint64_t>(parents.words.size()));
    plan.for_each_emitted([&](std::uint32_t w, std::uint64_t k) { ++tallies[k - 1][gp[w]]; });
    out.group_errors.resize(groups);
    for (std::uint64_t k = 0; k < groups; ++k) {
        out.group_errors[k].reserve(targets.size());
        for (std::size_t b = 0; b < targets.size(); ++b) {
            Rational e = Rational(from_u64(tallies[k][b])) - targets[b];
            out.max_group_error = std::max(out.max_group_error, abs_of(e));
            out.group_errors[k].push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace lnormal
