#pragma once

// Streaming generator for tree sequences. Words of depth 1, 2, ... are
// emitted depth by depth following plan_depth; consumers receive words (and
// depth boundaries) through SequenceSink. Index bookkeeping (digits per
// depth d(n), cumulative d*(n), digit ranges of the groups I^k(n)) is kept in
// a SequenceLedger that is derived purely from word positions, so the same
// builder works on foreign sequences read back from dumps.

#include "lnormal/ltree.hpp"
#include "lnormal/prob.hpp"
#include "lnormal/scheduler.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

namespace lnormal {

class SequenceSink {
public:
    virtual ~SequenceSink() = default;
    virtual void begin_depth(unsigned /*n*/) {}
    virtual void word(std::span<const Digit> digits) = 0;
    virtual void end_depth(unsigned /*n*/) {}
    /// Raw header lines from dumps (without the leading '#').
    virtual void header(std::string_view /*text*/) {}
};

/// Forwards every event to several sinks in order.
class TeeSink final : public SequenceSink {
public:
    explicit TeeSink(std::vector<SequenceSink*> sinks) : sinks_(std::move(sinks)) {}
    void begin_depth(unsigned n) override
    {
        for (auto* s : sinks_) s->begin_depth(n);
    }
    void word(std::span<const Digit> d) override
    {
        for (auto* s : sinks_) s->word(d);
    }
    void end_depth(unsigned n) override
    {
        for (auto* s : sinks_) s->end_depth(n);
    }
    void header(std::string_view t) override
    {
        for (auto* s : sinks_) s->header(t);
    }

private:
    std::vector<SequenceSink*> sinks_;
};

/// Number of words of depth < n under the block layout, i.e. sum_{m<n} m!.
inline std::uint64_t words_before_depth(unsigned n)
{
    std::uint64_t total = 0, f = 1;
    for (unsigned m = 1; m < n; ++m) {
        f *= m;
        total += f;
    }
    return total;
}

/// Digit-index bookkeeping; all indices are 1-based and ranges inclusive.
struct SequenceLedger {
    std::vector<std::uint64_t> d;       ///< d[n-1] = digits contributed by depth n
    std::vector<std::uint64_t> d_star;  ///< d_star[n-1] = sum_{m<=n} d(m)
    std::map<unsigned, std::vector<std::pair<std::uint64_t, std::uint64_t>>> groups;  ///< I^k(n) for n >= 3
    unsigned complete_depths = 0;       ///< depth blocks holding exactly n! words
    std::uint64_t total_words = 0;
    std::uint64_t total_digits = 0;

    std::uint64_t digits_at(unsigned n) const { return d.at(n - 1); }
    std::uint64_t cumulative(unsigned n) const { return n == 0 ? 0 : d_star.at(n - 1); }

    /// Depth block containing digit i (by position), if recorded.
    std::optional<unsigned> depth_of_index(std::uint64_t i) const
    {
        if (i == 0) return std::nullopt;
        auto it = std::lower_bound(d_star.begin(), d_star.end(), i);
        if (it == d_star.end()) return std::nullopt;
        return static_cast<unsigned>(it - d_star.begin()) + 1;
    }

    std::optional<unsigned> group_of_index(unsigned n, std::uint64_t i) const
    {
        auto it = groups.find(n);
        if (it == groups.end()) return std::nullopt;
        for (std::size_t k = 0; k < it->second.size(); ++k)
            if (it->second[k].first <= i && i <= it->second[k].second) return static_cast<unsigned>(k + 1);
        return std::nullopt;
    }
};

/// Builds a ledger from a word stream using the block layout (n! words of
/// depth n after all shallower blocks); headers and word depths are ignored.
class LedgerBuilder final : public SequenceSink {
public:
    void word(std::span<const Digit> digits) override
    {
        if (in_block_ == block_size_) open_next_block();
        const std::uint64_t len = digits.size();
        const std::uint64_t start = ledger_.total_digits + 1;
        ledger_.total_digits += len;
        ledger_.total_words += 1;
        ledger_.d.back() += len;
        ledger_.d_star.back() += len;
        if (block_ >= 3) {
            auto& g = ledger_.groups[block_];
            const std::uint64_t k = in_block_ / group_size_;
            if (k == g.size()) g.emplace_back(start, start + len - 1);
            else g[k].second += len;
            // empty words are not representable, so ranges never collapse
        }
        ++in_block_;
        if (in_block_ == block_size_) ledger_.complete_depths = block_;
    }

    const SequenceLedger& ledger() const { return ledger_; }
    SequenceLedger take() { return std::move(ledger_); }

private:
    void open_next_block()
    {
        ++block_;
        block_size_ *= block_;
        in_block_ = 0;
        group_size_ = block_ >= 3 ? block_size_ / (std::uint64_t{block_} * (block_ - 1)) : block_size_;
        ledger_.d.push_back(0);
        ledger_.d_star.push_back(ledger_.d_star.empty() ? 0 : ledger_.d_star.back());
    }

    SequenceLedger ledger_;
    unsigned block_ = 0;
    std::uint64_t block_size_ = 1;
    std::uint64_t in_block_ = 1;  // forces the first block to open
    std::uint64_t group_size_ = 1;
};

struct Location {
    unsigned depth = 0;                   ///< depth of the containing word
    std::optional<unsigned> group;        ///< k with i in I^k(n), for n >= 3
    std::uint64_t word_position = 0;      ///< 1-based index j of the word in the concatenation sequence
    Word word;
    std::uint64_t offset = 0;             ///< 1-based position of digit i inside word
    Word prefix;                          ///< digits of the word before i
    Word suffix;                          ///< digits of the word from i on
};

/// The canonical tree sequence for a probability sequence, truncated at max_depth.
class TreeSequence {
public:
    TreeSequence(ProbabilitySequence seq, unsigned max_depth, PlanLimits limits = {})
        : seq_(std::move(seq)), max_depth_(max_depth), limits_(limits)
    {
        if (max_depth == 0) throw std::invalid_argument("max_depth must be >= 1");
        if (max_depth > limits_.max_depth)
            throw ResourceError("max_depth " + std::to_string(max_depth) + " exceeds the plan depth cap "
                                + std::to_string(limits_.max_depth));
    }

    const ProbabilitySequence& sequence() const { return seq_; }
    unsigned max_depth() const { return max_depth_; }

    /// Streams depths 1..max_depth into the sink and returns the ledger of
    /// exactly what was emitted.
    const SequenceLedger& generate(SequenceSink& sink)
    {
        LedgerBuilder builder;
        for (unsigned n = 1; n <= max_depth_; ++n) {
            DepthPlan plan = plan_depth(seq_, n, limits_);
            sink.begin_depth(n);
            const auto& words = plan.generation().words;
            plan.for_each_emitted([&](std::uint32_t w, std::uint64_t) {
                sink.word(words[w].digits());
                builder.word(words[w].digits());
            });
            sink.end_depth(n);
        }
        ledger_ = builder.take();
        return *ledger_;
    }

    /// Ledger of the last generate(); generates into a null sink if needed.
    const SequenceLedger& ledger()
    {
        if (!ledger_) {
            struct Null final : SequenceSink {
                void word(std::span<const Digit>) override {}
            } null;
            generate(null);
        }
        return *ledger_;
    }

    /// Finds the word holding digit i by replaying only the relevant depth.
    Location locate(std::uint64_t i)
    {
        const SequenceLedger& led = ledger();
        auto n = led.depth_of_index(i);
        if (!n) throw std::out_of_range("digit index " + std::to_string(i) + " is outside the generated range");
        Location loc;
        loc.depth = *n;
        loc.group = led.group_of_index(*n, i);
        DepthPlan plan = plan_depth(seq_, *n, limits_);
        const auto& words = plan.generation().words;
        std::uint64_t pos = led.cumulative(*n - 1);  // digits before the block
        std::uint64_t j = words_before_depth(*n);
        bool found = false;
        plan.for_each_emitted([&](std::uint32_t w, std::uint64_t) {
            if (found) return;
            ++j;
            const auto len = words[w].size();
            if (i <= pos + len) {
                found = true;
                loc.word_position = j;
                loc.word = words[w];
                loc.offset = i - pos;
                auto digits = words[w].digits();
                loc.prefix = Word(digits.first(loc.offset - 1));
                loc.suffix = Word(digits.subspan(loc.offset - 1));
            }
            pos += len;
        });
        return loc;
    }

private:
    ProbabilitySequence seq_;
    unsigned max_depth_;
    PlanLimits limits_;
    std::optional<SequenceLedger> ledger_;
};

}  // namespace lnormal
