#pragma once

// Analysis of digit sequences: block frequencies N_A(alpha, T), structural
// verification of tree sequences, and the U_A(n, l) diagnostic.
//
// A match of alpha "at i" means a_i .. a_{i+|alpha|-1} = alpha; a match
// belongs to an index set T when its start i lies in T, even if its tail runs
// past max(T). Counting therefore reads |alpha| - 1 digits beyond each
// checkpoint.

#include "lnormal/genseq.hpp"
#include "lnormal/ltree.hpp"
#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

namespace lnormal {

/// Index set [start, end] (1-based, inclusive) with a display label.
struct IndexRange {
    std::string label;
    std::uint64_t start = 1;
    std::uint64_t end = 0;
    std::uint64_t size() const { return end >= start ? end - start + 1 : 0; }
};

struct CheckpointResult {
    std::string label;
    std::uint64_t start = 1;
    std::uint64_t end = 0;
    std::uint64_t size = 0;         ///< #T
    std::uint64_t occurrences = 0;  ///< matches starting in T
    Rational frequency;             ///< N_A = occurrences / #T
    Rational mu;
    Rational deviation;             ///< N_A - mu
    bool truncated = false;         ///< T extends past the end of the stream
};

struct FrequencyReport {
    Word pattern;
    Rational mu;
    std::vector<CheckpointResult> checkpoints;
};

/// Single-pass counter of (overlapping) pattern occurrences. Ranges are
/// answered from cumulative counts C(p) = #{matches starting at <= p}.
class BlockCounter final : public SequenceSink {
public:
    BlockCounter(std::vector<Word> patterns, std::vector<IndexRange> ranges)
        : patterns_(std::move(patterns)), ranges_(std::move(ranges))
    {
        std::size_t max_len = 0;
        for (const auto& p : patterns_) {
            if (p.empty()) throw std::invalid_argument("patterns must be nonempty words");
            max_len = std::max(max_len, p.size());
        }
        window_.assign(std::max<std::size_t>(max_len, 1), 0);
        for (const auto& r : ranges_) {
            if (r.start == 0 || r.end < r.start) throw std::invalid_argument("empty or 0-based index range '" + r.label + "'");
            positions_.push_back(r.start - 1);
            positions_.push_back(r.end);
        }
        std::sort(positions_.begin(), positions_.end());
        positions_.erase(std::unique(positions_.begin(), positions_.end()), positions_.end());
        states_.resize(patterns_.size());
        for (auto& s : states_) s.snapshots.assign(positions_.size(), 0);
    }

    void word(std::span<const Digit> digits) override
    {
        for (Digit d : digits) push(d);
    }

    void push(Digit d)
    {
        ++length_;
        window_[head_] = d;
        head_ = (head_ + 1) % window_.size();
        for (std::size_t p = 0; p < patterns_.size(); ++p) {
            const auto& pat = patterns_[p];
            const std::size_t k = pat.size();
            if (length_ < k) continue;
            bool hit = true;
            for (std::size_t t = 0; t < k && hit; ++t) {
                // t-th digit of the candidate sits k - t positions behind head
                const std::size_t at = (head_ + window_.size() - (k - t)) % window_.size();
                hit = window_[at] == pat[t];
            }
            if (hit) record(states_[p], length_ - k + 1);
        }
    }

    std::uint64_t length() const { return length_; }

    std::vector<FrequencyReport> finish(const ProbabilitySequence& seq)
    {
        for (auto& s : states_)
            for (; s.next < positions_.size(); ++s.next) s.snapshots[s.next] = s.count;
        std::vector<FrequencyReport> out;
        for (std::size_t p = 0; p < patterns_.size(); ++p) {
            FrequencyReport rep{patterns_[p], mu(seq, patterns_[p]), {}};
            for (const auto& r : ranges_) {
                CheckpointResult c;
                c.label = r.label;
                c.start = r.start;
                c.end = r.end;
                c.size = r.size();
                c.truncated = r.end > length_;
                c.occurrences = cumulative(p, r.end) - cumulative(p, r.start - 1);
                c.frequency = from_u64(c.occurrences, c.size);
                c.mu = rep.mu;
                c.deviation = c.frequency - c.mu;
                rep.checkpoints.push_back(std::move(c));
            }
            out.push_back(std::move(rep));
        }
        return out;
    }

private:
    struct State {
        std::uint64_t count = 0;
        std::size_t next = 0;  // first position whose snapshot is not final
        std::vector<std::uint64_t> snapshots;
    };

    void record(State& s, std::uint64_t start)
    {
        while (s.next < positions_.size() && positions_[s.next] < start) s.snapshots[s.next++] = s.count;
        ++s.count;
    }

    std::uint64_t cumulative(std::size_t p, std::uint64_t pos) const
    {
        auto it = std::lower_bound(positions_.begin(), positions_.end(), pos);
        return states_[p].snapshots[static_cast<std::size_t>(it - positions_.begin())];
    }

    std::vector<Word> patterns_;
    std::vector<IndexRange> ranges_;
    std::vector<std::uint64_t> positions_;
    std::vector<State> states_;
    std::vector<Digit> window_;
    std::size_t head_ = 0;
    std::uint64_t length_ = 0;
};

inline std::vector<IndexRange> prefix_ranges(const std::vector<std::uint64_t>& checkpoints)
{
    std::vector<IndexRange> out;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (i > 0 && checkpoints[i] < checkpoints[i - 1]) throw std::invalid_argument("checkpoints must be sorted ascending");
        out.push_back({"M=" + std::to_string(checkpoints[i]), 1, checkpoints[i]});
    }
    return out;
}

/// N_A(alpha, [1, M]) for each pattern and checkpoint M, in one pass.
inline std::vector<FrequencyReport> count_blocks(std::span<const Digit> stream, const std::vector<Word>& patterns,
                                                 const std::vector<std::uint64_t>& checkpoints,
                                                 const ProbabilitySequence& seq)
{
    BlockCounter counter(patterns, prefix_ranges(checkpoints));
    for (Digit d : stream) counter.push(d);
    return counter.finish(seq);
}

/// Matches of `pattern` whose start lies in [lo, hi] (1-based); may read past hi.
inline std::uint64_t count_starts(std::span<const Digit> stream, const Word& pattern, std::uint64_t lo, std::uint64_t hi)
{
    const std::size_t k = pattern.size();
    std::uint64_t n = 0;
    if (k == 0 || stream.size() < k) return 0;
    hi = std::min<std::uint64_t>(hi, stream.size() - k + 1);
    for (std::uint64_t i = std::max<std::uint64_t>(lo, 1); i <= hi; ++i)
        if (std::equal(pattern.digits().begin(), pattern.digits().end(), stream.begin() + static_cast<std::ptrdiff_t>(i - 1)))
            ++n;
    return n;
}

/// Same result as BlockCounter over an in-memory stream, with the start
/// indices split into contiguous shards counted on separate threads and
/// summed in shard order.
inline std::vector<FrequencyReport> count_blocks_sharded(std::span<const Digit> stream, const std::vector<Word>& patterns,
                                                         const std::vector<IndexRange>& ranges,
                                                         const ProbabilitySequence& seq, unsigned threads)
{
    for (const auto& p : patterns)
        if (p.empty()) throw std::invalid_argument("patterns must be nonempty words");
    threads = std::max(1u, threads);
    const std::uint64_t n = stream.size();
    std::vector<std::pair<std::uint64_t, std::uint64_t>> shards;
    for (unsigned t = 0; t < threads; ++t) {
        std::uint64_t lo = n * t / threads + 1, hi = n * (t + 1) / threads;
        if (lo <= hi) shards.emplace_back(lo, hi);
    }
    // partial[s][p][r] = matches of pattern p starting in shard s and range r
    std::vector<std::vector<std::vector<std::uint64_t>>> partial(
        shards.size(), std::vector<std::vector<std::uint64_t>>(patterns.size(), std::vector<std::uint64_t>(ranges.size())));
    auto work = [&](std::size_t s) {
        for (std::size_t p = 0; p < patterns.size(); ++p)
            for (std::size_t r = 0; r < ranges.size(); ++r) {
                const auto lo = std::max(shards[s].first, ranges[r].start);
                const auto hi = std::min(shards[s].second, ranges[r].end);
                partial[s][p][r] = lo <= hi ? count_starts(stream, patterns[p], lo, hi) : 0;
            }
    };
    std::vector<std::thread> pool;
    for (std::size_t s = 1; s < shards.size(); ++s) pool.emplace_back(work, s);
    if (!shards.empty()) work(0);
    for (auto& t : pool) t.join();

    std::vector<FrequencyReport> out;
    for (std::size_t p = 0; p < patterns.size(); ++p) {
        FrequencyReport rep{patterns[p], mu(seq, patterns[p]), {}};
        for (std::size_t r = 0; r < ranges.size(); ++r) {
            CheckpointResult c;
            c.label = ranges[r].label;
            c.start = ranges[r].start;
            c.end = ranges[r].end;
            c.size = ranges[r].size();
            c.truncated = ranges[r].end > n;
            for (std::size_t s = 0; s < shards.size(); ++s) c.occurrences += partial[s][p][r];
            c.frequency = from_u64(c.occurrences, c.size);
            c.mu = rep.mu;
            c.deviation = c.frequency - c.mu;
            rep.checkpoints.push_back(std::move(c));
        }
        out.push_back(std::move(rep));
    }
    return out;
}

/// Replays a sequence into a sink; used for multi-pass analyses of dumps or
/// regenerated sequences.
using Replay = std::function<void(SequenceSink&)>;

/// Structural checkpoints: [1, d*(n)] for every complete depth, plus every
/// group range I^k(n) for the requested depths.
inline std::vector<IndexRange> structural_ranges(const SequenceLedger& ledger, const std::vector<unsigned>& group_depths)
{
    std::vector<IndexRange> out;
    for (unsigned n = 1; n <= ledger.complete_depths; ++n)
        out.push_back({"d*(" + std::to_string(n) + ")", 1, ledger.cumulative(n)});
    for (unsigned n : group_depths) {
        if (n < 3 || n > ledger.complete_depths)
            throw std::invalid_argument("group ranges need a complete depth >= 3, got " + std::to_string(n));
        const auto& g = ledger.groups.at(n);
        for (std::size_t k = 0; k < g.size(); ++k)
            out.push_back({"I^" + std::to_string(k + 1) + "(" + std::to_string(n) + ")", g[k].first, g[k].second});
    }
    return out;
}

/// N_A(alpha, [1, d*(n)]) per depth and N_A(alpha, I^k(n)) per group of the
/// requested depths. Two passes: ledger, then counting.
inline std::vector<FrequencyReport> checkpoint_report(const Replay& replay, const ProbabilitySequence& seq,
                                                      const std::vector<Word>& patterns,
                                                      const std::vector<unsigned>& group_depths = {})
{
    LedgerBuilder builder;
    replay(builder);
    BlockCounter counter(patterns, structural_ranges(builder.ledger(), group_depths));
    replay(counter);
    return counter.finish(seq);
}

struct UStats {
    std::uint64_t u_size = 0;       ///< |U_A(n, D(alpha))|
    std::uint64_t hits = 0;         ///< members whose in-word suffix starts with alpha
    std::optional<Rational> ratio;  ///< hits / u_size; empty when U is empty
    Rational mu;
};

/// U_A(n, l) = {i : D_c(i) = n, D(p_c(i)) < n - l} with l = D(alpha), where
/// p_c(i) is the part of i's word before i and D_c(i) the depth of that word.
inline UStats u_set_stats(const Replay& replay, const ProbabilitySequence& seq, const Word& alpha, unsigned n)
{
    if (alpha.empty()) throw std::invalid_argument("pattern must be nonempty");
    const std::uint64_t l = depth(alpha);
    UStats st;
    st.mu = mu(seq, alpha);
    struct Scan final : SequenceSink {
        const Word* alpha;
        std::uint64_t n, l;
        UStats* st;
        void word(std::span<const Digit> w) override
        {
            if (depth(w) != n) return;
            std::uint64_t prefix_depth = 0;
            for (std::size_t t = 0; t < w.size(); ++t) {
                if (prefix_depth + l < n) {  // D(p) < n - l without unsigned wrap
                    ++st->u_size;
                    const auto rest = w.subspan(t);
                    if (rest.size() >= alpha->size()
                        && std::equal(alpha->digits().begin(), alpha->digits().end(), rest.begin()))
                        ++st->hits;
                }
                prefix_depth += w[t];
            }
        }
    } scan;
    scan.alpha = &alpha;
    scan.n = n;
    scan.l = l;
    scan.st = &st;
    replay(scan);
    if (st.u_size > 0) st.ratio = from_u64(st.hits, st.u_size);
    return st;
}

// ---------------------------------------------------------------------------
// Structural verification

struct VerificationMargins {
    Rational k1{2};
    Rational k2{5};
};

struct DepthCheck {
    unsigned n = 0;
    std::uint64_t words = 0;           ///< words found in the depth-n block
    bool p1 = true;
    std::string p1_detail;
    bool p2_evaluated = false;
    bool p2 = true;
    Rational max_word_error = 0;       ///< max |e_beta| over G(n)
    Word max_word;                     ///< argmax
    bool p3_evaluated = false;
    bool p3 = true;
    std::vector<Rational> group_max_errors;  ///< max_beta |e^k_beta| per group k
    Rational max_group_error = 0;
    unsigned max_group = 0;
    Word max_group_parent;
};

struct TreePropertyReport {
    VerificationMargins margins;
    std::vector<DepthCheck> depths;
    std::vector<std::string> notes;
    bool pass = false;

    bool p1() const { return std::all_of(depths.begin(), depths.end(), [](auto& d) { return d.p1; }); }
    bool p2() const { return std::all_of(depths.begin(), depths.end(), [](auto& d) { return d.p2; }); }
    bool p3() const { return std::all_of(depths.begin(), depths.end(), [](auto& d) { return d.p3; }); }
};

/// Checks the block layout, per-word counts against n! W(beta) and per-group
/// grandparent counts against (n-2)! W(beta) on any word stream. Word depths
/// are recomputed from digits; dump headers are not trusted.
class TreePropertyVerifier final : public SequenceSink {
public:
    TreePropertyVerifier(ProbabilitySequence seq, VerificationMargins margins = {}, GenerationLimits limits = {})
        : seq_(std::move(seq)), limits_(limits)
    {
        report_.margins = std::move(margins);
    }

    void word(std::span<const Digit> digits) override
    {
        if (in_block_ == block_size_) open_next_block();
        DepthCheck& chk = report_.depths.back();
        const std::uint64_t dw = depth(digits);
        ++chk.words;
        if (dw == block_) {
            const auto idx = canonical_index(digits, dw);
            ++counts_[idx];
            if (block_ >= 3) ++group_tally_[gp_of_[idx]];
        } else {
            if (chk.p1) {
                chk.p1 = false;
                chk.p1_detail = "word " + std::to_string(words_before_depth(block_) + in_block_ + 1) + " ('"
                                + Word(digits).to_string() + "') has depth " + std::to_string(dw) + ", expected "
                                + std::to_string(block_);
            }
            if (dw > block_) ++early_[dw][Word(digits)];
        }
        ++in_block_;
        if (block_ >= 3 && in_block_ % group_size_ == 0) close_group();
        if (in_block_ == block_size_) close_block();
    }

    const TreePropertyReport& finish()
    {
        if (finished_) return report_;
        finished_ = true;
        if (block_ > 0 && in_block_ < block_size_) {
            DepthCheck& chk = report_.depths.back();
            chk.p1 = false;
            chk.p1_detail = "depth " + std::to_string(block_) + " block holds " + std::to_string(in_block_) + " of "
                            + std::to_string(block_size_) + " words";
        }
        if (report_.depths.empty()) report_.notes.push_back("sequence contains no words");
        report_.pass = !report_.depths.empty() && report_.p1() && report_.p2() && report_.p3();
        return report_;
    }

    const TreePropertyReport& report() const { return report_; }

private:
    void open_next_block()
    {
        ++block_;
        if (block_ > limits_.max_level || block_ > 20)
            throw ResourceError("verification beyond depth " + std::to_string(block_ - 1) + " is not supported");
        block_size_ *= block_;
        in_block_ = 0;
        DepthCheck chk;
        chk.n = block_;
        report_.depths.push_back(std::move(chk));
        counts_.assign(std::size_t{1} << (block_ - 1), 0);
        if (block_ >= 3) {
            group_size_ = block_size_ / (std::uint64_t{block_} * (block_ - 1));
            current_group_ = 0;
            const Generation gen = generation(block_, limits_);
            parents_ = generation(block_ - 2, limits_);
            gp_of_.resize(gen.words.size());
            for (std::size_t i = 0; i < gen.words.size(); ++i)
                gp_of_[i] = static_cast<std::uint32_t>(parents_.index_of(grandparent(gen.words[i])));
            group_targets_.clear();
            const Rational f(factorial(block_ - 2));
            for (const auto& b : parents_.words) group_targets_.emplace_back(f * weight(seq_, b));
            group_tally_.assign(parents_.words.size(), 0);
        }
    }

    void close_group()
    {
        DepthCheck& chk = report_.depths.back();
        chk.p3_evaluated = true;
        ++current_group_;
        Rational worst = 0;
        std::size_t worst_b = 0;
        for (std::size_t b = 0; b < group_targets_.size(); ++b) {
            Rational e = abs_of(Rational(from_u64(group_tally_[b])) - group_targets_[b]);
            if (e > worst) {
                worst = e;
                worst_b = b;
            }
        }
        if (worst >= report_.margins.k2) chk.p3 = false;
        if (chk.group_max_errors.empty() || worst > chk.max_group_error) {
            chk.max_group_error = worst;
            chk.max_group = current_group_;
            chk.max_group_parent = parents_.words[worst_b];
        }
        chk.group_max_errors.push_back(std::move(worst));
        std::fill(group_tally_.begin(), group_tally_.end(), 0);
    }

    void close_block()
    {
        DepthCheck& chk = report_.depths.back();
        chk.p2_evaluated = true;
        const Generation gen = generation(block_, limits_);
        if (auto it = early_.find(block_); it != early_.end()) {
            for (const auto& [w, c] : it->second) counts_[gen.index_of(w)] += c;
            early_.erase(it);
        }
        const Rational f(factorial(block_));
        for (std::size_t i = 0; i < gen.words.size(); ++i) {
            Rational e = abs_of(Rational(from_u64(counts_[i])) - f * weight(seq_, gen.words[i]));
            if (e > chk.max_word_error || i == 0) {
                chk.max_word_error = e;
                chk.max_word = gen.words[i];
            }
        }
        if (chk.max_word_error >= report_.margins.k1) chk.p2 = false;
    }

    ProbabilitySequence seq_;
    GenerationLimits limits_;
    TreePropertyReport report_;
    bool finished_ = false;

    unsigned block_ = 0;
    std::uint64_t block_size_ = 1;
    std::uint64_t in_block_ = 1;
    std::uint64_t group_size_ = 1;
    unsigned current_group_ = 0;

    std::vector<std::uint64_t> counts_;  // words of the current block by canonical index
    std::map<std::uint64_t, std::map<Word, std::uint64_t>> early_;  // deeper words seen ahead of their block
    Generation parents_;
    std::vector<std::uint32_t> gp_of_;
    std::vector<Rational> group_targets_;
    std::vector<std::uint64_t> group_tally_;
};

inline TreePropertyReport verify_tree_properties(const Replay& replay, const ProbabilitySequence& seq,
                                                 const VerificationMargins& margins = {})
{
    TreePropertyVerifier verifier(seq, margins);
    replay(verifier);
    return verifier.finish();
}

}  // namespace lnormal
