#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

using namespace lnormal;
using namespace lnormal::testing;

namespace {

Rational q(long num, long den)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

std::map<std::string, std::uint64_t> count_map(const DepthPlan& p)
{
    std::map<std::string, std::uint64_t> out;
    for (std::size_t i = 0; i < p.generation().words.size(); ++i) out[p.generation().words[i].to_string()] = p.counts()[i];
    return out;
}

std::vector<Word> depth_block(const std::vector<Word>& stream, unsigned n)
{
    std::vector<Word> out;
    for (const Word& u : stream)
        if (depth(u) == n) out.push_back(u);
    return out;
}

// Hamilton apportionment written out naively: repeatedly hand a seat to the
// largest remaining fraction, earliest index first.
std::vector<std::uint64_t> naive_hamilton(const std::vector<Rational>& quotas, std::uint64_t total)
{
    std::vector<std::uint64_t> seats;
    std::vector<Rational> frac;
    std::uint64_t used = 0;
    for (const auto& x : quotas) {
        Integer f = floor_of(x);
        seats.push_back(f.get_ui());
        frac.push_back(x - Rational(f));
        used += f.get_ui();
    }
    std::vector<bool> taken(quotas.size());
    while (used < total) {
        std::size_t best = quotas.size();
        for (std::size_t i = 0; i < quotas.size(); ++i)
            if (!taken[i] && (best == quotas.size() || frac[i] > frac[best])) best = i;
        taken[best] = true;
        ++seats[best];
        ++used;
    }
    return seats;
}

// Emission order from first principles: grandchildren grouped by grandparent
// found by brute-force inversion of children(), then dealt round-robin.
std::vector<std::pair<Word, std::uint64_t>> oracle_emission(const ProbabilitySequence& seq, unsigned n)
{
    auto g = compositions(n);
    std::vector<Rational> quotas;
    for (const Word& u : g) quotas.push_back(Rational(factorial(n)) * path_weight(seq, u));
    auto counts = naive_hamilton(quotas, factorial(n).get_ui());
    std::vector<Word> layout;
    if (n < 3) {
        for (std::size_t i = 0; i < g.size(); ++i)
            for (std::uint64_t c = 0; c < counts[i]; ++c) layout.push_back(g[i]);
        std::vector<std::pair<Word, std::uint64_t>> out;
        for (auto& u : layout) out.emplace_back(u, 0);
        return out;
    }
    for (const Word& beta : compositions(n - 2)) {
        std::vector<Word> family;
        auto [a, b] = children(beta);
        for (const Word& c : {a, b}) {
            auto [x, y] = children(c);
            family.push_back(x);
            family.push_back(y);
        }
        std::sort(family.begin(), family.end());
        for (const Word& u : family) {
            auto i = std::find(g.begin(), g.end(), u) - g.begin();
            for (std::uint64_t c = 0; c < counts[i]; ++c) layout.push_back(u);
        }
    }
    const std::uint64_t groups = std::uint64_t{n} * (n - 1);
    std::vector<std::vector<Word>> dealt(groups);
    for (std::size_t j = 0; j < layout.size(); ++j) dealt[j % groups].push_back(layout[j]);
    std::vector<std::pair<Word, std::uint64_t>> out;
    for (std::uint64_t k = 0; k < groups; ++k)
        for (auto& u : dealt[k]) out.emplace_back(u, k + 1);
    return out;
}

}  // namespace

TEST(PlanDepth, LurothDepthFourCounts)
{
    auto p = plan_depth(ProbabilitySequence::luroth(), 4);
    std::map<std::string, std::uint64_t> expected{{"1,1,1,1", 3}, {"1,1,2", 3}, {"1,2,1", 2}, {"1,3", 4},
                                                  {"2,1,1", 2},   {"2,2", 2},   {"3,1", 2},   {"4", 6}};
    EXPECT_EQ(count_map(p), expected);
    EXPECT_EQ(p.total_words(), 24u);
}

TEST(PlanDepth, DyadicDepthThreeCounts)
{
    auto p = plan_depth(ProbabilitySequence::dyadic(), 3);
    std::map<std::string, std::uint64_t> expected{{"1,1,1", 2}, {"1,2", 2}, {"2,1", 1}, {"3", 1}};
    EXPECT_EQ(count_map(p), expected);
}

TEST(PlanDepth, LurothDepthThreeMatchesHandChoice)
{
    auto p = plan_depth(ProbabilitySequence::luroth(), 3);
    std::map<std::string, std::uint64_t> expected{{"1,1,1", 2}, {"1,2", 1}, {"2,1", 1}, {"3", 2}};
    EXPECT_EQ(count_map(p), expected);
}

TEST(PlanDepth, DepthOne)
{
    for (const auto& pr : presets()) {
        auto p = plan_depth(pr.seq, 1);
        EXPECT_EQ(p.emission(), words({"1"}));
        EXPECT_FALSE(p.group_count().has_value());
    }
}

TEST(PlanDepth, DepthFourPairTablesMatchFixtures)
{
    auto lu = depth_block(words_of(file_replay(fixture_path("luroth_depth4.txt"))), 4);
    EXPECT_EQ(plan_depth(ProbabilitySequence::luroth(), 4).emission(), lu);
    auto dy = depth_block(words_of(file_replay(fixture_path("dyadic_depth4.txt"))), 4);
    EXPECT_EQ(plan_depth(ProbabilitySequence::dyadic(), 4).emission(), dy);
}

TEST(PlanDepth, MatchesOracle)
{
    auto seqs = presets();
    seqs.push_back({"hpg", ProbabilitySequence::head_plus_geometric({q(2, 5), q(1, 5)}, q(1, 2))});
    for (const auto& pr : seqs) {
        for (unsigned n = 1; n <= 7; ++n) {
            auto p = plan_depth(pr.seq, n);
            std::vector<std::pair<Word, std::uint64_t>> got;
            p.for_each_emitted([&](std::uint32_t w, std::uint64_t k) { got.emplace_back(p.generation().words[w], k); });
            EXPECT_EQ(got, oracle_emission(pr.seq, n)) << pr.name << " n=" << n;
        }
    }
}

TEST(PlanDepth, GroupShape)
{
    for (const auto& pr : presets()) {
        for (unsigned n = 3; n <= 9; ++n) {
            auto p = plan_depth(pr.seq, n);
            EXPECT_EQ(*p.group_count(), std::uint64_t{n} * (n - 1));
            EXPECT_EQ(*p.group_size(), factorial(n - 2).get_ui());
            std::vector<std::uint64_t> sizes(*p.group_count() + 1);
            std::uint64_t last = 0;
            p.for_each_emitted([&](std::uint32_t, std::uint64_t k) {
                EXPECT_GE(k, last);
                last = k;
                ++sizes[k];
            });
            for (std::uint64_t k = 1; k <= *p.group_count(); ++k) EXPECT_EQ(sizes[k], *p.group_size());
        }
    }
}

TEST(PlanDepth, Deterministic)
{
    for (const auto& pr : presets()) {
        auto a = plan_depth(pr.seq, 8);
        auto b = plan_depth(pr.seq, 8);
        EXPECT_EQ(a.counts(), b.counts());
        EXPECT_EQ(a.emission_indices(), b.emission_indices());
    }
}

TEST(PlanDepth, Limits)
{
    EXPECT_THROW(plan_depth(ProbabilitySequence::luroth(), 0), std::invalid_argument);
    EXPECT_THROW(plan_depth(ProbabilitySequence::luroth(), 21), ResourceError);
    PlanLimits tight;
    tight.generation.max_level = 5;
    EXPECT_THROW(plan_depth(ProbabilitySequence::luroth(), 6, tight), ResourceError);
}

TEST(LargestRemainder, Basics)
{
    EXPECT_EQ(largest_remainder({q(3, 2), q(3, 2), q(3, 2), q(3, 2)}, 6), (std::vector<std::uint64_t>{2, 2, 1, 1}));
    EXPECT_EQ(largest_remainder({q(1, 3), q(2, 3), q(2, 1)}, 3), (std::vector<std::uint64_t>{0, 1, 2}));
    EXPECT_EQ(largest_remainder({q(5, 1)}, 5), (std::vector<std::uint64_t>{5}));
    EXPECT_THROW(largest_remainder({q(-1, 2), q(3, 2)}, 1), std::invalid_argument);
}

TEST(LargestRemainder, MatchesNaive)
{
    auto gen = rng(7);
    std::uniform_int_distribution<int> size(1, 12), num(0, 60);
    for (int t = 0; t < 300; ++t) {
        std::vector<long> raw(size(gen));
        long sum = 0;
        for (auto& x : raw) sum += (x = num(gen));
        if (sum == 0) continue;
        const std::uint64_t total = 20;
        std::vector<Rational> quotas;
        for (long x : raw) quotas.push_back(q(x * long(total), sum));
        EXPECT_EQ(largest_remainder(quotas, total), naive_hamilton(quotas, total));
    }
}

TEST(PlanErrors, Examples)
{
    auto lu = ProbabilitySequence::luroth();
    auto p4 = plan_depth(lu, 4);
    auto e4 = plan_errors(p4, lu);
    EXPECT_EQ(e4.word_errors[p4.generation().index_of(Word{4})], 0);
    auto dy = ProbabilitySequence::dyadic();
    auto d4 = plan_errors(plan_depth(dy, 4), dy);
    for (const auto& e : d4.word_errors) EXPECT_EQ(e, 0);
    auto p3 = plan_depth(lu, 3);
    auto e3 = plan_errors(p3, lu);
    EXPECT_EQ(e3.word_errors[p3.generation().index_of(Word{3})], 0);
    EXPECT_EQ(e3.word_errors[p3.generation().index_of(Word{1, 2})], q(-1, 2));
    EXPECT_EQ(e3.word_errors[p3.generation().index_of(Word{1, 1, 1})], q(1, 2));
}

TEST(PlanErrors, IntegralQuotasAreExact)
{
    // dyadic weights at depth n are 2^-(n-1), so n! W is integral whenever 2^(n-1) | n!
    auto dy = ProbabilitySequence::dyadic();
    for (unsigned n : {1u, 2u, 4u}) {
        auto p = plan_depth(dy, n);
        auto e = plan_errors(p, dy);
        EXPECT_EQ(e.max_word_error, 0) << n;
        for (std::size_t i = 0; i < p.counts().size(); ++i)
            EXPECT_EQ(Rational(p.counts()[i]), Rational(factorial(n)) * weight(dy, p.generation().words[i]));
    }
}

TEST(PlanErrors, BoundsUpToDepthTen)
{
    for (const auto& pr : presets()) {
        for (unsigned n = 1; n <= 10; ++n) {
            auto e = plan_errors(plan_depth(pr.seq, n), pr.seq);
            EXPECT_LE(e.max_word_error, 1) << pr.name << " n=" << n;
            EXPECT_LT(e.max_group_error, 2) << pr.name << " n=" << n;
        }
    }
}

// Oracle for e^k: tally grandparents group by group from the emitted words.
TEST(PlanErrors, GroupErrorsMatchDirectTally)
{
    for (const auto& pr : presets()) {
        for (unsigned n = 3; n <= 6; ++n) {
            auto p = plan_depth(pr.seq, n);
            auto e = plan_errors(p, pr.seq);
            auto parents = compositions(n - 2);
            std::map<std::pair<std::uint64_t, Word>, std::uint64_t> tally;
            p.for_each_emitted([&](std::uint32_t w, std::uint64_t k) { ++tally[{k, grandparent(p.generation().words[w])}]; });
            for (std::uint64_t k = 1; k <= *p.group_count(); ++k)
                for (std::size_t b = 0; b < parents.size(); ++b) {
                    Rational expected = Rational(tally[{k, parents[b]}]) - Rational(factorial(n - 2)) * path_weight(pr.seq, parents[b]);
                    EXPECT_EQ(e.group_errors[k - 1][b], expected);
                }
        }
    }
}
