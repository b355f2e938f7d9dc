#include "support.hpp"

#include <gtest/gtest.h>

using namespace lnormal;
using namespace lnormal::testing;

namespace {

Rational q(long num, long den)
{
    Rational r(num, den);
    r.canonicalize();
    return r;
}

GlsSystem luroth() { return GlsSystem::right_to_left(ProbabilitySequence::luroth()); }
GlsSystem dyadic() { return GlsSystem::right_to_left(ProbabilitySequence::dyadic()); }

// T by the interval definition, scanning d upward from explicit endpoints.
Rational transform_oracle(const ProbabilitySequence& seq, const std::vector<bool>& flips, const Rational& x)
{
    Rational r = 1;
    for (Digit d = 1; d < 100000; ++d) {
        Rational len = seq.length(d);
        Rational l = r - len;
        if (l < x && x <= r) {
            bool e = d <= flips.size() && flips[d - 1];
            Rational sign = e ? -1 : 1;
            return (sign * (x - l) + (e ? len : Rational(0))) / len;
        }
        r = l;
    }
    return 0;
}

std::vector<Rational> random_points(std::uint64_t seed, int count)
{
    auto gen = rng(seed);
    std::uniform_int_distribution<long> den(2, 10000);
    std::vector<Rational> out;
    while (static_cast<int>(out.size()) < count) {
        long b = den(gen);
        long a = std::uniform_int_distribution<long>(1, b - 1)(gen);
        out.push_back(q(a, b));
    }
    return out;
}

}  // namespace

TEST(Layout, Endpoints)
{
    auto lu = luroth();
    EXPECT_EQ(lu.left(1), q(1, 2));
    EXPECT_EQ(lu.left(2), q(1, 3));
    EXPECT_EQ(dyadic().left(2), q(1, 4));
    for (const auto& p : presets()) {
        auto s = GlsSystem::right_to_left(p.seq);
        EXPECT_EQ(s.right(1), 1);
        for (Digit d = 1; d <= 100; ++d) {
            EXPECT_EQ(s.right(d) - s.left(d), s.length(d));
            EXPECT_EQ(s.right(d + 1), s.left(d));
            EXPECT_GT(s.left(d), 0);
        }
    }
    for (Digit d = 1; d <= 50; ++d) {
        EXPECT_EQ(lu.left(d), q(1, d + 1));
        EXPECT_EQ(lu.right(d), q(1, d));
        EXPECT_FALSE(lu.flip(d));
    }
}

TEST(Transform, Examples)
{
    auto lu = luroth();
    EXPECT_EQ(lu.transform(q(2, 5)), q(2, 5));
    EXPECT_EQ(lu.transform(q(3, 4)), q(1, 2));
    EXPECT_EQ(lu.transform(0), 0);
    EXPECT_EQ(dyadic().transform(0), 0);
    EXPECT_EQ(lu.transform(1), 1);
    EXPECT_THROW(lu.transform(q(-1, 2)), std::domain_error);
    EXPECT_THROW(lu.transform(q(3, 2)), std::domain_error);
}

TEST(Transform, LurothClosedForm)
{
    auto lu = luroth();
    for (const auto& x : random_points(99, 100)) {
        Integer f = floor_of(Rational(1 / x));
        Rational fr(f);
        EXPECT_EQ(lu.transform(x), fr * (fr + 1) * x - fr) << to_string(x);
    }
}

TEST(Transform, MatchesIntervalScan)
{
    auto seqs = presets();
    seqs.push_back({"hpg", ProbabilitySequence::head_plus_geometric({q(1, 2), q(1, 6)}, q(1, 2))});
    const std::vector<bool> flips{true, false, true, true};
    for (const auto& p : seqs) {
        for (const auto& f : {std::vector<bool>{}, flips}) {
            auto s = GlsSystem::right_to_left(p.seq, f);
            for (const auto& x : random_points(5, 60)) EXPECT_EQ(s.transform(x), transform_oracle(p.seq, f, x)) << p.name << " " << to_string(x);
            // interval endpoints exercise the half-open convention
            for (Digit d = 1; d <= 12; ++d) {
                EXPECT_EQ(s.transform(s.right(d)), transform_oracle(p.seq, f, s.right(d)));
                EXPECT_EQ(*s.digit_of(s.right(d)), d);
            }
        }
    }
}

TEST(Extract, Examples)
{
    auto lu = luroth();
    auto a = lu.extract_digits(q(2, 5), 3);
    EXPECT_EQ(a.digits, (std::vector<DigitSign>{{2, false}, {2, false}, {2, false}}));
    EXPECT_EQ(a.stop, StopReason::complete);

    auto b = lu.extract_digits(0, 5);
    EXPECT_TRUE(b.digits.empty());
    EXPECT_EQ(b.stop, StopReason::left_partition);

    auto c = lu.extract_digits(q(3, 4), 2);
    EXPECT_EQ(c.digits, (std::vector<DigitSign>{{1, false}, {2, false}}));
}

TEST(Extract, StopsWhenOrbitLeaves)
{
    // right endpoints map to 1, which is fixed: 1/2 has digits 2, 1, 1, 1
    auto dy = dyadic();
    auto r = dy.extract_digits(q(1, 2), 4);
    EXPECT_EQ(r.stop, StopReason::complete);
    EXPECT_EQ(r.digits, (std::vector<DigitSign>{{2, false}, {1, false}, {1, false}, {1, false}}));
    // a flipped interval sends its right endpoint to 0
    auto flipped = GlsSystem::right_to_left(ProbabilitySequence::dyadic(), {true});
    auto s = flipped.extract_digits(1, 3);
    ASSERT_EQ(s.digits.size(), 1u);
    EXPECT_EQ(s.digits[0], (DigitSign{1, true}));
    EXPECT_EQ(s.stop, StopReason::left_partition);
}

TEST(Extract, Conjugacy)
{
    const std::vector<bool> flips{false, true, true};
    for (const auto& p : presets()) {
        auto s = GlsSystem::right_to_left(p.seq, flips);
        for (const auto& x : random_points(17, 50)) {
            auto full = s.extract_digits(x, 8);
            auto shifted = s.extract_digits(s.transform(x), 7);
            if (full.stop != StopReason::complete || shifted.stop != StopReason::complete) continue;
            EXPECT_EQ(std::vector<DigitSign>(full.digits.begin() + 1, full.digits.end()), shifted.digits);
        }
    }
}

TEST(Project, SeriesTerms)
{
    auto lu = luroth();
    auto digits = digits_of(file_replay(fixture_path("luroth_depth4.txt")));
    std::vector<Digit> first(digits.begin(), digits.begin() + 5);
    EXPECT_EQ(first, (std::vector<Digit>{1, 1, 1, 2, 1}));
    auto r = lu.project_digits(first);
    EXPECT_EQ(r.lower, q(1, 2) + q(1, 4) + q(1, 8) + q(1, 24) + q(1, 96));
    EXPECT_EQ(r.width, q(1, 2) * q(1, 2) * q(1, 2) * q(1, 6) * q(1, 2));
}

TEST(Project, FixtureDecimals)
{
    auto a = luroth().project_digits(digits_of(file_replay(fixture_path("luroth_depth4.txt"))));
    EXPECT_GE(a.certified_places, 4u);
    EXPECT_EQ(a.decimal().substr(0, 6), "0.9374");
    EXPECT_LT(a.width, q(1, 1000000));
    auto b = dyadic().project_digits(digits_of(file_replay(fixture_path("dyadic_depth4.txt"))));
    EXPECT_GE(b.certified_places, 4u);
    EXPECT_EQ(b.decimal().substr(0, 6), "0.9373");
    EXPECT_LT(b.width, q(1, 1000000));
}

TEST(Project, AllOnes)
{
    auto lu = luroth();
    for (unsigned k = 0; k <= 30; ++k) {
        auto r = lu.project_digits(std::vector<Digit>(k, 1));
        EXPECT_EQ(r.lower, 1 - pow(q(1, 2), k));
        EXPECT_EQ(r.width, pow(q(1, 2), k));
    }
}

TEST(Project, EmptyPrefixIsUnitInterval)
{
    auto r = dyadic().project({});
    EXPECT_EQ(r.lower, 0);
    EXPECT_EQ(r.width, 1);
    EXPECT_EQ(r.certified_places, 0u);
}

TEST(Project, SignMismatch)
{
    auto s = GlsSystem::right_to_left(ProbabilitySequence::dyadic(), {false, true});
    EXPECT_THROW(s.project({{1, false}, {2, false}}), std::invalid_argument);
    EXPECT_THROW(s.project({{1, true}}), std::invalid_argument);
    EXPECT_NO_THROW(s.project({{1, false}, {2, true}}));
    EXPECT_THROW(s.project({{0, false}}), std::invalid_argument);
}

TEST(Project, RoundTripContainsPoint)
{
    const std::vector<std::vector<bool>> flag_sets{{}, {true, false, true}, {false, true}};
    auto seqs = presets();
    for (const auto& p : seqs)
        for (const auto& flags : flag_sets) {
            auto s = GlsSystem::right_to_left(p.seq, flags);
            for (const auto& x : random_points(31, 100)) {
                auto e = s.extract_digits(x, 20);
                auto r = s.project(e.digits);
                EXPECT_TRUE(r.contains(x)) << p.name << " " << to_string(x);
                Rational w = 1;
                for (const auto& ds : e.digits) w *= s.length(ds.digit);
                EXPECT_EQ(r.width, w);
            }
        }
}

// Cylinders nest and shrink by exactly L_d per appended digit.
TEST(Project, Telescoping)
{
    auto gen = rng(3);
    std::uniform_int_distribution<Digit> digit(1, 6);
    const std::vector<bool> flags{true, false, false, true, true};
    for (const auto& p : presets()) {
        auto s = GlsSystem::right_to_left(p.seq, flags);
        for (int t = 0; t < 40; ++t) {
            std::vector<Digit> ds;
            auto prev = s.project_digits(ds);
            for (int i = 0; i < 12; ++i) {
                ds.push_back(digit(gen));
                auto next = s.project_digits(ds);
                EXPECT_EQ(next.width, prev.width * s.length(ds.back()));
                EXPECT_GE(next.lower, prev.lower);
                EXPECT_LE(next.upper(), prev.upper());
                prev = next;
            }
        }
    }
}

// The partial series summed term by term, as written.
TEST(Project, MatchesSequentialSeries)
{
    auto gen = rng(8);
    std::uniform_int_distribution<Digit> digit(1, 7);
    const std::vector<bool> flags{true, false, true, false, false, true};
    for (const auto& p : presets()) {
        auto s = GlsSystem::right_to_left(p.seq, flags);
        for (std::size_t len : {1u, 2u, 3u, 7u, 64u, 301u}) {
            std::vector<Digit> ds(len);
            for (auto& d : ds) d = digit(gen);
            Rational sum = 0, width = 1;
            bool odd = false;
            for (Digit d : ds) {
                Rational term = (s.flip(d) ? s.right(d) : s.left(d)) * width;
                sum += odd ? Rational(-term) : term;
                width *= s.length(d);
                odd ^= s.flip(d);
            }
            auto r = s.project_digits(ds);
            EXPECT_EQ(r.width, width);
            EXPECT_EQ(r.lower, odd ? Rational(sum - width) : sum) << p.name << " length " << len;
        }
    }
}

// Every point strictly inside the projected interval expands with the prefix.
TEST(Project, InteriorPointsShareThePrefix)
{
    const std::vector<bool> flags{false, true, true};
    for (const auto& p : presets()) {
        auto s = GlsSystem::right_to_left(p.seq, flags);
        for (const auto& ds : std::vector<std::vector<Digit>>{{1}, {2, 1}, {3, 2, 2}, {1, 1, 4, 2}, {2, 3, 1, 1, 2}}) {
            auto r = s.project_digits(ds);
            for (long k = 1; k < 10; ++k) {
                Rational x = r.lower + r.width * q(k, 10);
                auto e = s.extract_digits(x, ds.size());
                ASSERT_EQ(e.digits.size(), ds.size());
                for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(e.digits[i].digit, ds[i]);
            }
        }
    }
}

TEST(Certified, DecimalPlaces)
{
    EXPECT_EQ(certified_decimal_places(q(9374, 10000), q(93745, 100000)), 4u);
    EXPECT_EQ(certified_decimal_places(q(1, 3), q(1, 3)), 64u);
    EXPECT_EQ(certified_decimal_places(q(1, 10), q(2, 10)), 0u);
    EXPECT_EQ(certified_decimal_places(q(1, 3), q(1, 3), 5), 5u);
    ProjectionResult r{q(1, 3), q(1, 1000), 0};
    r.certified_places = certified_decimal_places(r.lower, r.upper());
    EXPECT_EQ(r.certified_places, 2u);
    EXPECT_EQ(r.decimal(), "0.33");
}
