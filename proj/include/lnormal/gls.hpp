#pragma once

// One-dimensional GLS number systems. Digit d owns the half-open interval
// (l_d, r_d] of length L_d and a flip flag eps_d. The transformation maps
// each interval affinely onto [0, 1] (reversing orientation when eps_d = 1)
// and sends points outside every interval to 0.

#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lnormal {

struct DigitSign {
    Digit digit = 1;
    bool sign = false;
    friend bool operator==(const DigitSign&, const DigitSign&) = default;
};

enum class StopReason { complete, left_partition };

struct ExtractResult {
    std::vector<DigitSign> digits;
    StopReason stop = StopReason::complete;
};

struct ProjectionResult {
    Rational lower = 0;
    Rational width = 1;
    unsigned certified_places = 0;

    Rational upper() const { return lower + width; }
    bool contains(const Rational& x) const { return lower <= x && x <= upper(); }
    /// The certified decimal digits of every point in [lower, lower + width].
    std::string decimal() const { return decimal_truncated(lower, certified_places); }
};

/// Number of leading decimal places shared by every point of [lower, upper].
inline unsigned certified_decimal_places(const Rational& lower, const Rational& upper, unsigned max_places = 64)
{
    Integer scale = 1;
    if (floor_of(lower) != floor_of(upper)) return 0;
    unsigned k = 0;
    while (k < max_places) {
        scale *= 10;
        if (floor_of(Rational(lower * scale)) != floor_of(Rational(upper * scale))) break;
        ++k;
    }
    return k;
}

class GlsSystem {
public:
    /// Intervals laid out from the right edge in decreasing size:
    /// r_1 = 1, l_d = r_d - L_d, r_{d+1} = l_d. Flags eps_d come from `flips`
    /// (eps_d = flips[d-1], and 0 beyond the list).
    static GlsSystem right_to_left(ProbabilitySequence seq, std::vector<bool> flips = {})
    {
        return GlsSystem(std::move(seq), std::move(flips));
    }

    const ProbabilitySequence& sequence() const { return seq_; }
    const std::vector<bool>& flips() const { return flips_; }

    // With this layout r_d = tail(d) and l_d = tail(d+1).
    Rational left(Digit d) const { return seq_.tail(std::uint64_t{d} + 1); }
    Rational right(Digit d) const { return seq_.tail(d); }
    Rational length(Digit d) const { return seq_.length(d); }
    bool flip(Digit d) const
    {
        if (d == 0) throw std::out_of_range("digit must be >= 1");
        return d <= flips_.size() && flips_[d - 1];
    }

    /// d with x in (l_d, r_d], or nothing when x lies outside every interval.
    std::optional<Digit> digit_of(const Rational& x) const
    {
        check_unit(x);
        if (x <= 0) return std::nullopt;
        if (seq_.kind() == SequenceKind::luroth) {
            // (1/(d+1), 1/d] holds x exactly when d = floor(1/x)
            return static_cast<Digit>(to_u64(floor_of(Rational(1 / x))));
        }
        // smallest d with l_d = tail(d+1) < x; tails decrease to 0
        std::uint64_t hi = 1;
        while (left(static_cast<Digit>(hi)) >= x) {
            if (hi > (std::uint64_t{1} << 31)) throw ResourceError("digit lookup exceeded 2^31");
            hi *= 2;
        }
        std::uint64_t lo = hi / 2 + 1;
        if (hi == 1) lo = 1;
        while (lo < hi) {
            std::uint64_t mid = lo + (hi - lo) / 2;
            if (left(static_cast<Digit>(mid)) < x) hi = mid;
            else lo = mid + 1;
        }
        return static_cast<Digit>(lo);
    }

    Rational transform(const Rational& x) const
    {
        auto d = digit_of(x);
        if (!d) return Rational(0);
        Rational len = length(*d);
        Rational offset = x - left(*d);
        Rational y = flip(*d) ? Rational((len - offset) / len) : Rational(offset / len);
        return y;
    }

    /// Up to k (digit, sign) pairs of x; stops early if the orbit leaves the partition.
    ExtractResult extract_digits(Rational x, std::size_t k) const
    {
        ExtractResult out;
        out.digits.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            auto d = digit_of(x);
            if (!d) {
                out.stop = StopReason::left_partition;
                break;
            }
            out.digits.push_back({*d, flip(*d)});
            x = transform(x);
        }
        return out;
    }

    /// The cylinder of points whose expansion starts with `prefix`. Signs must
    /// match the system's flags. The partial series
    ///   sum_n (-1)^{s_1+...+s_{n-1}} (l_{a_n} + s_n L_{a_n}) prod_{i<n} L_{a_i}
    /// gives one endpoint; the other lies prod L_{a_i} away, on the side
    /// given by the parity of the sign sum.
    ///
    /// Each entry is the affine map y -> c + sigma L y (c = l, or r when
    /// flipped); the maps are composed pairwise in a balanced tree so long
    /// prefixes cost O(M(n) log n) instead of growing the sum term by term.
    ProjectionResult project(const std::vector<DigitSign>& prefix, unsigned max_places = 64) const
    {
        std::vector<std::pair<Rational, Rational>> maps;
        maps.reserve(prefix.size());
        for (std::size_t i = 0; i < prefix.size(); ++i) {
            const auto& [d, s] = prefix[i];
            if (d == 0) throw std::invalid_argument("digit must be >= 1");
            if (s != flip(d))
                throw std::invalid_argument("sign of entry " + std::to_string(i + 1) + " does not match eps_"
                                            + std::to_string(d));
            Rational len = length(d);
            maps.emplace_back(s ? right(d) : left(d), s ? Rational(-len) : len);
        }
        while (maps.size() > 1) {
            std::size_t out = 0;
            for (std::size_t i = 0; i + 1 < maps.size(); i += 2) {
                auto& [a, b] = maps[i];
                const auto& [c, e] = maps[i + 1];
                maps[out++] = {a + b * c, b * e};
            }
            if (maps.size() % 2) maps[out++] = std::move(maps.back());
            maps.resize(out);
        }
        // B carries the signed width: negative exactly when the sign sum is odd
        Rational sum = maps.empty() ? Rational(0) : maps[0].first;
        Rational signed_width = maps.empty() ? Rational(1) : maps[0].second;
        ProjectionResult r;
        r.lower = signed_width < 0 ? Rational(sum + signed_width) : sum;
        r.width = abs_of(signed_width);
        r.certified_places = certified_decimal_places(r.lower, r.upper(), max_places);
        return r;
    }

    /// Projection of a digit prefix with signs derived from the system.
    ProjectionResult project_digits(const std::vector<Digit>& digits, unsigned max_places = 64) const
    {
        return project(with_signs(digits), max_places);
    }

    std::vector<DigitSign> with_signs(const std::vector<Digit>& digits) const
    {
        std::vector<DigitSign> out;
        out.reserve(digits.size());
        for (Digit d : digits) out.push_back({d, flip(d)});
        return out;
    }

private:
    GlsSystem(ProbabilitySequence seq, std::vector<bool> flips) : seq_(std::move(seq)), flips_(std::move(flips)) {}

    static void check_unit(const Rational& x)
    {
        if (x < 0 || x > 1) throw std::domain_error("point " + to_string(x) + " is outside [0, 1]");
    }

    ProbabilitySequence seq_;
    std::vector<bool> flips_;
};

}  // namespace lnormal
