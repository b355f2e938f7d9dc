#pragma once

// Ordered probability sequences L = (L_d) over the digits d >= 1.
//
// Every sequence exposes L_d = length(d) and the exact tail mass
// tail(d) = 1 - sum_{i<d} L_i in closed form. Presets cover the Luroth
// sequence 1/(d(d+1)), geometric sequences (1-r) r^(d-1), and an explicit
// rational head followed by a geometric tail. Other providers (for example
// the product sequence of a multidimensional system) plug in through
// SequenceProvider and pass the same construction-time validation.

#include "lnormal/rational.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lnormal {

enum class SequenceKind { luroth, geometric, head_plus_geometric, custom };

inline constexpr unsigned kDefaultValidationHorizon = 64;

class SequenceProvider {
public:
    virtual ~SequenceProvider() = default;
    virtual Rational length(std::uint64_t d) const = 0;
    virtual Rational tail(std::uint64_t d) const = 0;
    virtual SequenceKind kind() const { return SequenceKind::custom; }
};

struct BranchProbs {
    Rational p;  ///< probability of the left edge u -> u1
    Rational q;  ///< probability of the right edge u -> u+
};

namespace detail {

class LurothProvider final : public SequenceProvider {
public:
    Rational length(std::uint64_t d) const override
    {
        Rational r(1, from_u64(d) * from_u64(d + 1));
        return r;
    }
    Rational tail(std::uint64_t d) const override { return Rational(1, from_u64(d)); }
    SequenceKind kind() const override { return SequenceKind::luroth; }
};

class GeometricProvider final : public SequenceProvider {
public:
    explicit GeometricProvider(Rational ratio) : ratio_(std::move(ratio)) {}
    Rational length(std::uint64_t d) const override
    {
        Rational r = (1 - ratio_) * pow(ratio_, d - 1);
        return r;
    }
    Rational tail(std::uint64_t d) const override { return pow(ratio_, d - 1); }
    SequenceKind kind() const override { return SequenceKind::geometric; }
    const Rational& ratio() const { return ratio_; }

private:
    Rational ratio_;
};

// L_d = head[d-1] for d <= H, otherwise mass * (1-r) * r^(d-H-1) where
// mass = 1 - sum(head) is the tail left for the geometric part.
class HeadPlusGeometricProvider final : public SequenceProvider {
public:
    HeadPlusGeometricProvider(std::vector<Rational> head, Rational ratio)
        : head_(std::move(head)), ratio_(std::move(ratio))
    {
        prefix_tails_.reserve(head_.size() + 1);
        Rational t = 1;
        prefix_tails_.push_back(t);
        for (const auto& h : head_) {
            t -= h;
            prefix_tails_.push_back(t);
        }
    }
    Rational length(std::uint64_t d) const override
    {
        if (d <= head_.size()) return head_[d - 1];
        Rational r = prefix_tails_.back() * (1 - ratio_) * pow(ratio_, d - head_.size() - 1);
        return r;
    }
    Rational tail(std::uint64_t d) const override
    {
        if (d <= head_.size() + 1) return prefix_tails_[d - 1];
        Rational r = prefix_tails_.back() * pow(ratio_, d - head_.size() - 1);
        return r;
    }
    SequenceKind kind() const override { return SequenceKind::head_plus_geometric; }
    const std::vector<Rational>& head() const { return head_; }
    const Rational& ratio() const { return ratio_; }

private:
    std::vector<Rational> head_;
    Rational ratio_;
    std::vector<Rational> prefix_tails_;  // tail(1) .. tail(H+1)
};

}  // namespace detail

/// Immutable handle to a validated probability sequence. Cheap to copy.
class ProbabilitySequence {
public:
    static ProbabilitySequence luroth(unsigned horizon = kDefaultValidationHorizon)
    {
        return ProbabilitySequence(std::make_shared<detail::LurothProvider>(), horizon);
    }

    /// L_d = (1 - r) r^(d-1); requires 0 < r < 1.
    static ProbabilitySequence geometric(const Rational& ratio, unsigned horizon = kDefaultValidationHorizon)
    {
        check_ratio(ratio);
        return ProbabilitySequence(std::make_shared<detail::GeometricProvider>(ratio), horizon);
    }

    /// The dyadic sequence 1/2^d.
    static ProbabilitySequence dyadic() { return geometric(Rational(1, 2)); }

    /// Explicit head followed by a geometric tail carrying the remaining mass.
    /// Rejects heads that are not positive and nonincreasing, whose sum is not
    /// below 1, or whose last entry is smaller than the first tail value.
    static ProbabilitySequence head_plus_geometric(std::vector<Rational> head, const Rational& ratio,
                                                   unsigned horizon = kDefaultValidationHorizon)
    {
        check_ratio(ratio);
        Rational sum = 0;
        for (std::size_t i = 0; i < head.size(); ++i) {
            if (head[i] <= 0) throw std::invalid_argument("head entries must be positive");
            if (i > 0 && head[i] > head[i - 1])
                throw std::invalid_argument("head entries must be nonincreasing");
            sum += head[i];
        }
        if (sum >= 1) throw std::invalid_argument("head must sum to less than 1");
        if (!head.empty()) {
            Rational first_tail = (1 - sum) * (1 - ratio);
            if (first_tail > head.back())
                throw std::invalid_argument("geometric tail starts above the last head entry ("
                                            + to_string(first_tail) + " > " + to_string(head.back()) + ")");
        }
        return ProbabilitySequence(std::make_shared<detail::HeadPlusGeometricProvider>(std::move(head), ratio),
                                   horizon);
    }

    /// Wraps an external provider; the same checks as the presets run up to `horizon`.
    static ProbabilitySequence from_provider(std::shared_ptr<const SequenceProvider> provider,
                                             unsigned horizon = kDefaultValidationHorizon)
    {
        if (!provider) throw std::invalid_argument("null sequence provider");
        return ProbabilitySequence(std::move(provider), horizon);
    }

    Rational length(std::uint64_t d) const
    {
        check_index(d);
        return provider_->length(d);
    }

    Rational tail(std::uint64_t d) const
    {
        check_index(d);
        return provider_->tail(d);
    }

    /// p_n = L_n / tail(n), q_n = tail(n+1) / tail(n).
    BranchProbs branch_probs(std::uint64_t n) const
    {
        Rational t = tail(n);
        Rational p = length(n) / t;
        Rational q = tail(n + 1) / t;
        return {p, q};
    }

    SequenceKind kind() const { return provider_->kind(); }
    unsigned validation_horizon() const { return horizon_; }
    const SequenceProvider& provider() const { return *provider_; }

    /// Ratio of geometric-type presets; throws for other kinds.
    const Rational& ratio() const
    {
        if (auto* g = dynamic_cast<const detail::GeometricProvider*>(provider_.get())) return g->ratio();
        if (auto* h = dynamic_cast<const detail::HeadPlusGeometricProvider*>(provider_.get())) return h->ratio();
        throw std::logic_error("sequence has no geometric ratio");
    }

    const std::vector<Rational>& head() const
    {
        if (auto* h = dynamic_cast<const detail::HeadPlusGeometricProvider*>(provider_.get())) return h->head();
        throw std::logic_error("sequence has no explicit head");
    }

private:
    ProbabilitySequence(std::shared_ptr<const SequenceProvider> provider, unsigned horizon)
        : provider_(std::move(provider)), horizon_(horizon)
    {
        validate();
    }

    static void check_ratio(const Rational& r)
    {
        if (r <= 0 || r >= 1) throw std::invalid_argument("geometric ratio must lie in (0, 1), got " + to_string(r));
    }

    static void check_index(std::uint64_t d)
    {
        if (d == 0) throw std::out_of_range("digit index must be >= 1");
    }

    void validate() const
    {
        Rational prev_len;
        Rational t = provider_->tail(1);
        if (t != 1) throw std::invalid_argument("tail(1) must equal 1");
        for (std::uint64_t d = 1; d <= horizon_; ++d) {
            Rational len = provider_->length(d);
            if (len <= 0) throw std::invalid_argument("L_" + std::to_string(d) + " is not positive");
            if (len >= 1) throw std::invalid_argument("L_" + std::to_string(d) + " is not below 1");
            if (d > 1 && len > prev_len)
                throw std::invalid_argument("sequence increases at d=" + std::to_string(d));
            Rational next = provider_->tail(d + 1);
            if (next != t - len) throw std::invalid_argument("tail identity fails at d=" + std::to_string(d));
            if (next <= 0) throw std::invalid_argument("sequence has finite support (tail vanishes at d="
                                                       + std::to_string(d + 1) + ")");
            prev_len = len;
            t = next;
        }
    }

    std::shared_ptr<const SequenceProvider> provider_;
    unsigned horizon_;
};

}  // namespace lnormal
