#pragma once

// N-dimensional GLS systems. Index vectors (i_1, ..., i_N) are ordered by the
// product of their coordinate lengths (largest first, ties by smallest index
// vector in lexicographic order); the position in that order is the
// composite digit. The induced product sequence is an ordinary probability
// sequence, so the tree-sequence pipeline runs on it unchanged.

#include "lnormal/gls.hpp"
#include "lnormal/prob.hpp"
#include "lnormal/rational.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <queue>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace lnormal {

struct BijectionEntry {
    std::vector<Digit> index;  ///< f^{-1}(d), 1-based coordinates
    Rational product;          ///< prod_k L^{(k)}_{i_k}
};

namespace detail {

// Best-first walk over N^N from (1, ..., 1). Popping the frontier maximum and
// pushing its coordinate increments yields the entries in order because
// every coordinate sequence is nonincreasing. Shared between a ProductSystem
// and the sequences derived from it; growth is serialized by the mutex.
class BijectionEnumerator {
public:
    explicit BijectionEnumerator(std::vector<ProbabilitySequence> coords) : coords_(std::move(coords))
    {
        if (coords_.empty()) throw std::invalid_argument("a product system needs at least one coordinate");
        push(std::vector<Digit>(coords_.size(), 1));
        tails_.emplace_back(1);
    }

    std::size_t dims() const { return coords_.size(); }

    /// Entry for composite digit d (1-based).
    BijectionEntry entry(std::uint64_t d) const
    {
        std::lock_guard lock(mutex_);
        grow(d);
        return entries_[d - 1];
    }

    std::vector<BijectionEntry> prefix(std::uint64_t m) const
    {
        std::lock_guard lock(mutex_);
        grow(m);
        return {entries_.begin(), entries_.begin() + static_cast<std::ptrdiff_t>(m)};
    }

    /// 1 - sum_{i<d} L_i over the enumerated products.
    Rational tail(std::uint64_t d) const
    {
        std::lock_guard lock(mutex_);
        grow(d - 1);
        return tails_[d - 1];
    }

private:
    struct Candidate {
        Rational product;
        std::vector<Digit> index;
    };
    struct Later {
        // priority_queue pops the "largest"; make that the largest product,
        // then the lexicographically smallest index
        bool operator()(const Candidate& a, const Candidate& b) const
        {
            if (a.product != b.product) return a.product < b.product;
            return a.index > b.index;
        }
    };

    void push(std::vector<Digit> index) const
    {
        if (!seen_.insert(index).second) return;
        Rational p = 1;
        for (std::size_t k = 0; k < index.size(); ++k) p *= coords_[k].length(index[k]);
        frontier_.push({std::move(p), std::move(index)});
    }

    void grow(std::uint64_t m) const
    {
        while (entries_.size() < m) {
            Candidate c = frontier_.top();
            frontier_.pop();
            for (std::size_t k = 0; k < c.index.size(); ++k) {
                auto next = c.index;
                ++next[k];
                push(std::move(next));
            }
            tails_.push_back(tails_.back() - c.product);
            entries_.push_back({std::move(c.index), std::move(c.product)});
        }
    }

    std::vector<ProbabilitySequence> coords_;
    mutable std::mutex mutex_;
    mutable std::priority_queue<Candidate, std::vector<Candidate>, Later> frontier_;
    mutable std::set<std::vector<Digit>> seen_;
    mutable std::vector<BijectionEntry> entries_;
    mutable std::vector<Rational> tails_;  // tails_[d-1] = tail(d)
};

class ProductProvider final : public SequenceProvider {
public:
    explicit ProductProvider(std::shared_ptr<const BijectionEnumerator> e) : enumerator_(std::move(e)) {}
    Rational length(std::uint64_t d) const override { return enumerator_->entry(d).product; }
    Rational tail(std::uint64_t d) const override { return enumerator_->tail(d); }

private:
    std::shared_ptr<const BijectionEnumerator> enumerator_;
};

}  // namespace detail

/// Best-first enumeration of the first m entries of f^{-1}.
inline std::vector<BijectionEntry> enumerate_bijection(const std::vector<ProbabilitySequence>& coords, std::uint64_t m)
{
    if (m == 0) throw std::invalid_argument("count must be >= 1");
    return detail::BijectionEnumerator(coords).prefix(m);
}

class ProductSystem {
public:
    static constexpr std::uint64_t kDefaultMaxPrefix = 1'000'000;

    explicit ProductSystem(std::vector<GlsSystem> systems, std::uint64_t max_prefix = kDefaultMaxPrefix)
        : systems_(std::move(systems)), max_prefix_(max_prefix)
    {
        std::vector<ProbabilitySequence> coords;
        for (const auto& s : systems_) coords.push_back(s.sequence());
        enumerator_ = std::make_shared<const detail::BijectionEnumerator>(std::move(coords));
    }

    std::size_t dims() const { return systems_.size(); }
    const std::vector<GlsSystem>& systems() const { return systems_; }

    std::vector<BijectionEntry> enumerate(std::uint64_t m) const
    {
        if (m == 0) throw std::invalid_argument("count must be >= 1");
        check_prefix(m);
        return enumerator_->prefix(m);
    }

    BijectionEntry entry(std::uint64_t d) const
    {
        if (d == 0) throw std::out_of_range("composite digit must be >= 1");
        check_prefix(d);
        return enumerator_->entry(d);
    }

    /// L_d of the product sequence.
    Rational product_length(std::uint64_t d) const { return entry(d).product; }

    /// The product sequence as a validated ProbabilitySequence sharing this
    /// system's enumeration cache.
    ProbabilitySequence sequence(unsigned horizon = kDefaultValidationHorizon) const
    {
        return ProbabilitySequence::from_provider(std::make_shared<detail::ProductProvider>(enumerator_), horizon);
    }

    /// Componentwise transformation.
    std::vector<Rational> hat_transform(const std::vector<Rational>& x) const
    {
        if (x.size() != dims()) throw std::invalid_argument("point has the wrong dimension");
        std::vector<Rational> out;
        for (std::size_t k = 0; k < dims(); ++k) out.push_back(systems_[k].transform(x[k]));
        return out;
    }

    /// Splits composite digits into per-coordinate digits and projects each coordinate.
    std::vector<ProjectionResult> project_multi(const std::vector<Digit>& composite, unsigned max_places = 64) const
    {
        std::vector<std::vector<Digit>> per(dims());
        for (Digit a : composite) {
            auto e = entry(a);
            for (std::size_t k = 0; k < dims(); ++k) per[k].push_back(e.index[k]);
        }
        std::vector<ProjectionResult> out;
        for (std::size_t k = 0; k < dims(); ++k) out.push_back(systems_[k].project_digits(per[k], max_places));
        return out;
    }

private:
    void check_prefix(std::uint64_t d) const
    {
        if (d > max_prefix_)
            throw std::out_of_range("composite digit " + std::to_string(d) + " lies beyond the enumeration limit "
                                    + std::to_string(max_prefix_));
    }

    std::vector<GlsSystem> systems_;
    std::uint64_t max_prefix_;
    std::shared_ptr<const detail::BijectionEnumerator> enumerator_;
};

}  // namespace lnormal
