#pragma once

#include "lnormal/lnormal.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lnormal::testing {

inline std::string fixture_path(const std::string& name) { return std::string(LNORMAL_FIXTURES) + "/" + name; }

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Replay file_replay(const std::string& path)
{
    return [path](SequenceSink& sink) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        read_dump(in, sink);
    };
}

inline Replay text_replay(std::string text)
{
    return [text = std::move(text)](SequenceSink& sink) {
        std::istringstream in(text);
        read_dump(in, sink);
    };
}

inline Replay tree_replay(const ProbabilitySequence& seq, unsigned max_depth)
{
    return [seq, max_depth](SequenceSink& sink) {
        TreeSequence ts(seq, max_depth);
        ts.generate(sink);
    };
}

inline std::vector<Word> words_of(const Replay& replay)
{
    WordCollector c;
    replay(c);
    return c.words;
}

inline std::vector<Digit> digits_of(const Replay& replay)
{
    DigitCollector c;
    replay(c);
    return c.digits;
}

inline std::string dump_text(const ProbabilitySequence& seq, unsigned max_depth)
{
    std::ostringstream out;
    {
        DumpWriter w(out);
        TreeSequence(seq, max_depth).generate(w);
    }
    return out.str();
}

inline std::vector<Word> words(std::initializer_list<const char*> texts)
{
    std::vector<Word> out;
    for (const char* t : texts) out.push_back(Word::parse(t));
    return out;
}

struct Preset {
    std::string name;
    ProbabilitySequence seq;
};

inline std::vector<Preset> presets()
{
    return {{"luroth", ProbabilitySequence::luroth()},
            {"geometric_1_2", ProbabilitySequence::dyadic()},
            {"geometric_1_3", ProbabilitySequence::geometric(Rational(1, 3))}};
}

/// All compositions of n in lexicographic order, built by direct recursion.
inline void compositions(unsigned n, std::vector<Digit>& prefix, std::vector<Word>& out)
{
    if (n == 0) {
        out.emplace_back(prefix);
        return;
    }
    for (Digit first = 1; first <= n; ++first) {
        prefix.push_back(first);
        compositions(n - first, prefix, out);
        prefix.pop_back();
    }
}

inline std::vector<Word> compositions(unsigned n)
{
    std::vector<Word> out;
    std::vector<Digit> prefix;
    compositions(n, prefix, out);
    return out;
}

/// Path product from the root, one edge at a time: from u the left edge
/// (to u1) has probability p_{last(u)}, the right edge (to u+) q_{last(u)}.
inline Rational path_weight(const ProbabilitySequence& seq, const Word& w)
{
    Rational r = 1;
    std::vector<Digit> cur{1};
    const auto target = w.digits();
    while (true) {
        const std::size_t k = cur.size() - 1;
        if (cur.size() == target.size() && cur.back() == target.back()) break;
        auto bp = seq.branch_probs(cur.back());
        if (cur.back() < target[k]) {
            r *= bp.q;
            ++cur.back();
        } else {
            r *= bp.p;
            cur.push_back(1);
        }
    }
    return r;
}

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace lnormal::testing
