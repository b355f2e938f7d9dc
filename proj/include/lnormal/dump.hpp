#pragma once

// Text dump of a word sequence:
//
//   #depth 1
//   1
//   #depth 2
//   1,1
//   2
//
// Header lines start with '#'; every other line is one word, its digits as
// decimal integers joined by commas. Lines end in LF with no trailing
// whitespace.

#include "lnormal/genseq.hpp"
#include "lnormal/rational.hpp"

#include <charconv>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lnormal {

class DumpFormatError : public std::runtime_error {
public:
    DumpFormatError(std::size_t line, const std::string& what)
        : std::runtime_error("dump line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DumpWriter final : public SequenceSink {
public:
    explicit DumpWriter(std::ostream& out) : out_(out) { buffer_.reserve(kFlushAt + 256); }
    ~DumpWriter() override { flush(); }
    DumpWriter(const DumpWriter&) = delete;
    DumpWriter& operator=(const DumpWriter&) = delete;

    void begin_depth(unsigned n) override
    {
        buffer_ += "#depth ";
        buffer_ += std::to_string(n);
        buffer_ += '\n';
    }

    void header(std::string_view text) override
    {
        buffer_ += '#';
        buffer_ += text;
        buffer_ += '\n';
    }

    void word(std::span<const Digit> digits) override
    {
        char tmp[16];
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (i) buffer_ += ',';
            auto [end, ec] = std::to_chars(tmp, tmp + sizeof(tmp), digits[i]);
            buffer_.append(tmp, end);
        }
        buffer_ += '\n';
        if (buffer_.size() >= kFlushAt) flush();
    }

    void flush()
    {
        out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        buffer_.clear();
        if (!out_) throw std::runtime_error("failed writing sequence dump");
    }

private:
    static constexpr std::size_t kFlushAt = 1 << 16;
    std::ostream& out_;
    std::string buffer_;
};

/// Parses a dump and replays it into the sink. Depth headers become
/// begin_depth/end_depth events; other headers are passed through verbatim.
inline void read_dump(std::istream& in, SequenceSink& sink)
{
    std::string line;
    std::vector<Digit> digits;
    std::size_t lineno = 0;
    std::optional<unsigned> open_depth;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) throw DumpFormatError(lineno, "empty line");
        if (line[0] == '#') {
            std::string_view h(line);
            h.remove_prefix(1);
            if (h.starts_with("depth ")) {
                unsigned n = 0;
                auto body = h.substr(6);
                auto [p, ec] = std::from_chars(body.data(), body.data() + body.size(), n);
                if (ec != std::errc{} || p != body.data() + body.size() || n == 0)
                    throw DumpFormatError(lineno, "malformed depth header '" + line + "'");
                if (open_depth) sink.end_depth(*open_depth);
                open_depth = n;
                sink.begin_depth(n);
            } else {
                sink.header(h);
            }
            continue;
        }
        digits.clear();
        const char* p = line.data();
        const char* end = p + line.size();
        while (true) {
            Digit d = 0;
            auto [next, ec] = std::from_chars(p, end, d);
            if (ec != std::errc{} || next == p) throw DumpFormatError(lineno, "malformed word '" + line + "'");
            if (d == 0) throw DumpFormatError(lineno, "digit 0 is not in the alphabet");
            digits.push_back(d);
            p = next;
            if (p == end) break;
            if (*p != ',' || p + 1 == end) throw DumpFormatError(lineno, "malformed word '" + line + "'");
            ++p;
        }
        sink.word(digits);
    }
    if (in.bad()) throw std::runtime_error("failed reading sequence dump");
    if (open_depth) sink.end_depth(*open_depth);
}

/// Collects all words of a dump, in order.
class WordCollector final : public SequenceSink {
public:
    void word(std::span<const Digit> d) override { words.emplace_back(d); }
    std::vector<Word> words;
};

/// Flattens the digit stream into memory.
class DigitCollector final : public SequenceSink {
public:
    void word(std::span<const Digit> d) override { digits.insert(digits.end(), d.begin(), d.end()); }
    std::vector<Digit> digits;
};

}  // namespace lnormal
