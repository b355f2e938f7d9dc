#pragma once

// Command-line front end. Exit codes: 0 success or verification pass,
// 1 verification failure, 2 usage, configuration or input errors.

#include "lnormal/lnormal.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lnormal::cli {

using ojson = nlohmann::ordered_json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

/// Raw flag values shared by the subcommands; merged over the --config file.
struct SystemFlags {
    std::string config_path;
    std::string system;
    std::string ratio;
    std::vector<std::string> head;
    std::vector<int> signs;
    std::string k1;
    std::string k2;
};

struct RunConfig {
    json system;
    std::optional<unsigned> max_depth;
    Rational k1{2};
    Rational k2{5};
    std::vector<std::string> patterns;
    std::optional<unsigned> decimal_places;
};

inline json load_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
}

/// Config file first, flags on top.
inline RunConfig resolve_config(const SystemFlags& f)
{
    RunConfig rc;
    json file = json::object();
    if (!f.config_path.empty()) file = load_json_file(f.config_path);
    if (file.contains("system")) rc.system = file.at("system");
    if (file.contains("max_depth")) rc.max_depth = file.at("max_depth").get<unsigned>();
    if (file.contains("decimal_places")) rc.decimal_places = file.at("decimal_places").get<unsigned>();
    if (file.contains("patterns"))
        for (const auto& p : file.at("patterns")) rc.patterns.push_back(p.get<std::string>());
    auto rational_of = [](const json& v) {
        return v.is_string() ? parse_rational(v.get<std::string>()) : Rational(v.get<long>());
    };
    if (file.contains("K1")) rc.k1 = rational_of(file.at("K1"));
    if (file.contains("K2")) rc.k2 = rational_of(file.at("K2"));

    if (!f.system.empty()) rc.system = json{{"kind", f.system}};
    if (rc.system.is_string()) rc.system = json{{"kind", rc.system.get<std::string>()}};
    if (rc.system.is_null()) rc.system = json{{"kind", "luroth"}};
    if (!f.ratio.empty()) rc.system["ratio"] = f.ratio;
    if (!f.head.empty()) rc.system["head"] = f.head;
    if (!f.signs.empty()) rc.system["signs"] = f.signs;
    if (!f.k1.empty()) rc.k1 = parse_rational(f.k1);
    if (!f.k2.empty()) rc.k2 = parse_rational(f.k2);
    if (rc.k1 <= 1) throw ConfigError("K1 must be greater than 1, got " + to_string(rc.k1));
    if (rc.k2 <= 4) throw ConfigError("K2 must be greater than 4, got " + to_string(rc.k2));
    return rc;
}

inline std::string hex64(std::uint64_t v)
{
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

inline Replay dump_replay(const std::string& path)
{
    return [path](SequenceSink& sink) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open dump '" + path + "'");
        read_dump(in, sink);
    };
}

inline std::string csv_field(const std::string& s)
{
    return s.find_first_of(",\"") == std::string::npos ? s : "\"" + s + "\"";
}

inline std::vector<Word> parse_patterns(const std::vector<std::string>& raw)
{
    std::vector<Word> out;
    for (const auto& p : raw) {
        Word w = Word::parse(p);
        if (w.empty()) throw ConfigError("patterns must be nonempty words");
        out.push_back(std::move(w));
    }
    if (out.empty()) throw ConfigError("at least one pattern is required");
    return out;
}

inline ojson projection_json(const ProjectionResult& r)
{
    ojson j;
    j["lower"] = to_string(r.lower);
    j["width"] = to_string(r.width);
    j["decimal"] = r.decimal();
    j["certified_places"] = r.certified_places;
    return j;
}

inline std::string abs_decimal(const Rational& r) { return decimal_truncated(abs_of(r), 12); }

inline void write_frequency_csv(std::ostream& out, const std::vector<FrequencyReport>& reports)
{
    out << "pattern,label,M,count,NA_num,NA_den,mu_num,mu_den,abs_dev_decimal\n";
    for (const auto& rep : reports)
        for (const auto& c : rep.checkpoints)
            out << csv_field(rep.pattern.to_string()) << ',' << csv_field(c.label) << ',' << c.size << ','
                << c.occurrences << ',' << c.frequency.get_num().get_str() << ',' << c.frequency.get_den().get_str()
                << ',' << c.mu.get_num().get_str() << ',' << c.mu.get_den().get_str() << ','
                << abs_decimal(c.deviation) << '\n';
}

inline ojson frequency_json(const std::vector<FrequencyReport>& reports)
{
    ojson arr = ojson::array();
    for (const auto& rep : reports)
        for (const auto& c : rep.checkpoints) {
            ojson j;
            j["pattern"] = rep.pattern.to_string();
            j["label"] = c.label;
            j["M"] = c.size;
            j["count"] = c.occurrences;
            j["NA"] = to_string(c.frequency);
            j["mu"] = to_string(c.mu);
            j["deviation"] = to_string(c.deviation);
            j["abs_dev_decimal"] = abs_decimal(c.deviation);
            if (c.truncated) j["truncated"] = true;
            arr.push_back(std::move(j));
        }
    return arr;
}

inline ojson verification_json(const TreePropertyReport& rep)
{
    ojson j;
    j["K1"] = to_string(rep.margins.k1);
    j["K2"] = to_string(rep.margins.k2);
    j["pass"] = rep.pass;
    ojson depths = ojson::array();
    for (const auto& d : rep.depths) {
        ojson x;
        x["n"] = d.n;
        x["words"] = d.words;
        x["P1"] = d.p1;
        if (!d.p1_detail.empty()) x["P1_detail"] = d.p1_detail;
        if (d.p2_evaluated) {
            x["P2"] = d.p2;
            x["max_abs_e"] = to_string(d.max_word_error);
            x["max_abs_e_word"] = d.max_word.to_string();
        }
        if (d.p3_evaluated) {
            x["P3"] = d.p3;
            x["max_abs_ek"] = to_string(d.max_group_error);
            x["max_abs_ek_group"] = d.max_group;
            x["max_abs_ek_parent"] = d.max_group_parent.to_string();
            ojson g = ojson::array();
            for (const auto& e : d.group_max_errors) g.push_back(to_string(e));
            x["group_max_abs_ek"] = std::move(g);
        }
        depths.push_back(std::move(x));
    }
    j["depths"] = std::move(depths);
    j["notes"] = rep.notes;
    return j;
}

inline ojson ledger_json(const SequenceLedger& led, const std::string& config_hash, unsigned max_depth)
{
    ojson j;
    ojson d = ojson::object(), ds = ojson::object(), g = ojson::object();
    for (std::size_t n = 0; n < led.d.size(); ++n) {
        d[std::to_string(n + 1)] = led.d[n];
        ds[std::to_string(n + 1)] = led.d_star[n];
    }
    for (const auto& [n, ranges] : led.groups) {
        ojson arr = ojson::array();
        for (const auto& [s, e] : ranges) arr.push_back({s, e});
        g[std::to_string(n)] = std::move(arr);
    }
    j["d"] = std::move(d);
    j["d_star"] = std::move(ds);
    j["groups"] = std::move(g);
    j["meta"] = {{"config_hash", config_hash},
                 {"max_depth", max_depth},
                 {"total_words", led.total_words},
                 {"total_digits", led.total_digits}};
    return j;
}

/// Opens `path` for writing, or returns the fallback stream for "-" / empty.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback)
    {
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) throw ConfigError("cannot write '" + path + "'");
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_ = nullptr;
};

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Construct and analyze L-normal sequences and their GLS projections", "lnormal"};
    app.require_subcommand(1);

    SystemFlags flags;
    auto add_system_flags = [&](CLI::App* sub, bool margins = false) {
        sub->add_option("--config", flags.config_path, "Run configuration JSON (flags override it)");
        sub->add_option("--system", flags.system, "luroth | dyadic | geometric | head_plus_geometric");
        sub->add_option("--ratio", flags.ratio, "Geometric ratio as p/q");
        sub->add_option("--head", flags.head, "Head entries as p/q (head_plus_geometric)");
        sub->add_option("--signs", flags.signs, "Flip flags eps_1 eps_2 ... (0 or 1)");
        if (margins) {
            sub->add_option("--k1", flags.k1, "Word-count margin K1 > 1 (default 2)");
            sub->add_option("--k2", flags.k2, "Group margin K2 > 4 (default 5)");
        }
    };

    unsigned max_depth = 0, n = 0, k = 0, dims = 0, places = 64;
    std::uint64_t count = 0, prefix_digits = 0;
    unsigned threads = 1;
    std::string out_path, summary_path, dump_path, x_text, systems_path, format = "csv", report_path, pattern;
    std::vector<std::string> patterns;
    std::vector<std::uint64_t> checkpoints;
    std::vector<unsigned> group_depths;

    auto* gen = app.add_subcommand("gen", "Generate the canonical tree sequence as a dump");
    add_system_flags(gen);
    gen->add_option("--max-depth", max_depth, "Deepest depth to emit");
    gen->add_option("--out", out_path, "Dump path (default stdout)");
    gen->add_option("--summary", summary_path, "Ledger JSON path (default <out>.summary.json)");

    auto* plan = app.add_subcommand("plan", "Show the word counts and groups of one depth");
    add_system_flags(plan);
    plan->add_option("--n", n, "Depth")->required();

    auto* verify = app.add_subcommand("verify", "Check the structural properties of a dump");
    add_system_flags(verify, true);
    verify->add_option("--dump", dump_path, "Sequence dump")->required();
    verify->add_option("--report", report_path, "Write the full report as JSON");

    auto* freq = app.add_subcommand("freq", "Block frequencies at checkpoints");
    add_system_flags(freq);
    freq->add_option("--dump", dump_path, "Sequence dump")->required();
    freq->add_option("--patterns", patterns, "Words such as 1 2 1,1");
    freq->add_option("--checkpoints", checkpoints, "Explicit prefix lengths M (default: d*(n) per depth)");
    freq->add_option("--group-depths", group_depths, "Also report every group range I^k(n) of these depths");
    freq->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    freq->add_option("--out", out_path, "Output path (default stdout)");
    freq->add_option("--threads", threads, "Shards counted in parallel (loads the dump into memory when > 1)");

    auto* ustats = app.add_subcommand("ustats", "Statistics of U_A(n, D(alpha))");
    add_system_flags(ustats);
    ustats->add_option("--dump", dump_path, "Sequence dump")->required();
    ustats->add_option("--pattern", pattern, "Word alpha")->required();
    ustats->add_option("--n", n, "Depth")->required();

    auto* project = app.add_subcommand("project", "Project a dump to a point of the GLS system");
    add_system_flags(project);
    project->add_option("--dump", dump_path, "Sequence dump")->required();
    project->add_option("--places", places, "Maximum decimal places to certify");
    project->add_option("--prefix-digits", prefix_digits, "Use only this many leading digits (0 = all)");

    auto* extract = app.add_subcommand("extract", "Digits of a rational point");
    add_system_flags(extract);
    extract->add_option("--x", x_text, "Point as p/q")->required();
    extract->add_option("--k", k, "Number of digits")->required();

    auto* tree = app.add_subcommand("tree", "Dump a generation as CSV");
    add_system_flags(tree);
    tree->add_option("--n", n, "Depth")->required();

    auto* delta_cmd = app.add_subcommand("delta", "Mean word length Delta_n of a generation");
    add_system_flags(delta_cmd);
    delta_cmd->add_option("--n", n, "Depth")->required();

    auto* multi = app.add_subcommand("multi", "Multidimensional systems");
    multi->require_subcommand(1);
    auto* multi_map = multi->add_subcommand("map", "Leading entries of the product bijection");
    multi_map->add_option("--dims", dims, "Dimension N")->required();
    multi_map->add_option("--systems", systems_path, "JSON with a \"systems\" array")->required();
    multi_map->add_option("--count", count, "Number of entries")->required();
    auto* multi_project = multi->add_subcommand("project", "Project composite digits coordinatewise");
    multi_project->add_option("--dump", dump_path, "Sequence dump over composite digits")->required();
    multi_project->add_option("--systems", systems_path, "JSON with a \"systems\" array")->required();
    multi_project->add_option("--places", places, "Maximum decimal places to certify");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (*multi) {
            json cfg = load_json_file(systems_path);
            auto systems = systems_from_json(cfg);
            ProductSystem ps(std::move(systems));
            if (*multi_map) {
                if (dims != ps.dims())
                    throw ConfigError("--dims " + std::to_string(dims) + " does not match "
                                      + std::to_string(ps.dims()) + " configured systems");
                if (count == 0) throw ConfigError("--count must be >= 1");
                out << 'd';
                for (unsigned c = 1; c <= dims; ++c) out << ",i_" << c;
                out << ",product\n";
                auto entries = ps.enumerate(count);
                for (std::size_t d = 0; d < entries.size(); ++d) {
                    out << d + 1;
                    for (Digit i : entries[d].index) out << ',' << i;
                    out << ',' << to_string(entries[d].product) << '\n';
                }
                return kExitOk;
            }
            DigitCollector digits;
            dump_replay(dump_path)(digits);
            ojson arr = ojson::array();
            for (const auto& r : ps.project_multi(digits.digits, places)) arr.push_back(projection_json(r));
            out << arr.dump() << '\n';
            return kExitOk;
        }

        RunConfig rc = resolve_config(flags);
        const ProbabilitySequence seq = sequence_from_json(rc.system);

        if (*gen) {
            if (max_depth == 0 && rc.max_depth) max_depth = *rc.max_depth;
            if (max_depth == 0) throw ConfigError("--max-depth is required");
            if (max_depth > 11)
                err << "warning: depth " << max_depth << " emits " << factorial(max_depth).get_str()
                    << " words at the deepest level alone\n";
            json effective = {{"system", rc.system}, {"max_depth", max_depth}};
            const std::string hash = hex64(fnv1a64(effective.dump()));
            TreeSequence ts(seq, max_depth);
            SequenceLedger ledger;
            {
                Output o(out_path, out);
                DumpWriter writer(o.get());
                ledger = ts.generate(writer);
                writer.flush();
            }
            if (summary_path.empty() && !out_path.empty() && out_path != "-") summary_path = out_path + ".summary.json";
            if (!summary_path.empty()) {
                Output s(summary_path, out);
                s.get() << ledger_json(ledger, hash, max_depth).dump() << '\n';
            }
            return kExitOk;
        }

        if (*plan) {
            DepthPlan p = plan_depth(seq, n);
            const auto& words = p.generation().words;
            ojson j;
            j["n"] = n;
            ojson counts = ojson::array();
            for (std::size_t i = 0; i < words.size(); ++i) counts.push_back({words[i].to_string(), p.counts()[i]});
            j["counts"] = std::move(counts);
            if (n >= 3) {
                j["group_size"] = *p.group_size();
                j["group_count"] = *p.group_count();
                ojson groups = ojson::array();
                ojson current = ojson::array();
                std::uint64_t current_k = 1;
                p.for_each_emitted([&](std::uint32_t w, std::uint64_t g) {
                    if (g != current_k) {
                        groups.push_back(std::move(current));
                        current = ojson::array();
                        current_k = g;
                    }
                    current.push_back(words[w].to_string());
                });
                groups.push_back(std::move(current));
                j["groups"] = std::move(groups);
            } else {
                ojson emission = ojson::array();
                p.for_each_emitted([&](std::uint32_t w, std::uint64_t) { emission.push_back(words[w].to_string()); });
                j["groups"] = ojson::array();
                j["emission"] = std::move(emission);
            }
            out << j.dump() << '\n';
            return kExitOk;
        }

        if (*verify) {
            TreePropertyReport rep = verify_tree_properties(dump_replay(dump_path), seq, {rc.k1, rc.k2});
            for (const auto& d : rep.depths) {
                out << "depth " << d.n << ": words=" << d.words << " P1=" << (d.p1 ? "pass" : "FAIL");
                if (d.p2_evaluated)
                    out << " P2=" << (d.p2 ? "pass" : "FAIL") << " max|e|=" << to_string(d.max_word_error) << " ("
                        << d.max_word.to_string() << ")";
                if (d.p3_evaluated)
                    out << " P3=" << (d.p3 ? "pass" : "FAIL") << " max|e^k|=" << to_string(d.max_group_error)
                        << " (k=" << d.max_group << ", " << d.max_group_parent.to_string() << ")";
                if (!d.p1_detail.empty()) out << " [" << d.p1_detail << "]";
                out << '\n';
            }
            for (const auto& note : rep.notes) out << "note: " << note << '\n';
            out << "verdict: " << (rep.pass ? "pass" : "FAIL") << " (K1=" << to_string(rep.margins.k1)
                << ", K2=" << to_string(rep.margins.k2) << ")\n";
            if (!report_path.empty()) {
                Output o(report_path, out);
                o.get() << verification_json(rep).dump(2) << '\n';
            }
            return rep.pass ? kExitOk : kExitFail;
        }

        if (*freq) {
            if (patterns.empty()) patterns = rc.patterns;
            auto pats = parse_patterns(patterns);
            Replay replay = dump_replay(dump_path);
            std::vector<FrequencyReport> reports;
            std::vector<IndexRange> ranges;
            if (!checkpoints.empty()) {
                ranges = prefix_ranges(checkpoints);
                if (!group_depths.empty()) {
                    LedgerBuilder lb;
                    replay(lb);
                    auto extra = structural_ranges(lb.ledger(), group_depths);
                    for (auto& r : extra)
                        if (r.label.starts_with("I^")) ranges.push_back(std::move(r));
                }
            } else {
                LedgerBuilder lb;
                replay(lb);
                ranges = structural_ranges(lb.ledger(), group_depths);
            }
            if (threads > 1) {
                DigitCollector dc;
                replay(dc);
                reports = count_blocks_sharded(dc.digits, pats, ranges, seq, threads);
            } else {
                BlockCounter counter(pats, ranges);
                replay(counter);
                reports = counter.finish(seq);
            }
            Output o(out_path, out);
            if (format == "json") o.get() << frequency_json(reports).dump(2) << '\n';
            else write_frequency_csv(o.get(), reports);
            return kExitOk;
        }

        if (*ustats) {
            Word alpha = Word::parse(pattern);
            UStats st = u_set_stats(dump_replay(dump_path), seq, alpha, n);
            ojson j;
            j["pattern"] = alpha.to_string();
            j["n"] = n;
            j["u_size"] = st.u_size;
            j["hits"] = st.hits;
            j["ratio"] = st.ratio ? ojson(to_string(*st.ratio)) : ojson(nullptr);
            j["mu"] = to_string(st.mu);
            out << j.dump() << '\n';
            return kExitOk;
        }

        if (*project) {
            GlsSystem sys = system_from_json(rc.system);
            DigitCollector dc;
            dump_replay(dump_path)(dc);
            if (prefix_digits > 0 && prefix_digits < dc.digits.size()) dc.digits.resize(prefix_digits);
            if (rc.decimal_places && !project->count("--places")) places = *rc.decimal_places;
            out << projection_json(sys.project_digits(dc.digits, places)).dump() << '\n';
            return kExitOk;
        }

        if (*extract) {
            GlsSystem sys = system_from_json(rc.system);
            ExtractResult r = sys.extract_digits(parse_rational(x_text), k);
            DumpWriter w(out);
            w.header("mode extract");
            for (const auto& ds : r.digits) {
                const Digit d = ds.digit;
                w.word(std::span<const Digit>(&d, 1));
            }
            w.flush();
            if (r.stop == StopReason::left_partition)
                err << "note: orbit left the partition after " << r.digits.size() << " digits\n";
            return kExitOk;
        }

        if (*tree) {
            Generation g = generation(n);
            out << "word,weight,mu,length\n";
            for (const auto& w : g.words)
                out << csv_field(w.to_string()) << ',' << to_string(weight(seq, w)) << ',' << to_string(mu(seq, w))
                    << ',' << w.size() << '\n';
            return kExitOk;
        }

        if (*delta_cmd) {
            out << to_string(delta(seq, n)) << '\n';
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DumpFormatError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace lnormal::cli
