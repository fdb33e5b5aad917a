#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ald/corpus.hpp"
#include "ald/error.hpp"
#include "ald/hash.hpp"
#include "ald/tensor.hpp"

namespace ald {

inline std::string lowercase_ascii(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

// The 70-symbol character set used by the char-level models: 26 letters,
// 10 digits, 32 punctuation marks, space, newline. Anything else is dropped
// during quantization.
class CharAlphabet {
  public:
    static constexpr int pad = -1;

    CharAlphabet() {
        std::string symbols = "abcdefghijklmnopqrstuvwxyz0123456789";
        symbols += "-,;.!?:'\"/\\|_@#$%^&*~`+=<>()[]{}";
        symbols += ' ';
        symbols += '\n';
        symbols_.assign(symbols.begin(), symbols.end());
        index_.fill(pad);
        for (std::size_t i = 0; i < symbols_.size(); ++i)
            index_[static_cast<unsigned char>(symbols_[i])] = static_cast<int>(i);
    }

    static const CharAlphabet& standard() {
        static const CharAlphabet a;
        return a;
    }

    int size() const { return static_cast<int>(symbols_.size()); }
    int index(char c) const { return index_[static_cast<unsigned char>(c)]; }
    char symbol(int i) const { return symbols_[static_cast<std::size_t>(i)]; }

    std::uint64_t hash() const {
        Fnv64 h;
        h.update(std::string_view(symbols_.data(), symbols_.size()));
        return h.digest();
    }

  private:
    std::vector<char> symbols_;
    std::array<int, 256> index_;
};

// Fixed-length sequence of alphabet indices; pad entries are -1 and become
// all-zero columns in the one-hot view.
struct CharGrid {
    std::vector<int> indices;
    int length() const { return static_cast<int>(indices.size()); }
};

inline CharGrid quantize_chars(const std::string& text, const CharAlphabet& alphabet, int l_char) {
    if (l_char < 1) throw DataError("quantize_chars: L_char must be >= 1");
    CharGrid grid;
    grid.indices.assign(static_cast<std::size_t>(l_char), CharAlphabet::pad);
    int pos = 0;
    for (char raw : text) {
        if (pos >= l_char) break;
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        const int idx = alphabet.index(c);
        if (idx >= 0) grid.indices[static_cast<std::size_t>(pos++)] = idx;
    }
    return grid;
}

// Keep only alphabet characters (lowercased), unbounded length. The char
// n-gram baselines featurize this string.
inline std::string quantize_text(const std::string& text, const CharAlphabet& alphabet) {
    std::string out;
    out.reserve(text.size());
    for (char raw : text) {
        char c = raw;
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        if (alphabet.index(c) >= 0) out += c;
    }
    return out;
}

namespace detail {
inline bool is_ascii_punct(char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

inline bool looks_like_url(const std::string& tok) {
    return tok.rfind("http://", 0) == 0 || tok.rfind("https://", 0) == 0 || tok.rfind("www.", 0) == 0;
}
}  // namespace detail

// Whitespace tokenizer with tweet-specific normalization: lowercase, URLs
// to <url>, mentions to <user>, leading/trailing punctuation split into
// separate tokens except '#'/'@' prefixes, which stay attached.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::istringstream stream(lowercase_ascii(text));
    std::string raw;
    while (stream >> raw) {
        if (detail::looks_like_url(raw)) {
            tokens.push_back("<url>");
            continue;
        }
        std::string tok = raw;
        while (!tok.empty() && detail::is_ascii_punct(tok.front()) && tok.front() != '#' && tok.front() != '@') {
            tokens.push_back(std::string(1, tok.front()));
            tok.erase(tok.begin());
        }
        std::vector<std::string> trailing;
        while (tok.size() > 1 && detail::is_ascii_punct(tok.back())) {
            trailing.push_back(std::string(1, tok.back()));
            tok.pop_back();
        }
        if (!tok.empty()) {
            if (tok.size() > 1 && tok.front() == '@')
                tokens.push_back("<user>");
            else
                tokens.push_back(tok);
        }
        for (auto it = trailing.rbegin(); it != trailing.rend(); ++it) tokens.push_back(*it);
    }
    return tokens;
}

// Unigram counts backing hashtag segmentation. Known words score count/total;
// unknown words get the 10/(total*10^len) penalty of the wordsegment
// heuristic, so longer made-up words are punished harder.
class UnigramModel {
  public:
    void add(const std::string& token, long long count = 1) {
        counts_[token] += count;
        total_ += count;
    }

    long long count(const std::string& token) const {
        auto it = counts_.find(token);
        return it == counts_.end() ? 0 : it->second;
    }

    long long total() const { return total_; }

    double log_prob(const std::string& word) const {
        const double total = static_cast<double>(total_ > 0 ? total_ : 1);
        auto it = counts_.find(word);
        if (it != counts_.end()) return std::log(static_cast<double>(it->second)) - std::log(total);
        return std::log(10.0) - std::log(total) - static_cast<double>(word.size()) * std::log(10.0);
    }

    // Counts every non-hashtag token of the view's texts.
    static UnigramModel from_view(const CorpusView& view) {
        UnigramModel model;
        for (std::size_t i = 0; i < view.size(); ++i)
            for (const auto& tok : tokenize(view.example(i).text))
                if (tok[0] != '#') model.add(tok);
        return model;
    }

    // Optional external frequency file: token <TAB> count per line.
    void load_counts(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open unigram counts file: " + path);
        std::string line;
        long long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw DataError(path + ":" + std::to_string(line_no) + ": expected token<TAB>count");
            long long c = 0;
            try {
                c = std::stoll(line.substr(tab + 1));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(line_no) + ": bad count");
            }
            if (c < 1) throw DataError(path + ":" + std::to_string(line_no) + ": count must be >= 1");
            add(line.substr(0, tab), c);
        }
    }

    std::uint64_t hash() const {
        Fnv64 h;
        for (const auto& [tok, c] : counts_) {
            h.update(tok);
            h.update_u64(static_cast<std::uint64_t>(c));
        }
        h.update_u64(static_cast<std::uint64_t>(total_));
        return h.digest();
    }

  private:
    std::map<std::string, long long> counts_;
    long long total_ = 0;
};

constexpr int kMaxSegmentWordLen = 24;

// Best-scoring contiguous segmentation of a hashtag body (no '#') by
// dynamic programming over prefixes. Score of a segmentation is the sum of
// per-word log probabilities, accumulated left to right; ties prefer fewer
// words, then the longer final word.
inline std::vector<std::string> segment_hashtag(const std::string& tag, const UnigramModel& model) {
    const int n = static_cast<int>(tag.size());
    if (n == 0) return {};
    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> score(static_cast<std::size_t>(n) + 1, neg_inf);
    std::vector<int> words(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> back(static_cast<std::size_t>(n) + 1, -1);
    score[0] = 0.0;
    for (int i = 1; i <= n; ++i) {
        const int j_lo = std::max(0, i - kMaxSegmentWordLen);
        for (int j = j_lo; j < i; ++j) {
            if (back[static_cast<std::size_t>(j)] == -1 && j != 0) continue;
            const double cand = score[static_cast<std::size_t>(j)] +
                                model.log_prob(tag.substr(static_cast<std::size_t>(j), static_cast<std::size_t>(i - j)));
            const int cand_words = words[static_cast<std::size_t>(j)] + 1;
            const bool better = cand > score[static_cast<std::size_t>(i)] ||
                                (cand == score[static_cast<std::size_t>(i)] &&
                                 cand_words < words[static_cast<std::size_t>(i)]);
            if (back[static_cast<std::size_t>(i)] == -1 || better) {
                score[static_cast<std::size_t>(i)] = cand;
                words[static_cast<std::size_t>(i)] = cand_words;
                back[static_cast<std::size_t>(i)] = j;
            }
        }
    }
    if (back[static_cast<std::size_t>(n)] == -1) return {tag};  // longer than any splittable form
    std::vector<std::string> out;
    int i = n;
    while (i > 0) {
        const int j = back[static_cast<std::size_t>(i)];
        out.push_back(tag.substr(static_cast<std::size_t>(j), static_cast<std::size_t>(i - j)));
        i = j;
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// Token stream after hashtag expansion; shared by vocabulary building and
// encoding so the two can never disagree.
inline std::vector<std::string> expand_tokens(const std::vector<std::string>& tokens, bool segment_hashtags,
                                              const UnigramModel& model) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (const auto& tok : tokens) {
        if (segment_hashtags && tok.size() > 1 && tok[0] == '#') {
            for (auto& w : segment_hashtag(tok.substr(1), model)) out.push_back(std::move(w));
        } else {
            out.push_back(tok);
        }
    }
    return out;
}

class Vocab {
  public:
    static constexpr int pad_id = 0;
    static constexpr int unk_id = 1;

    Vocab() : tokens_{"<pad>", "<unk>"} { rebuild_index(); }

    explicit Vocab(std::vector<std::string> tokens) : tokens_{"<pad>", "<unk>"} {
        for (auto& t : tokens) tokens_.push_back(std::move(t));
        rebuild_index();
    }

    int size() const { return static_cast<int>(tokens_.size()); }

    int id(const std::string& token) const {
        auto it = index_.find(token);
        return it == index_.end() ? unk_id : it->second;
    }

    bool contains(const std::string& token) const { return index_.count(token) > 0; }
    const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::uint64_t hash() const {
        Fnv64 h;
        for (const auto& t : tokens_) {
            h.update(t);
            h.update("\x1f");
        }
        return h.digest();
    }

  private:
    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < tokens_.size(); ++i) index_[tokens_[i]] = static_cast<int>(i);
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

// Vocabulary over the expanded token stream of the view, frequency cutoff
// min_freq, ordered by (-frequency, token) after the specials.
inline Vocab build_vocab(const CorpusView& view, int min_freq, bool segment_hashtags, const UnigramModel& model) {
    if (min_freq < 1) throw DataError("build_vocab: min_freq must be >= 1");
    std::map<std::string, long long> freq;
    for (std::size_t i = 0; i < view.size(); ++i)
        for (const auto& tok : expand_tokens(tokenize(view.example(i).text), segment_hashtags, model)) ++freq[tok];
    std::vector<std::pair<long long, std::string>> ranked;
    for (const auto& [tok, f] : freq)
        if (f >= min_freq) ranked.emplace_back(f, tok);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    std::vector<std::string> tokens;
    tokens.reserve(ranked.size());
    for (auto& [f, tok] : ranked) tokens.push_back(std::move(tok));
    return Vocab(std::move(tokens));
}

struct EmbeddingTable {
    Tensor rows;  // (|V|, D)
    int dim = 0;
    bool trainable = false;

    std::uint64_t hash() const { return rows.content_hash(); }
};

// Text embedding format: header "<n> <d>", then "word v1 ... vd" per line.
// Vocab words missing from the file (and <pad>/<unk>) keep all-zero rows.
inline EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab, int expected_dim = 0) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embeddings file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ":1: missing header line");
    long long file_rows = 0;
    int dim = 0;
    {
        std::istringstream head(line);
        if (!(head >> file_rows >> dim) || dim < 1) throw DataError(path + ":1: header must be '<n> <d>'");
    }
    if (expected_dim > 0 && dim != expected_dim)
        throw DataError(path + ": embedding dimension " + std::to_string(dim) + " does not match configured " +
                        std::to_string(expected_dim));
    EmbeddingTable table;
    table.dim = dim;
    table.trainable = false;
    table.rows = Tensor({vocab.size(), dim});
    long long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string word;
        row >> word;
        if (word.empty()) throw DataError(path + ":" + std::to_string(line_no) + ": malformed line");
        const bool keep = vocab.contains(word);
        const int vid = keep ? vocab.id(word) : -1;
        for (int d = 0; d < dim; ++d) {
            double v;
            if (!(row >> v)) throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                                             std::to_string(dim) + " values");
            if (keep && vid != Vocab::pad_id && vid != Vocab::unk_id) table.rows.at(vid, d) = v;
        }
        double trailing;
        if (row >> trailing) throw DataError(path + ":" + std::to_string(line_no) + ": too many values");
    }
    return table;
}

using WordIds = std::vector<int>;

// Hashtags are expanded through the unigram model before lookup; unknown
// tokens map to <unk>; the result is truncated or padded to l_word.
inline WordIds encode_words(const std::vector<std::string>& tokens, const Vocab& vocab, int l_word,
                            bool segment_hashtags, const UnigramModel& model) {
    if (l_word < 1) throw DataError("encode_words: L_word must be >= 1");
    WordIds ids(static_cast<std::size_t>(l_word), Vocab::pad_id);
    std::size_t pos = 0;
    for (const auto& tok : expand_tokens(tokens, segment_hashtags, model)) {
        if (pos >= static_cast<std::size_t>(l_word)) break;
        ids[pos++] = vocab.id(tok);
    }
    return ids;
}

}  // namespace ald
