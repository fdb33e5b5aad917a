#pragma once

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ald/error.hpp"

namespace ald {

struct ConfusionMatrix {
    int k = 0;
    std::vector<long long> counts;  // [gold * k + pred]

    explicit ConfusionMatrix(int classes = 0) : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

    long long& at(int gold, int pred) { return counts[static_cast<std::size_t>(gold) * k + pred]; }
    long long at(int gold, int pred) const { return counts[static_cast<std::size_t>(gold) * k + pred]; }

    long long total() const {
        long long t = 0;
        for (long long c : counts) t += c;
        return t;
    }

    long long row_sum(int gold) const {
        long long t = 0;
        for (int p = 0; p < k; ++p) t += at(gold, p);
        return t;
    }

    long long col_sum(int pred) const {
        long long t = 0;
        for (int g = 0; g < k; ++g) t += at(g, pred);
        return t;
    }
};

inline ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& preds, int k) {
    if (golds.size() != preds.size()) throw DataError("confusion: golds and preds differ in length");
    ConfusionMatrix cm(k);
    for (std::size_t i = 0; i < golds.size(); ++i) {
        if (golds[i] < 0 || golds[i] >= k || preds[i] < 0 || preds[i] >= k)
            throw DataError("confusion: label outside [0,K)");
        ++cm.at(golds[i], preds[i]);
    }
    return cm;
}

struct ClassPRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double support = 0.0;
};

// Per-class precision/recall/F1 plus support-weighted averages. 0/0 counts
// as 0, which matters for rare classes in small folds. Weighted F1 averages
// per-class F1 (not F of averages), so it can land outside the interval
// between weighted precision and weighted recall.
struct PRF {
    std::vector<ClassPRF> per_class;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    double total_support = 0.0;
};

inline PRF prf(const ConfusionMatrix& cm) {
    PRF out;
    out.per_class.resize(static_cast<std::size_t>(cm.k));
    for (int c = 0; c < cm.k; ++c) {
        const double tp = static_cast<double>(cm.at(c, c));
        const double gold = static_cast<double>(cm.row_sum(c));
        const double pred = static_cast<double>(cm.col_sum(c));
        ClassPRF& p = out.per_class[static_cast<std::size_t>(c)];
        p.support = gold;
        p.precision = pred > 0.0 ? tp / pred : 0.0;
        p.recall = gold > 0.0 ? tp / gold : 0.0;
        p.f1 = (p.precision + p.recall) > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
    }
    double total = 0.0;
    for (const auto& p : out.per_class) total += p.support;
    out.total_support = total;
    if (total > 0.0) {
        for (const auto& p : out.per_class) {
            out.weighted_precision += p.support * p.precision / total;
            out.weighted_recall += p.support * p.recall / total;
            out.weighted_f1 += p.support * p.f1 / total;
        }
    }
    return out;
}

// Plain mean over folds of every reported number.
inline PRF aggregate_folds(const std::vector<PRF>& folds) {
    if (folds.empty()) throw DataError("aggregate_folds: no folds");
    const std::size_t k = folds[0].per_class.size();
    for (const auto& f : folds)
        if (f.per_class.size() != k) throw DataError("aggregate_folds: class count differs between folds");
    PRF out;
    out.per_class.resize(k);
    const double n = static_cast<double>(folds.size());
    for (const auto& f : folds) {
        for (std::size_t c = 0; c < k; ++c) {
            out.per_class[c].precision += f.per_class[c].precision / n;
            out.per_class[c].recall += f.per_class[c].recall / n;
            out.per_class[c].f1 += f.per_class[c].f1 / n;
            out.per_class[c].support += f.per_class[c].support / n;
        }
        out.weighted_precision += f.weighted_precision / n;
        out.weighted_recall += f.weighted_recall / n;
        out.weighted_f1 += f.weighted_f1 / n;
        out.total_support += f.total_support / n;
    }
    return out;
}

namespace detail {
inline std::string fmt(double v, int digits) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}
}  // namespace detail

// Aligned plain-text table: one row per method, Prec./Rec./F1 per class
// plus the weighted Total block.
inline std::string render_table(const std::vector<std::pair<std::string, PRF>>& rows,
                                const std::vector<std::string>& classes, const std::string& title = "") {
    std::ostringstream os;
    if (!title.empty()) os << title << "\n";
    std::size_t name_w = 8;
    for (const auto& [name, r] : rows) name_w = std::max(name_w, name.size());
    os << std::left << std::setw(static_cast<int>(name_w + 2)) << "Method";
    for (const auto& c : classes) os << std::left << std::setw(24) << (c + " P/R/F1");
    os << "Total P/R/F1\n";
    for (const auto& [name, r] : rows) {
        os << std::left << std::setw(static_cast<int>(name_w + 2)) << name;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto& p = r.per_class[c];
            os << std::left << std::setw(24)
               << (detail::fmt(p.precision, 3) + " " + detail::fmt(p.recall, 3) + " " + detail::fmt(p.f1, 3));
        }
        os << detail::fmt(r.weighted_precision, 3) << " " << detail::fmt(r.weighted_recall, 3) << " "
           << detail::fmt(r.weighted_f1, 3) << "\n";
    }
    return os.str();
}

// TSV with a header row and a fixed column count: method, per-class
// precision/recall/f1, then the weighted totals.
inline std::string render_tsv(const std::vector<std::pair<std::string, PRF>>& rows,
                              const std::vector<std::string>& classes) {
    std::ostringstream os;
    os << "method";
    for (const auto& c : classes) os << "\t" << c << "_precision\t" << c << "_recall\t" << c << "_f1";
    os << "\ttotal_precision\ttotal_recall\ttotal_f1\n";
    for (const auto& [name, r] : rows) {
        os << name;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const auto& p = r.per_class[c];
            os << "\t" << detail::fmt(p.precision, 6) << "\t" << detail::fmt(p.recall, 6) << "\t"
               << detail::fmt(p.f1, 6);
        }
        os << "\t" << detail::fmt(r.weighted_precision, 6) << "\t" << detail::fmt(r.weighted_recall, 6) << "\t"
           << detail::fmt(r.weighted_f1, 6) << "\n";
    }
    return os.str();
}

}  // namespace ald
