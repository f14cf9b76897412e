#include "drugner/eval.hpp"

#include <algorithm>

#include "drugner/util.hpp"

namespace drugner {

EvalReport score(const NameSet& extracted, const NameSet& gold) {
    EvalReport r;
    for (const auto& name : extracted) {
        if (gold.count(name)) {
            ++r.true_positive;
        } else {
            ++r.false_positive;
        }
    }
    r.false_negative = gold.size() - r.true_positive;

    if (r.true_positive + r.false_positive > 0) {
        r.precision = static_cast<double>(r.true_positive) /
                      static_cast<double>(r.true_positive + r.false_positive);
    } else {
        warn("score: nothing extracted, precision reported as 1 by convention");
        r.precision = 1.0;
    }
    if (r.true_positive + r.false_negative > 0) {
        r.recall = static_cast<double>(r.true_positive) /
                   static_cast<double>(r.true_positive + r.false_negative);
    } else {
        warn("score: empty gold set, recall reported as 1 by convention");
        r.recall = 1.0;
    }
    double pr = r.precision + r.recall;
    r.f_score = pr > 0 ? 2.0 * r.precision * r.recall / pr : 0.0;
    return r;
}

EvalReport score_binary_labels(const std::vector<int>& predicted, const std::vector<int>& gold) {
    if (predicted.size() != gold.size())
        throw DataError("score_binary_labels: length mismatch");
    EvalReport r;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == 1 && gold[i] == 1) ++r.true_positive;
        if (predicted[i] == 1 && gold[i] == 0) ++r.false_positive;
        if (predicted[i] == 0 && gold[i] == 1) ++r.false_negative;
    }
    r.precision = r.true_positive + r.false_positive > 0
                      ? static_cast<double>(r.true_positive) /
                            static_cast<double>(r.true_positive + r.false_positive)
                      : 1.0;
    r.recall = r.true_positive + r.false_negative > 0
                   ? static_cast<double>(r.true_positive) /
                         static_cast<double>(r.true_positive + r.false_negative)
                   : 1.0;
    double pr = r.precision + r.recall;
    r.f_score = pr > 0 ? 2.0 * r.precision * r.recall / pr : 0.0;
    return r;
}

NameSet tuples_to_nameset(const std::vector<int>& predictions,
                          const std::vector<TupleSample>& tuples) {
    if (predictions.size() != tuples.size())
        throw DataError("tuples_to_nameset: prediction count != tuple count");
    NameSet names;
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        int c = predictions[i];
        if (c <= 1) continue;
        if (c > kTupleClasses) throw DataError("tuples_to_nameset: class out of range");
        std::vector<std::string> name(tuples[i].tokens.begin(),
                                      tuples[i].tokens.begin() + (c - 1));
        names.insert(std::move(name));
    }
    return names;
}

NameSet sequences_to_nameset(const std::vector<std::vector<int>>& predictions,
                             const std::vector<SequenceSample>& sequences) {
    if (predictions.size() != sequences.size())
        throw DataError("sequences_to_nameset: prediction count != sequence count");
    NameSet names;
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        const auto& steps = sequences[s].steps;
        const auto& pred = predictions[s];
        if (pred.size() != steps.size())
            throw DataError("sequences_to_nameset: label count mismatch in sentence " +
                            sequences[s].sentence_id);
        std::size_t i = 0;
        while (i < pred.size()) {
            if (pred[i] != 1) {
                ++i;
                continue;
            }
            std::vector<std::string> name;
            while (i < pred.size() && pred[i] == 1) {
                name.push_back(steps[i].token);
                ++i;
            }
            names.insert(std::move(name));
        }
    }
    return names;
}

NameSet gold_nameset(const std::vector<AnnotatedSentence>& sentences) {
    NameSet names;
    for (const auto& s : sentences)
        for (const auto& a : s.annotations) {
            if (a.kind != EntityKind::Drug && a.kind != EntityKind::DrugN) continue;
            auto toks = split_ws(to_lower(a.surface));
            if (!toks.empty()) names.insert(std::move(toks));
        }
    return names;
}

std::string report_to_text(const EvalReport& r) {
    std::string out;
    out += "precision " + fmt_f4(r.precision) + "\n";
    out += "recall " + fmt_f4(r.recall) + "\n";
    out += "f_score " + fmt_f4(r.f_score) + "\n";
    out += "true_positive " + std::to_string(r.true_positive) + "\n";
    out += "false_positive " + std::to_string(r.false_positive) + "\n";
    out += "false_negative " + std::to_string(r.false_negative) + "\n";
    return out;
}

}  // namespace drugner
