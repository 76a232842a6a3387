#include "ras/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "json.hpp"

#include "ras/jsonw.hpp"

namespace ras {

ConfidentHyp UtteranceRecord::confident_hyp(const TokenizeOptions& opts) const {
  const WordSeq seq = tokenize(hyp, opts);
  ConfidentHyp out;
  out.words.reserve(seq.words.size());
  for (int i = 0; i < seq.size(); ++i) {
    double conf = 1.0;
    if (confidences.has_value()) conf = (*confidences)[static_cast<size_t>(i)];
    out.words.push_back({seq[i].text, conf});
  }
  return out;
}

namespace {

bool parse_row(const nlohmann::json& doc, UtteranceRecord& rec, std::string& err) {
  if (!doc.is_object()) {
    err = "record must be a JSON object";
    return false;
  }
  if (!doc.contains("id") || !doc.at("id").is_string()) {
    err = "missing string field \"id\"";
    return false;
  }
  rec.id = doc.at("id").get<std::string>();
  if (!doc.contains("ref") || !doc.at("ref").is_string()) {
    err = "missing string field \"ref\"";
    return false;
  }
  rec.ref = doc.at("ref").get<std::string>();

  if (doc.contains("words")) {
    // Confidence-corpus shape: words: [{w, conf}]
    if (!doc.at("words").is_array()) {
      err = "\"words\" must be an array";
      return false;
    }
    std::string hyp;
    std::vector<double> confs;
    for (const auto& w : doc.at("words")) {
      if (!w.is_object() || !w.contains("w") || !w.at("w").is_string() || !w.contains("conf") ||
          !w.at("conf").is_number()) {
        err = "each words entry needs {\"w\": string, \"conf\": number}";
        return false;
      }
      const double c = w.at("conf").get<double>();
      if (!(c >= 0.0 && c <= 1.0)) {
        err = "confidence out of [0,1]";
        return false;
      }
      if (!hyp.empty()) hyp += ' ';
      hyp += w.at("w").get<std::string>();
      confs.push_back(c);
    }
    rec.hyp = std::move(hyp);
    rec.confidences = std::move(confs);
    return true;
  }

  if (!doc.contains("hyp") || !doc.at("hyp").is_string()) {
    err = "missing string field \"hyp\"";
    return false;
  }
  rec.hyp = doc.at("hyp").get<std::string>();
  if (doc.contains("confidences")) {
    if (!doc.at("confidences").is_array()) {
      err = "\"confidences\" must be an array of numbers";
      return false;
    }
    std::vector<double> confs;
    for (const auto& c : doc.at("confidences")) {
      if (!c.is_number()) {
        err = "\"confidences\" must be an array of numbers";
        return false;
      }
      const double v = c.get<double>();
      if (!(v >= 0.0 && v <= 1.0)) {
        err = "confidence out of [0,1]";
        return false;
      }
      confs.push_back(v);
    }
    rec.confidences = std::move(confs);
  }
  return true;
}

}  // namespace

LoadResult load_corpus(std::istream& in, const TokenizeOptions& opts) {
  LoadResult out;
  std::unordered_set<std::string> seen;
  std::string line;
  int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      out.errors.push_back({lineno, "", Errc::parse_error, e.what()});
      continue;
    }
    UtteranceRecord rec;
    std::string err;
    if (!parse_row(doc, rec, err)) {
      out.errors.push_back({lineno, rec.id, Errc::parse_error, err});
      continue;
    }
    if (!seen.insert(rec.id).second) {
      out.errors.push_back({lineno, rec.id, Errc::duplicate_id, "duplicate id " + rec.id});
      continue;
    }
    if (tokenize(rec.ref, opts).empty()) {
      out.errors.push_back(
          {lineno, rec.id, Errc::empty_reference, "reference is empty after tokenization"});
      continue;
    }
    if (rec.confidences.has_value()) {
      const size_t n_words = static_cast<size_t>(tokenize(rec.hyp, opts).size());
      if (rec.confidences->size() != n_words) {
        out.errors.push_back({lineno, rec.id, Errc::confidence_length_mismatch,
                              "got " + std::to_string(rec.confidences->size()) +
                                  " confidences for " + std::to_string(n_words) + " words"});
        continue;
      }
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

LoadResult load_corpus_file(const std::string& path, const TokenizeOptions& opts) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open corpus: " + path);
  return load_corpus(in, opts);
}

namespace {

// Shortest round-trip representation: corpus echo must reload bit-identical,
// unlike report values which are fixed at six decimals.
std::string shortest_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void write_corpus(const std::vector<UtteranceRecord>& records, std::ostream& out) {
  for (const UtteranceRecord& r : records) {
    out << "{\"id\":" << json_str(r.id) << ",\"ref\":" << json_str(r.ref)
        << ",\"hyp\":" << json_str(r.hyp);
    if (r.confidences.has_value()) {
      out << ",\"confidences\":[";
      for (size_t i = 0; i < r.confidences->size(); ++i) {
        if (i) out << ',';
        out << shortest_double((*r.confidences)[i]);
      }
      out << ']';
    }
    out << "}\n";
  }
}

EvalReport build_report(const std::vector<UtteranceRecord>& records, AlphaParam alpha,
                        const TokenizeOptions& opts) {
  if (records.empty()) fail(Errc::empty_corpus, "report needs a non-empty corpus");

  EvalReport report;
  report.alpha = alpha.value();
  SummaryAccumulator acc;
  for (size_t row = 0; row < records.size(); ++row) {
    const UtteranceRecord& rec = records[row];
    try {
      const WordSeq ref = tokenize(rec.ref, opts);
      const WordSeq hyp = tokenize(rec.hyp, opts);
      EvalRow out;
      out.id = rec.id;
      out.score = score_utterance(ref, hyp, alpha);
      out.ph_count = normalize_hypothesis(hyp).placeholder_count();
      acc.add(out.score);
      report.per_utterance.push_back(std::move(out));
    } catch (const Error& e) {
      report.failures.push_back({static_cast<int64_t>(row) + 1, rec.id, e.code(), e.what()});
    }
  }
  report.summary = acc.finish(alpha);

  std::sort(report.per_utterance.begin(), report.per_utterance.end(),
            [](const EvalRow& a, const EvalRow& b) { return a.id < b.id; });
  report.scatter.reserve(report.per_utterance.size());
  for (const EvalRow& row : report.per_utterance)
    report.scatter.push_back({row.id, row.score.wer, row.score.ras});
  return report;
}

namespace {

void write_score_fields(const RasScore& s, std::ostream& out) {
  out << "\"ras\":" << fixed6(s.ras) << ",\"usefulness\":" << fixed6(s.usefulness)
      << ",\"cost\":" << fixed6(s.cost) << ",\"wer\":" << json_opt6(s.wer)
      << ",\"n_ref\":" << s.n_ref;
}

}  // namespace

void write_report_json(const EvalReport& report, std::ostream& out) {
  out << "{\"alpha\":" << fixed6(report.alpha) << ",\"count\":" << report.summary.count
      << ",\"summary\":{\"micro\":{";
  write_score_fields(report.summary.micro, out);
  out << "},\"macro\":{\"ras\":" << fixed6(report.summary.macro_ras)
      << ",\"usefulness\":" << fixed6(report.summary.macro_usefulness)
      << ",\"cost\":" << fixed6(report.summary.macro_cost) << "}},\"per_utterance\":[";
  for (size_t i = 0; i < report.per_utterance.size(); ++i) {
    const EvalRow& row = report.per_utterance[i];
    if (i) out << ',';
    out << "{\"id\":" << json_str(row.id) << ',';
    write_score_fields(row.score, out);
    out << ",\"ph_count\":" << row.ph_count << '}';
  }
  out << "],\"scatter\":[";
  for (size_t i = 0; i < report.scatter.size(); ++i) {
    const ScatterPoint& p = report.scatter[i];
    if (i) out << ',';
    out << "{\"id\":" << json_str(p.id) << ",\"wer\":" << json_opt6(p.wer)
        << ",\"ras\":" << fixed6(p.ras) << '}';
  }
  out << "],\"failures\":[";
  for (size_t i = 0; i < report.failures.size(); ++i) {
    const RowFailure& f = report.failures[i];
    if (i) out << ',';
    out << "{\"line\":" << f.row << ",\"id\":" << json_str(f.id) << ",\"error\":"
        << json_str(std::string(errc_name(f.code)) + ": " + f.message) << '}';
  }
  out << "]}\n";
}

void write_report_tsv(const EvalReport& report, std::ostream& out) {
  out << "id\tras\tusefulness\tcost\twer\tn_ref\tph_count\n";
  for (const EvalRow& row : report.per_utterance) {
    out << row.id << '\t' << fixed6(row.score.ras) << '\t' << fixed6(row.score.usefulness)
        << '\t' << fixed6(row.score.cost) << '\t'
        << (row.score.wer.has_value() ? fixed6(*row.score.wer) : std::string()) << '\t'
        << row.score.n_ref << '\t' << row.ph_count << '\n';
  }
}

}  // namespace ras
