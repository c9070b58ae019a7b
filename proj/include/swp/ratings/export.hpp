#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "swp/core/matrix_csv.hpp"
#include "swp/ratings/aggregate.hpp"

namespace swp::ratings {

// Stable sentence ids used as CSV column headers: s001, s002, ...
inline std::string sentence_id(std::size_t j) {
  std::string n = std::to_string(j + 1);
  if (n.size() < 3) n.insert(0, 3 - n.size(), '0');
  return "s" + n;
}

inline std::vector<std::string> tone_labels(const std::vector<Tone>& tones) {
  std::vector<std::string> out;
  for (const auto& t : tones) out.push_back(t.text());
  return out;
}

// Writes `<stem>.csv` (tones x sentence ids) and `<stem>_sentences.csv`
// (sentence_id, text).
inline void write_rating_matrix(const std::filesystem::path& dir, const std::string& stem, const RatingMatrix& rm) {
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < rm.sentences.size(); ++j) ids.push_back(sentence_id(j));
  csv::write_matrix(dir / (stem + ".csv"), "tone", tone_labels(rm.tones), ids, rm.means);
  std::ofstream idx(dir / (stem + "_sentences.csv"));
  if (!idx) throw Error(Errc::io_error, "cannot write sentence index for " + stem);
  csv::write_row(idx, {"sentence_id", "text"});
  for (std::size_t j = 0; j < rm.sentences.size(); ++j) csv::write_row(idx, {ids[j], rm.sentences[j].text()});
}

inline RatingMatrix read_rating_matrix(const std::filesystem::path& dir, const std::string& stem,
                                       Domain domain = Domain::synthetic) {
  const auto m = csv::read_matrix(dir / (stem + ".csv"));
  const auto idx_path = dir / (stem + "_sentences.csv");
  const auto idx = csv::read(idx_path);
  const auto id_col = csv::column(idx, "sentence_id", idx_path.string());
  const auto text_col = csv::column(idx, "text", idx_path.string());
  std::map<std::string, std::string> text_of;
  for (const auto& r : idx.rows) text_of[r[id_col]] = r[text_col];
  RatingMatrix rm;
  rm.domain = domain;
  for (const auto& t : m.rows) rm.tones.push_back(Tone::make(t));
  for (const auto& id : m.cols) {
    auto it = text_of.find(id);
    if (it == text_of.end()) throw Error(Errc::schema_error, idx_path.string() + ": no text for '" + id + "'");
    rm.sentences.push_back(Sentence::make(it->second));
  }
  rm.means = m.values;
  rm.counts = Eigen::MatrixXi::Zero(m.values.rows(), m.values.cols());
  return rm;
}

inline void write_similarity_matrix(const std::filesystem::path& path, const SimilarityMatrix& sm) {
  const auto labels = tone_labels(sm.tones);
  csv::write_matrix(path, "tone", labels, labels, sm.values);
}

inline void write_feature_matrix(const std::filesystem::path& path, const FeatureRatingMatrix& fm) {
  std::vector<std::string> cols;
  for (auto f : fm.features) cols.emplace_back(feature_id(f));
  csv::write_matrix(path, "tone", tone_labels(fm.tones), cols, fm.means);
}

inline FeatureRatingMatrix read_feature_matrix(const std::filesystem::path& path) {
  const auto m = csv::read_matrix(path);
  FeatureRatingMatrix fm;
  if (m.cols.size() != kFeatures.size()) throw Error(Errc::schema_error, path.string() + ": expected 4 features");
  for (std::size_t f = 0; f < kFeatures.size(); ++f)
    if (m.cols[f] != feature_id(kFeatures[f]))
      throw Error(Errc::schema_error, path.string() + ": column " + std::to_string(f + 2) + " must be " +
                                          std::string(feature_id(kFeatures[f])));
  for (const auto& t : m.rows) fm.tones.push_back(Tone::make(t));
  fm.means = m.values;
  fm.counts = Eigen::MatrixXi::Zero(m.values.rows(), m.values.cols());
  return fm;
}

}  // namespace swp::ratings
