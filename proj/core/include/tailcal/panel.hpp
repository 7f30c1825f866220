#pragma once

// The cross-model axis: one row per model with its provider, release
// lineage and capability index.
// File columns: model,provider,lineage,capability[,included]

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace tailcal {

struct PanelModel {
  std::string id;
  std::string provider;
  std::string lineage;
  double capability = 0.0;
  bool included = true;

  friend bool operator==(const PanelModel&, const PanelModel&) = default;
};

class ModelPanel {
 public:
  ModelPanel() = default;
  /// Throws FormatError on duplicate ids or non-finite capability.
  explicit ModelPanel(std::vector<PanelModel> models);

  const std::vector<PanelModel>& models() const { return models_; }
  const PanelModel* find(const std::string& id) const;
  std::size_t size() const { return models_.size(); }

  static ModelPanel read_csv(std::istream& in);
  static ModelPanel load(const std::filesystem::path& path);
  void write_csv(std::ostream& out) const;

 private:
  std::vector<PanelModel> models_;
};

/// Capability and score vectors aligned over the included panel models
/// that have a score, in panel order.
struct PanelScores {
  std::vector<std::string> ids;
  std::vector<std::string> providers;
  std::vector<std::string> lineages;
  std::vector<double> capabilities;
  std::vector<double> scores;

  std::size_t size() const { return ids.size(); }
};

PanelScores align_scores(const ModelPanel& panel, const std::map<std::string, double>& scores);

}  // namespace tailcal
