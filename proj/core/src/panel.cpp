#include "tailcal/panel.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "tailcal/csv.hpp"
#include "tailcal/error.hpp"
#include "tailcal/score_table.hpp"

namespace tailcal {

ModelPanel::ModelPanel(std::vector<PanelModel> models) : models_(std::move(models)) {
  std::set<std::string> ids;
  for (const auto& m : models_) {
    if (m.id.empty()) throw FormatError("panel model with empty id");
    if (!ids.insert(m.id).second) throw FormatError(fmt::format("duplicate panel model '{}'", m.id));
    if (!std::isfinite(m.capability)) {
      throw FormatError(fmt::format("panel model '{}' has non-finite capability", m.id));
    }
  }
}

const PanelModel* ModelPanel::find(const std::string& id) const {
  for (const auto& m : models_) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

ModelPanel ModelPanel::read_csv(std::istream& in) {
  std::vector<PanelModel> models;
  std::vector<std::string> f;
  std::size_t line_no = 0;
  bool first = true;
  while (csv::next_record(in, f, line_no)) {
    if (first) {
      first = false;
      if (!f.empty() && f[0] == "model") continue;
    }
    if (f.size() != 4 && f.size() != 5) {
      throw FormatError(fmt::format("panel line {}: expected 4 or 5 fields", line_no));
    }
    PanelModel m{f[0], f[1], f[2]};
    const auto res = std::from_chars(f[3].data(), f[3].data() + f[3].size(), m.capability);
    if (res.ec != std::errc{} || res.ptr != f[3].data() + f[3].size()) {
      throw FormatError(fmt::format("panel line {}: bad capability '{}'", line_no, f[3]));
    }
    if (f.size() == 5) {
      if (f[4] == "1" || f[4] == "true") {
        m.included = true;
      } else if (f[4] == "0" || f[4] == "false") {
        m.included = false;
      } else {
        throw FormatError(fmt::format("panel line {}: bad included flag '{}'", line_no, f[4]));
      }
    }
    models.push_back(std::move(m));
  }
  return ModelPanel(std::move(models));
}

ModelPanel ModelPanel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(fmt::format("cannot open '{}'", path.string()));
  return read_csv(in);
}

void ModelPanel::write_csv(std::ostream& out) const {
  out << "model,provider,lineage,capability,included\n";
  for (const auto& m : models_) {
    out << csv::join({m.id, m.provider, m.lineage, format_number(m.capability),
                      m.included ? "1" : "0"})
        << '\n';
  }
}

PanelScores align_scores(const ModelPanel& panel, const std::map<std::string, double>& scores) {
  PanelScores out;
  for (const auto& m : panel.models()) {
    if (!m.included) continue;
    const auto it = scores.find(m.id);
    if (it == scores.end() || !std::isfinite(it->second)) continue;
    out.ids.push_back(m.id);
    out.providers.push_back(m.provider);
    out.lineages.push_back(m.lineage);
    out.capabilities.push_back(m.capability);
    out.scores.push_back(it->second);
  }
  return out;
}

}  // namespace tailcal
