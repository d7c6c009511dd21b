/*******************************************************************************
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

 http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
 *******************************************************************************/
#include "isoclust/spectrum.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "isoclust/errors.hpp"
#include "isoclust/text.hpp"

namespace fs = std::filesystem;

namespace isoclust {

std::string SampleRecord::observation_id() const {
  if (replicate == 1) return sample_id;
  return sample_id + "_r" + std::to_string(replicate);
}

std::size_t SampleTable::count(ClassLabel label) const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(),
                    [&](const SampleRecord& r) { return r.label == label; }));
}

std::vector<int> SampleTable::plates() const {
  std::set<int> ids;
  for (const auto& r : rows) ids.insert(r.plate);
  return std::vector<int>(ids.begin(), ids.end());
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool no_numeric_field(const std::vector<std::string_view>& fields) {
  for (auto f : fields)
    if (parse_double(f)) return false;
  return true;
}

}  // namespace

RawSpectrum parse_spectrum(const std::string& path, std::optional<InstrumentRange> range) {
  auto lines = read_lines(path);
  RawSpectrum spec;
  spec.sample_id = fs::path(path).stem().string();

  char delim = 0;
  std::vector<std::pair<double, double>> rows;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    std::string_view raw = trim(lines[ln]);
    if (raw.empty() || raw.front() == '#') continue;
    if (delim == 0) delim = detect_delimiter(raw);
    auto fields = split_auto(raw, delim);
    if (rows.empty() && ln == 0 && no_numeric_field(fields)) continue;  // header
    if (fields.size() != 2)
      throw ParseError(path, ln + 1,
                       "expected two columns (mz, intensity), got " +
                           std::to_string(fields.size()));
    auto mz = parse_double(fields[0]);
    auto inten = parse_double(fields[1]);
    if (!mz) throw ParseError(path, ln + 1, "cannot parse m/z value '" + std::string(fields[0]) + "'");
    if (!inten)
      throw ParseError(path, ln + 1, "cannot parse intensity value '" + std::string(fields[1]) + "'");
    rows.emplace_back(*mz, *inten);
  }
  if (rows.size() < 2)
    throw ValidationError(path + ": spectrum needs at least 2 rows, got " +
                          std::to_string(rows.size()));

  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    if (rows[k].first == rows[k + 1].first)
      throw ValidationError(path + ": duplicated m/z value " + format_double(rows[k].first));
  }
  for (const auto& [mz, inten] : rows) {
    if (inten < 0.0)
      throw ValidationError(path + ": negative intensity " + format_double(inten) + " at m/z " +
                            format_double(mz));
    if (range && (mz < range->lo || mz > range->hi))
      throw ValidationError(path + ": m/z " + format_double(mz) +
                            " outside instrument range [" + format_double(range->lo) + ", " +
                            format_double(range->hi) + "]");
  }

  spec.mz.reserve(rows.size());
  spec.intensity.reserve(rows.size());
  for (const auto& [mz, inten] : rows) {
    spec.mz.push_back(mz);
    spec.intensity.push_back(inten);
  }
  return spec;
}

void write_spectrum(const RawSpectrum& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << "mz,intensity\n";
  for (std::size_t k = 0; k < spec.size(); ++k)
    out << format_double(spec.mz[k]) << ',' << format_double(spec.intensity[k]) << '\n';
  if (!out) throw Error("write failed: " + path);
}

namespace {

ClassLabel parse_class(std::string_view token, const std::string& path, std::size_t ln) {
  std::string t = lower(trim(token));
  if (t == "case") return ClassLabel::case_;
  if (t == "control") return ClassLabel::control;
  throw ValidationError(path + ":" + std::to_string(ln) + ": unknown class label '" + t +
                        "' (allowed: case, control)");
}

SetLabel parse_set(std::string_view token, const std::string& path, std::size_t ln) {
  std::string t = lower(trim(token));
  if (t == "calibration") return SetLabel::calibration;
  if (t == "validation") return SetLabel::validation;
  throw ValidationError(path + ":" + std::to_string(ln) + ": unknown set label '" + t +
                        "' (allowed: calibration, validation)");
}

}  // namespace

SampleTable parse_metadata(const std::string& path) {
  auto lines = read_lines(path);
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw ValidationError(path + ": no rows");

  char delim = detect_delimiter(trim(lines[first]));
  auto header = split_auto(trim(lines[first]), delim);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[lower(trim(header[i]))] = i;
  for (const char* name : {"sample_id", "class", "plate", "set", "replicate"}) {
    if (!col.count(name))
      throw ValidationError(path + ": metadata header is missing column '" + std::string(name) +
                            "'");
  }

  SampleTable table;
  std::set<std::pair<std::string, int>> seen;
  for (std::size_t ln = first + 1; ln < lines.size(); ++ln) {
    std::string_view raw = trim(lines[ln]);
    if (raw.empty() || raw.front() == '#') continue;
    auto fields = split_auto(raw, delim);
    if (fields.size() < header.size())
      throw ParseError(path, ln + 1, "expected " + std::to_string(header.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    SampleRecord row;
    row.sample_id = std::string(trim(fields[col["sample_id"]]));
    if (row.sample_id.empty()) throw ParseError(path, ln + 1, "empty sample_id");
    row.label = parse_class(fields[col["class"]], path, ln + 1);
    auto plate = parse_int(fields[col["plate"]]);
    if (!plate) throw ParseError(path, ln + 1, "cannot parse plate");
    row.plate = static_cast<int>(*plate);
    row.set = parse_set(fields[col["set"]], path, ln + 1);
    auto rep = parse_int(fields[col["replicate"]]);
    if (!rep || *rep < 1) throw ParseError(path, ln + 1, "replicate must be a positive integer");
    row.replicate = static_cast<int>(*rep);
    if (!seen.insert({row.sample_id, row.replicate}).second)
      throw ValidationError(path + ": duplicate (sample_id, replicate) = (" + row.sample_id + ", " +
                            std::to_string(row.replicate) + ")");
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw ValidationError(path + ": no rows");
  return table;
}

void write_metadata(const SampleTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write file: " + path);
  out << "sample_id,class,plate,set,replicate\n";
  for (const auto& r : table.rows) {
    out << r.sample_id << ',' << (r.label == ClassLabel::case_ ? "case" : "control") << ','
        << r.plate << ',' << (r.set == SetLabel::calibration ? "calibration" : "validation") << ','
        << r.replicate << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

std::string spectrum_path(const std::string& spectra_dir, const SampleRecord& row) {
  return (fs::path(spectra_dir) / (row.sample_id + "_r" + std::to_string(row.replicate) + ".csv"))
      .string();
}

Corpus load_corpus(const std::string& metadata_path, const std::string& spectra_dir,
                   std::optional<InstrumentRange> range, bool average_replicates) {
  Corpus corpus;
  corpus.table = parse_metadata(metadata_path);
  for (const auto& row : corpus.table.rows) {
    std::string path = spectrum_path(spectra_dir, row);
    if (!fs::exists(path))
      throw ValidationError("metadata references missing spectrum file: " + path);
  }
  corpus.spectra.reserve(corpus.table.rows.size());
  for (const auto& row : corpus.table.rows) {
    auto spec = parse_spectrum(spectrum_path(spectra_dir, row), range);
    spec.sample_id = row.observation_id();
    corpus.spectra.push_back(std::move(spec));
  }

  if (average_replicates) {
    SampleTable merged_table;
    std::vector<RawSpectrum> merged_spectra;
    std::map<std::string, std::size_t> index;
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < corpus.table.rows.size(); ++i) {
      const auto& row = corpus.table.rows[i];
      auto it = index.find(row.sample_id);
      if (it == index.end()) {
        index[row.sample_id] = merged_table.rows.size();
        SampleRecord r = row;
        r.replicate = 1;
        merged_table.rows.push_back(r);
        RawSpectrum s = corpus.spectra[i];
        s.sample_id = row.sample_id;
        merged_spectra.push_back(std::move(s));
        counts.push_back(1);
      } else {
        RawSpectrum& acc = merged_spectra[it->second];
        const RawSpectrum& add = corpus.spectra[i];
        if (acc.mz != add.mz)
          throw ValidationError("replicate averaging requires identical m/z grids for sample " +
                                row.sample_id);
        for (std::size_t k = 0; k < acc.size(); ++k) acc.intensity[k] += add.intensity[k];
        ++counts[it->second];
      }
    }
    for (std::size_t s = 0; s < merged_spectra.size(); ++s)
      for (auto& v : merged_spectra[s].intensity) v /= static_cast<double>(counts[s]);
    corpus.table = std::move(merged_table);
    corpus.spectra = std::move(merged_spectra);
  }
  return corpus;
}

}  // namespace isoclust
