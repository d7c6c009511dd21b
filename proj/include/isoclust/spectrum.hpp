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
#pragma once

#include <optional>
#include <string>
#include <vector>

namespace isoclust {

/// Declared m/z range of the instrument, in Da.
struct InstrumentRange {
  double lo = 1013.0;
  double hi = 3700.0;
};

/// One sample's spectrum: an m/z grid (strictly increasing) with matching
/// non-negative intensities.
struct RawSpectrum {
  std::string sample_id;
  std::vector<double> mz;
  std::vector<double> intensity;

  std::size_t size() const { return mz.size(); }
};

enum class ClassLabel { control = 0, case_ = 1 };

enum class SetLabel { calibration, validation };

struct SampleRecord {
  std::string sample_id;
  ClassLabel label = ClassLabel::control;
  int plate = 0;
  SetLabel set = SetLabel::calibration;
  int replicate = 1;

  /// Identifier of the observation unit: sample_id when there is a single
  /// replicate, otherwise sample_id tagged with the replicate.
  std::string observation_id() const;
};

struct SampleTable {
  std::vector<SampleRecord> rows;

  std::size_t count(ClassLabel label) const;
  std::vector<int> plates() const;
};

/// Parses a two-column delimited spectrum file (m/z, intensity). Delimiter is
/// auto-detected among comma/tab/semicolon (whitespace as fallback); a first
/// line with no numeric field is treated as a header. Rows are sorted by m/z.
/// Throws ParseError on malformed lines, ValidationError on duplicated m/z,
/// negative intensities, fewer than two rows, or (if `range` is given) m/z
/// outside the declared instrument range.
RawSpectrum parse_spectrum(const std::string& path,
                           std::optional<InstrumentRange> range = std::nullopt);

void write_spectrum(const RawSpectrum& spec, const std::string& path);

/// Parses the cohort metadata table. Expects a header naming the five fields
/// sample_id, class, plate, set, replicate (any order). Class labels must be
/// "case" or "control"; set labels "calibration" or "validation".
SampleTable parse_metadata(const std::string& path);

void write_metadata(const SampleTable& table, const std::string& path);

/// Spectrum file path for one metadata row under `spectra_dir`
/// (<sample_id>_r<replicate>.csv).
std::string spectrum_path(const std::string& spectra_dir, const SampleRecord& row);

/// Loads every referenced spectrum; errors if any file is missing. When
/// `average_replicates` is set, replicate spectra of the same sample_id are
/// averaged on their (identical) grid and the table collapses to replicate 1.
struct Corpus {
  SampleTable table;
  std::vector<RawSpectrum> spectra;  // parallel to table.rows
};
Corpus load_corpus(const std::string& metadata_path, const std::string& spectra_dir,
                   std::optional<InstrumentRange> range = std::nullopt,
                   bool average_replicates = false);

}  // namespace isoclust
