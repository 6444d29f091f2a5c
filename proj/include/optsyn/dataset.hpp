// Copyright (c) optsyn contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Dataset ingestion, validation, min-max normalization, and synthetic
// benchmark generation. Wire format is JSONL: one object per line with
// "features" (array of arrays of numbers) and either "labels" (array of
// booleans, one per step) or "label" (a single boolean).

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace optsyn::dataset {

using Trajectory = std::vector<std::vector<double>>;  // steps x features

enum class TaskKind { Labeling, Query };

struct Example {
  Trajectory features;
  std::vector<bool> step_labels;  // labeling task
  bool sequence_label = false;    // query task
};

struct Dataset {
  TaskKind kind = TaskKind::Labeling;
  std::size_t feature_dim = 0;
  std::vector<Example> examples;

  std::size_t total_steps() const;
};

Dataset load_dataset(const std::string& path, TaskKind kind);
Dataset parse_jsonl(std::istream& in, TaskKind kind, const std::string& source_name);
void save_dataset(const Dataset& data, const std::string& path);
void write_jsonl(const Dataset& data, std::ostream& out);

struct NormalizationParams {
  struct Dim {
    double min = 0.0;
    double max = 0.0;
    bool constant = false;  // passed through unscaled
  };
  std::vector<Dim> dims;

  std::string to_json() const;
  static NormalizationParams from_json(const std::string& text);
};

// Affine map of each non-constant dimension onto [-1,1] using training-set
// min/max; out-of-range values are not clamped.
std::pair<Dataset, NormalizationParams> normalize(const Dataset& data);
Dataset apply_normalization(const Dataset& data, const NormalizationParams& params);
Dataset invert_normalization(const Dataset& data, const NormalizationParams& params);

struct SyntheticSpec {
  TaskKind kind = TaskKind::Labeling;
  std::uint64_t seed = 0;
  int num_examples = 20;
  int length = 10;
  int feature_dim = 2;
  double label_noise = 0.0;
};

struct SyntheticResult {
  Dataset data;
  std::string planted_program;    // text of the generating program
  double planted_objective = 0.0; // accuracy (labeling) or f1 (query) of the
                                  // planted program on the emitted dataset
};

// Deterministic per seed; with zero noise the planted program attains the
// emitted labels exactly.
SyntheticResult generate_synthetic(const SyntheticSpec& spec);

// Deterministic, platform-independent RNG used by the generator.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform01();                      // [0,1)
  double uniform(double lo, double hi);    // [lo,hi)
  int uniform_int(int lo, int hi);         // inclusive

 private:
  std::uint64_t state_;
};

}  // namespace optsyn::dataset
