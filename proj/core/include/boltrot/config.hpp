#pragma once

// JSON (de)serialization for every configuration document. Readers are
// strict: unknown keys and wrong types raise ConfigError naming the field,
// malformed text raises ConfigError with line and column.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "boltrot/detection.hpp"
#include "boltrot/eval.hpp"
#include "boltrot/pipeline.hpp"
#include "boltrot/synth.hpp"

namespace boltrot {

enum class DetectorKind { Annotation, Blob };

std::string_view to_string(DetectorKind k) noexcept;

struct RunConfig {
  PipelineConfig pipeline;
  DetectorKind detector = DetectorKind::Annotation;
  BlobParams blob;
  std::optional<std::uint64_t> seed;  ///< overrides pipeline.msac.seed when set
  std::string history_out;
  std::string summary_out;

  /// pipeline with the seed override applied.
  PipelineConfig effective_pipeline() const;
  void validate() const;
};

std::string to_json(const PipelineConfig& c);
std::string to_json(const SceneConfig& c);
std::string to_json(const StudyGrid& c);
std::string to_json(const RunConfig& c);

PipelineConfig parse_pipeline_config(const std::string& text);
SceneConfig parse_scene_config(const std::string& text);
StudyGrid parse_study_grid(const std::string& text);
RunConfig parse_run_config(const std::string& text);

/// Reads a whole file; IoError when unreadable.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace boltrot
