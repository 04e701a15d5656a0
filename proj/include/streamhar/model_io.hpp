#ifndef STREAMHAR_MODEL_IO_HPP
#define STREAMHAR_MODEL_IO_HPP

#include <string>
#include <vector>

#include "streamhar/correction.hpp"
#include "streamhar/hhmm.hpp"

namespace streamhar {

inline constexpr int kModelFormatVersion = 1;

// Everything a deployment needs in one artifact: the fitted recognizer plus
// the duration/time-of-day densities and their threshold settings.
struct ModelDocument {
  HhmmModel model;
  std::vector<JointPdf> pdfs;
  CorrectionConfig correction;
};

// Round trip is lossless: doubles are written with enough digits to parse
// back to the identical bit pattern.
std::string model_to_json(const ModelDocument& doc);
ModelDocument model_from_json(const std::string& text);

void save_model(const ModelDocument& doc, const std::string& path);
ModelDocument load_model(const std::string& path);

// One JSON object per line, "type" first: begin / ongoing / interrupt_begin
// / resume / segment, with event index, timestamp and (where it applies) the
// per-class log-likelihood array in class-id order.
std::string output_to_jsonl(const EngineOutput& output, const ClassRegistry& classes);

std::string segment_to_json(const Segment& segment, const ClassRegistry& classes);

}  // namespace streamhar

#endif  // STREAMHAR_MODEL_IO_HPP
