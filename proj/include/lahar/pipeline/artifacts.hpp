#pragma once

#include <string>

#include "lahar/pipeline/pipeline.hpp"

namespace lahar::pipeline {

/// JSON wire formats for the on-disk run layout (segments/, results/).
/// Timestamps serialize as their rendered text; serialization is
/// deterministic for identical values.
std::string prepared_segment_to_json(const PreparedSegment& prepared);
PreparedSegment prepared_segment_from_json(const std::string& text);

std::string segment_result_to_json(const SegmentResult& result);
SegmentResult segment_result_from_json(const std::string& text);

} // namespace lahar::pipeline
