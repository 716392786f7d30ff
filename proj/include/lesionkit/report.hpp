#pragma once

#include <string>
#include <vector>

#include "lesionkit/classify.hpp"
#include "lesionkit/ensemble.hpp"

namespace lesion::report {

/// Fields: types[7], per_type[7], ensemble, max_per_image,
/// dominating_counts[7], images, human_selected (null when absent),
/// human_selected_count, per_image[...].
std::string segmentation_json(const ensemble::SegmentationReport& r);
std::string segmentation_text(const ensemble::SegmentationReport& r);
/// Bar chart of the average accuracy per type, ensemble and max-per-image,
/// with the dominating counts underneath.
std::string segmentation_svg(const ensemble::SegmentationReport& r);

/// Rows are true classes, columns predictions.
std::string confusion_csv(const classify::Confusion& c, const std::vector<std::string>& labels,
                          bool zero_diagonal = false);
std::string confusion_svg(const classify::Confusion& c, const std::vector<std::string>& labels,
                          bool zero_diagonal = false);

std::string cv_json(const classify::CvResult& r, const std::vector<std::string>& labels,
                    const std::vector<std::string>& ids, const std::vector<classify::TypeAccuracy>& per_type);

}  // namespace lesion::report
