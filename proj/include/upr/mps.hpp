#pragma once

#include <string>
#include <utility>
#include <vector>

#include "upr/mip.hpp"

namespace upr {

enum class MpsFormat { fixed, free };

/// MPS text plus the (short name, model name) pairs used for mangling. In free format the
/// model names are written as-is and the map is empty.
struct MpsDocument {
    std::string text;
    std::vector<std::pair<std::string, std::string>> name_map;
};

MpsFormat mps_format_from_string(const std::string& s);

MpsDocument export_model(const MipModel& model, MpsFormat format);
/// Name map file: one "short original" pair per line.
std::string name_map_text(const MpsDocument& doc);

/// Parses fixed or free MPS (whitespace-tokenised, so names must not contain blanks).
/// Names listed in name_map are restored to their originals. Binary marks come from
/// INTORG/INTEND markers or BV bounds.
MipModel import_model(const std::string& text,
                      const std::vector<std::pair<std::string, std::string>>& name_map = {});

}  // namespace upr
