#pragma once

#include <vector>

#include "warpbci/artifact_class.hpp"
#include "warpbci/warp.hpp"

namespace warpbci {

struct Template {
  ArtifactClass label{ArtifactClass::EyeBlink};
  Series series;
};

// Reference gestures for streaming classification.
struct TemplateBank {
  std::vector<Template> templates;

  bool empty() const { return templates.empty(); }
  std::size_t size() const { return templates.size(); }
};

}  // namespace warpbci
