#include "fairstyle/core/adapters.hpp"

#include <cmath>

#include "fairstyle/core/error.hpp"

namespace fairstyle {

Image GeneratorAdapter::synthesize(const StyleCode& code, const FairStyleTensor* tensor) const {
  if (tensor == nullptr) return render(code);
  return render(apply_fairstyle(code, *tensor));
}

ClassifierAdapter::ClassifierAdapter(std::string attribute, double threshold, Boundary boundary)
    : attribute_(std::move(attribute)), threshold_(threshold), boundary_(boundary) {
  if (attribute_.empty()) throw ConfigError("classifier needs an attribute name");
  if (!(threshold_ >= 0.0 && threshold_ <= 1.0)) {
    throw ConfigError("classifier threshold must lie in [0, 1]", "threshold");
  }
}

}  // namespace fairstyle
