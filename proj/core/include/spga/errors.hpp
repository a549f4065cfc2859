#pragma once

#include <stdexcept>

namespace spga {

// Fewer samples than a sample variance requires (need at least two rows).
class InsufficientSamplesError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A batch, store or dataset lacks one of the two classes.
class MissingClassError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace spga
