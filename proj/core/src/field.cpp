#include "isip4d/field.hpp"

#include <algorithm>

namespace isip4d {

Dims4 dims_of(const VolumeSequence& seq) {
  const auto& d = seq.spec().dims;
  return {d[0], d[1], d[2], seq.frame_count()};
}

Field4 to_field(const VolumeSequence& seq) {
  Field4 f(dims_of(seq));
  for (int t = 0; t < seq.frame_count(); ++t) {
    const auto src = seq.frame(t).data();
    std::copy(src.begin(), src.end(), f.frame(t).begin());
  }
  return f;
}

}  // namespace isip4d
