#include "strandkit/strand.hpp"

namespace strandkit {

void validate(const Hairstyle& hair) {
  require(!hair.empty(), ErrorCode::invalid_argument, "hairstyle has no strands");
  const Eigen::Index n = hair.strands.front().rows();
  require(n >= 2, ErrorCode::sizing, "strands need at least two points");
  for (std::size_t k = 0; k < hair.size(); ++k) {
    require(hair.strands[k].rows() == n, ErrorCode::sizing,
            "strand " + std::to_string(k) + " has " + std::to_string(hair.strands[k].rows()) +
                " points, expected " + std::to_string(n));
    require(hair.strands[k].allFinite(), ErrorCode::invalid_argument,
            "strand " + std::to_string(k) + " has non-finite coordinates");
  }
}

}  // namespace strandkit
