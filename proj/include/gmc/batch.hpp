#pragma once

#include <vector>

namespace gmc {

/// One aligned (video, caption) positive pair with its score buckets. The
/// other pairs of a batch act as in-batch negatives.
struct PairItem {
    int video_index = -1;
    int caption_index = -1;
    int sentence_bucket = 0;
    int video_bucket = 0;
};

using Batch = std::vector<PairItem>;

} // namespace gmc
