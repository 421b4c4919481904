#pragma once

#include <string>

#include "lsc/align.hpp"
#include "lsc/corpus.hpp"
#include "lsc/ensemble.hpp"
#include "lsc/features.hpp"
#include "lsc/vectors.hpp"

namespace lsc {

struct PipelineOptions {
  LandmarkSelection landmarks = LandmarkSelection::all();
  FeatureOptions features;
  double threshold = 0.75;
};

struct PipelineResult {
  AlignmentResult alignment;
  FeatureTable features;
  ScoreTable scores;
};

// align -> features -> ensemble. Embeddings are taken as given, so repeated
// calls with different landmark selections only redo the alignment onward.
inline PipelineResult run_pipeline(const EmbeddingMatrix& emb1, const EmbeddingMatrix& emb2,
                                   const Vocabulary& v1, const Vocabulary& v2,
                                   const PipelineOptions& opt) {
  PipelineResult r;
  r.alignment = align(emb1, emb2, v1, v2, opt.landmarks);
  FeatureOptions fo = opt.features;
  fo.landmark_config = opt.landmarks.describe();
  r.features = build_feature_table(r.alignment.aligned, emb2, v1, v2, fo);
  r.scores = score_pipeline(r.features, opt.threshold);
  return r;
}

}  // namespace lsc
