#pragma once

#include <array>
#include <string>
#include <vector>

#include "mppseg/geometry.hpp"
#include "mppseg/image.hpp"
#include "mppseg/sampler.hpp"

namespace mppseg {

// index of the sample with the largest logged log posterior; ties go to the
// earliest iteration so the choice does not depend on sample order
std::size_t map_index(const std::vector<PosteriorSample>& samples);
const PosteriorSample& map_estimate(const std::vector<PosteriorSample>& samples);

// greedy nearest-center matching of `sample` objects to `ref` objects; a pair is
// admissible when the center distance is below max(s_ref, s_sample).
// result[i] is the matched sample index for ref object i, or -1.
std::vector<int> match_objects(const Configuration& ref, const Configuration& sample);

struct ObjectSummary {
  std::size_t index = 0;  // 1-based, as printed
  ObjectParams marks;
  double mean = 0;
  std::array<double, 4> probability{};  // by TemplateKind
  double matched_fraction = 0;
  bool low_confidence = false;  // unmatched in more than half of the samples
  double aspect_ratio = 0;
  bool straddles = false;  // touches the frame boundary
};

std::vector<ObjectSummary> classification_probabilities(const std::vector<PosteriorSample>& samples,
                                                        const PosteriorSample& ref, const Frame& f);

// reporting conventions: ellipses and squares are symmetric under a half turn,
// so their rotation is shown in (-pi/2, pi/2]; triangles keep (-pi, pi]
double reported_rotation(const ObjectParams& o);

enum class HistField { Scale, Mean, Pure, Template };
HistField hist_field_from_name(const std::string& s);  // s, mu, g, T
const char* hist_field_name(HistField f);

struct Histogram {
  HistField field;
  std::vector<double> edges;  // numeric fields: bins + 1 edges
  std::vector<std::string> labels;  // template field
  std::vector<long long> counts;
};

double freedman_diaconis_width(std::vector<double> v);
// over the objects of one sample; bins = 0 picks the Freedman-Diaconis width
Histogram histogram(const PosteriorSample& s, HistField field, int bins = 0);

Image render_overlay(const Image& img, const Configuration& cfg);

std::string summary_table(const std::vector<ObjectSummary>& objs);
std::string classification_table(const std::vector<ObjectSummary>& objs);
std::string histogram_table(const Histogram& h);

}  // namespace mppseg
