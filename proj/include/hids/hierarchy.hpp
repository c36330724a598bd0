#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hids/dataset.hpp"
#include "hids/forest_pa.hpp"
#include "hids/preprocess.hpp"
#include "hids/rep_tree.hpp"
#include "hids/ripper.hpp"

namespace hids {

/// Maps a stage's output labels onto evenly spaced codes in [0, 1].
struct CodeTable {
    std::vector<std::string> labels;

    double encode(size_t index) const;
    size_t index_of(std::string_view label) const;  // throws on unknown label
    /// Nearest-code inverse of encode.
    size_t decode(double code) const;
};

double encode_prediction(std::string_view label, const CodeTable& table);

/// record ++ [encode(out1), encode(out2)].
std::vector<double> augment(std::span<const double> record, std::string_view out1,
                            std::string_view out2, const CodeTable& code1,
                            const CodeTable& code2);

struct StackParams {
    RepTreeParams reptree;
    RipperParams ripper;
    PaTreeParams forest;
    uint64_t seed = 0;        // master; per-stage seeds derive from it
    bool fine_targets = true;  // final stage labels: fine (default) or category
};

struct StagedPrediction {
    int32_t out1 = -1;  // index into code1.labels
    int32_t out2 = -1;  // index into code2.labels
    int32_t out3 = -1;  // index into model3.classes
};

/// The two-layer stack: a binary-view tree and a category-view rule list
/// feed their encoded outputs, alongside the base features, into the
/// final forest.
struct HierarchicalModel {
    RepTreeModel model1;
    RuleSet model2;
    ForestPaModel model3;
    NormalizationStats stats;
    LabelView view1, view2, view3;
    CodeTable code1, code2;
    std::vector<std::string> fine_classes;
    size_t base_width = 0;
    uint64_t master_seed = 0;
    bool fine_targets = true;

    /// Raw record -> normalize -> stage 1 -> stage 2 -> augment -> stage 3.
    StagedPrediction predict_stages(std::span<const double> raw) const;
    int32_t predict(std::span<const double> raw) const;
    const std::string& final_label(int32_t out3) const {
        return model3.classes[static_cast<size_t>(out3)];
    }

    void save(std::ostream& out) const;
    static HierarchicalModel load(std::istream& in);
};

/// Fits the normalizer once, trains stage 1 on the binary view and stage
/// 2 on the category view (fine view when the labels have no category
/// grouping), augments every training row with both stage outputs, then
/// trains the forest on the augmented rows.
HierarchicalModel train_hierarchy(const Dataset& train, const StackParams& params);

/// Row-parallel batch prediction; output order matches row order
/// regardless of thread count.
std::vector<StagedPrediction> predict_batch(const HierarchicalModel& model, const Dataset& data,
                                            size_t threads);

}  // namespace hids
