#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace loadcast {

enum class ModelFamily { persistence, knn, lstm, transformer, xlstm };

enum class SizeClass { c0_1k, c0_2k, c0_5k, c5k, c20k, c40k, c80k };

double size_class_target(SizeClass size_class);          // 100 .. 80000
std::string size_class_name(SizeClass size_class);       // "0.1k" .. "80k"
std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);
SizeClass size_class_from_name(const std::string& name);

// Stacked recurrent layers with a dense regression head; hidden sizes are per
// direction when bidirectional.
struct LstmArch {
    std::size_t layer1_units = 0;
    std::size_t layer2_units = 0;
    bool bidirectional = false;
    std::size_t dense1 = 0;
    std::size_t dense2 = 0;
};

// Encoder-only attention stack: input projection, fixed sinusoidal positional
// encoding, per-timestep linear head.
struct TransformerArch {
    std::size_t layers = 0;
    std::size_t heads = 0;
    std::size_t feedforward_dim = 0;
    std::size_t d_model = 0;
};

// Residual blocks of exponential-gating recurrent cells; block slstm_at uses
// the scalar-memory cell, all others the matrix-memory cell.
struct XlstmArch {
    std::size_t blocks = 0;
    std::size_t heads = 0;
    std::size_t d_model = 0;
    std::size_t slstm_at = 0;
};

struct ModelPreset {
    ModelFamily family = ModelFamily::lstm;
    SizeClass size_class = SizeClass::c5k;
    LstmArch lstm;
    TransformerArch transformer;
    XlstmArch xlstm;

    std::string name() const { return family_name(family) + "-" + size_class_name(size_class); }
};

// Throws for combinations without a preset (xlstm below 0.5k).
ModelPreset preset_for(ModelFamily family, SizeClass size_class);
bool has_preset(ModelFamily family, SizeClass size_class);

// All 19 deep presets (lstm and transformer at 7 sizes, xlstm at 5).
std::vector<ModelPreset> all_deep_presets();

// Exact trainable-scalar count the preset instantiates to.
std::size_t count_params(const ModelPreset& preset);

// |count - target| / target; presets are designed to stay within 0.15.
double size_class_deviation(const ModelPreset& preset);

}  // namespace loadcast
