#include "loadcast/presets.hpp"

#include <cmath>

#include "loadcast/errors.hpp"

namespace loadcast {

double size_class_target(SizeClass size_class) {
    switch (size_class) {
        case SizeClass::c0_1k: return 100.0;
        case SizeClass::c0_2k: return 200.0;
        case SizeClass::c0_5k: return 500.0;
        case SizeClass::c5k: return 5000.0;
        case SizeClass::c20k: return 20000.0;
        case SizeClass::c40k: return 40000.0;
        case SizeClass::c80k: return 80000.0;
    }
    throw UsageError("unknown size class");
}

std::string size_class_name(SizeClass size_class) {
    switch (size_class) {
        case SizeClass::c0_1k: return "0.1k";
        case SizeClass::c0_2k: return "0.2k";
        case SizeClass::c0_5k: return "0.5k";
        case SizeClass::c5k: return "5k";
        case SizeClass::c20k: return "20k";
        case SizeClass::c40k: return "40k";
        case SizeClass::c80k: return "80k";
    }
    throw UsageError("unknown size class");
}

std::string family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::persistence: return "persistence";
        case ModelFamily::knn: return "knn";
        case ModelFamily::lstm: return "lstm";
        case ModelFamily::transformer: return "transformer";
        case ModelFamily::xlstm: return "xlstm";
    }
    throw UsageError("unknown model family");
}

ModelFamily family_from_name(const std::string& name) {
    if (name == "persistence") return ModelFamily::persistence;
    if (name == "knn") return ModelFamily::knn;
    if (name == "lstm") return ModelFamily::lstm;
    if (name == "transformer") return ModelFamily::transformer;
    if (name == "xlstm") return ModelFamily::xlstm;
    throw UsageError("unknown model family '" + name + "'");
}

SizeClass size_class_from_name(const std::string& name) {
    for (SizeClass sc : {SizeClass::c0_1k, SizeClass::c0_2k, SizeClass::c0_5k, SizeClass::c5k,
                         SizeClass::c20k, SizeClass::c40k, SizeClass::c80k}) {
        if (size_class_name(sc) == name) return sc;
    }
    throw UsageError("unknown size class '" + name + "'");
}

namespace {

constexpr std::size_t kInputFeatures = 20;

LstmArch lstm_arch(SizeClass size_class) {
    switch (size_class) {
        case SizeClass::c0_1k: return {1, 1, false, 2, 2};
        case SizeClass::c0_2k: return {1, 1, true, 2, 2};
        case SizeClass::c0_5k: return {2, 2, true, 5, 5};
        case SizeClass::c5k: return {8, 9, true, 30, 20};
        case SizeClass::c20k: return {22, 20, true, 30, 20};
        case SizeClass::c40k: return {42, 20, true, 30, 20};
        case SizeClass::c80k: return {70, 21, true, 30, 20};
    }
    throw UsageError("unknown size class");
}

TransformerArch transformer_arch(SizeClass size_class) {
    switch (size_class) {
        case SizeClass::c0_1k: return {1, 2, 5, 2};
        case SizeClass::c0_2k: return {1, 2, 4, 4};
        case SizeClass::c0_5k: return {1, 2, 10, 6};
        case SizeClass::c5k: return {1, 4, 80, 20};
        case SizeClass::c20k: return {1, 4, 400, 20};
        case SizeClass::c40k: return {1, 4, 400, 40};
        case SizeClass::c80k: return {2, 8, 400, 40};
    }
    throw UsageError("unknown size class");
}

XlstmArch xlstm_arch(SizeClass size_class) {
    switch (size_class) {
        case SizeClass::c0_5k: return {1, 2, 6, 0};
        case SizeClass::c5k: return {2, 4, 16, 1};
        case SizeClass::c20k: return {2, 4, 32, 1};
        case SizeClass::c40k: return {4, 4, 32, 1};
        case SizeClass::c80k: return {4, 8, 48, 1};
        default:
            throw UsageError("no xlstm preset for size class " + size_class_name(size_class));
    }
}

std::size_t lstm_count(const LstmArch& a) {
    auto cell = [](std::size_t in, std::size_t hidden) {
        return 4 * (hidden * in + hidden * hidden + hidden);
    };
    std::size_t dir = a.bidirectional ? 2 : 1;
    std::size_t n = dir * cell(kInputFeatures, a.layer1_units);
    std::size_t layer1_out = dir * a.layer1_units;
    n += dir * cell(layer1_out, a.layer2_units);
    std::size_t layer2_out = dir * a.layer2_units;
    n += layer2_out * a.dense1 + a.dense1;
    n += a.dense1 * a.dense2 + a.dense2;
    n += a.dense2 * 1 + 1;
    return n;
}

std::size_t transformer_count(const TransformerArch& a) {
    std::size_t d = a.d_model, f = a.feedforward_dim;
    std::size_t attention = 4 * (d * d + d);
    std::size_t feedforward = d * f + f + f * d + d;
    std::size_t norms = 4 * d;  // two affine layer norms
    std::size_t per_layer = attention + feedforward + norms;
    return a.layers * per_layer + (kInputFeatures * d + d) + (d + 1);
}

std::size_t xlstm_count(const XlstmArch& a) {
    std::size_t d = a.d_model, h = a.heads;
    std::size_t mlp = 2 * d * d + 2 * d + 2 * d * d + d;              // d -> 2d -> d
    std::size_t slstm_block = 2 * d                                   // input norm
                              + 4 * (d * d) + 4 * (d * d / h) + 4 * d // gates + recurrent
                              + 2 * d                                 // group norm
                              + mlp;
    std::size_t mlstm_block = 2 * d                                   // input norm
                              + 3 * (d * d + d)                       // q, k, v
                              + 2 * (h * d + h)                       // per-head i, f gates
                              + (d * d + d)                           // output gate
                              + 2 * d                                 // group norm
                              + mlp;
    std::size_t n = 0;
    for (std::size_t b = 0; b < a.blocks; ++b) n += (b == a.slstm_at) ? slstm_block : mlstm_block;
    n += kInputFeatures * d + d;  // projection
    n += 2 * d;                   // final norm
    n += d + 1;                   // head
    return n;
}

}  // namespace

bool has_preset(ModelFamily family, SizeClass size_class) {
    if (family == ModelFamily::lstm || family == ModelFamily::transformer) return true;
    if (family == ModelFamily::xlstm) return size_class >= SizeClass::c0_5k;
    return false;
}

ModelPreset preset_for(ModelFamily family, SizeClass size_class) {
    if (!has_preset(family, size_class)) {
        throw UsageError("no preset for " + family_name(family) + " at size class " +
                         size_class_name(size_class));
    }
    ModelPreset preset;
    preset.family = family;
    preset.size_class = size_class;
    switch (family) {
        case ModelFamily::lstm: preset.lstm = lstm_arch(size_class); break;
        case ModelFamily::transformer: preset.transformer = transformer_arch(size_class); break;
        case ModelFamily::xlstm: preset.xlstm = xlstm_arch(size_class); break;
        default: break;
    }
    return preset;
}

std::vector<ModelPreset> all_deep_presets() {
    std::vector<ModelPreset> presets;
    for (ModelFamily family : {ModelFamily::lstm, ModelFamily::transformer, ModelFamily::xlstm}) {
        for (SizeClass sc : {SizeClass::c0_1k, SizeClass::c0_2k, SizeClass::c0_5k, SizeClass::c5k,
                             SizeClass::c20k, SizeClass::c40k, SizeClass::c80k}) {
            if (has_preset(family, sc)) presets.push_back(preset_for(family, sc));
        }
    }
    return presets;
}

std::size_t count_params(const ModelPreset& preset) {
    switch (preset.family) {
        case ModelFamily::lstm: return lstm_count(preset.lstm);
        case ModelFamily::transformer: return transformer_count(preset.transformer);
        case ModelFamily::xlstm: return xlstm_count(preset.xlstm);
        default: return 0;
    }
}

double size_class_deviation(const ModelPreset& preset) {
    double target = size_class_target(preset.size_class);
    return std::fabs(static_cast<double>(count_params(preset)) - target) / target;
}

}  // namespace loadcast
